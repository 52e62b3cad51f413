// Command-line front end for the taskplan shared library. All functionality
// goes through the C API in taskplan.h; this file only parses arguments,
// merges the config document with flag overrides and reports errors.
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taskplan.h"

using nlohmann::json;

namespace {

struct GrammarHandle {
  tp_grammar_set* gs = nullptr;
  ~GrammarHandle() { tp_grammar_set_free(gs); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { tp_string_free(s); }
};

[[noreturn]] void fail(tp_status status) {
  std::fprintf(stderr, "error: %s\n", tp_last_error());
  std::exit(status == TP_OK ? 1 : static_cast<int>(status));
}

void check(tp_status status) {
  if (status != TP_OK) fail(status);
}

// Flag values land in `overrides` only when the user passed them, so the
// precedence is flags > config file > built-in defaults.
struct ConfigBuilder {
  std::string config_path;
  json overrides = json::object();

  void set(const char* dotted, json value) {
    json* node = &overrides;
    std::string key(dotted);
    size_t pos;
    while ((pos = key.find('.')) != std::string::npos) {
      node = &(*node)[key.substr(0, pos)];
      key = key.substr(pos + 1);
    }
    (*node)[key] = std::move(value);
  }

  static void merge(json& base, const json& patch) {
    for (auto it = patch.begin(); it != patch.end(); ++it) {
      if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
        merge(base[it.key()], *it);
      else
        base[it.key()] = *it;
    }
  }

  std::string build() const {
    json merged = json::object();
    if (!config_path.empty()) {
      std::FILE* f = std::fopen(config_path.c_str(), "rb");
      if (!f) {
        std::fprintf(stderr, "error: cannot open config '%s'\n", config_path.c_str());
        std::exit(TP_ERROR_IO);
      }
      std::string text;
      char buf[4096];
      size_t n;
      while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
      std::fclose(f);
      merged = json::parse(text, nullptr, false);
      if (merged.is_discarded()) {
        std::fprintf(stderr, "error: config '%s' is not valid JSON\n", config_path.c_str());
        std::exit(TP_ERROR_PARSE);
      }
    }
    merge(merged, overrides);
    return merged.dump();
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taskplan — and-or grammar task planning with recurrent decoders"};
  app.set_version_flag("--version", tp_version());
  app.require_subcommand(1);

  std::string grammars_path;
  ConfigBuilder cfg;
  app.add_option("--config", cfg.config_path, "configuration JSON file")->expected(1);

  // common options added per subcommand
  auto add_grammars = [&](CLI::App* cmd) {
    cmd->add_option("--grammars", grammars_path, "grammar-set JSON file")->required();
  };

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "load and validate a grammar set");
  std::string validate_positional;
  cmd_validate->add_option("grammar-file", validate_positional, "grammar-set JSON file");
  cmd_validate->add_option("--grammars", grammars_path, "grammar-set JSON file");

  // enumerate
  auto* cmd_enumerate = app.add_subcommand("enumerate", "print every sequence of a task grammar");
  add_grammars(cmd_enumerate);
  std::string task_name;
  int max_sequences = 10000;
  cmd_enumerate->add_option("--task", task_name, "task name")->required();
  cmd_enumerate->add_option("--max", max_sequences, "maximum sequences before error");

  // gen-data
  auto* cmd_gen = app.add_subcommand("gen-data", "generate a synthetic annotated dataset");
  add_grammars(cmd_gen);
  std::string out_train, out_test;
  cmd_gen->add_option("--out-train", out_train, "output train JSONL")->required();
  cmd_gen->add_option("--out-test", out_test, "output test JSONL")->required();
  int count_per_task = -1;
  long long data_seed = -1;
  std::string split_arg, tasks_arg;
  cmd_gen->add_option("--count-per-task", count_per_task, "samples per task");
  cmd_gen->add_option("--seed", data_seed, "data seed");
  cmd_gen->add_option("--split", split_arg, "train,test ratios (e.g. 0.6,0.4)");
  cmd_gen->add_option("--tasks", tasks_arg, "comma-separated task subset");

  // train-selector
  auto* cmd_tsel = app.add_subcommand("train-selector", "train the or-node selector network");
  add_grammars(cmd_tsel);
  std::string train_path, model_out, report_out;
  long long net_seed = -1;
  int hidden = -1, epochs = -1;
  cmd_tsel->add_option("--train", train_path, "annotated train JSONL")->required();
  cmd_tsel->add_option("--out-model", model_out, "model checkpoint path")->required();
  cmd_tsel->add_option("--report", report_out, "training report JSON path");
  cmd_tsel->add_option("--hidden", hidden, "hidden size");
  cmd_tsel->add_option("--epochs", epochs, "training epochs");
  cmd_tsel->add_option("--seed", net_seed, "selector seed");

  // augment
  auto* cmd_aug = app.add_subcommand("augment", "generate selector-labelled samples");
  add_grammars(cmd_aug);
  std::string selector_model, aug_out, aug_tasks;
  int aug_count = -1;
  long long aug_seed = -1;
  cmd_aug->add_option("--model", selector_model, "selector checkpoint")->required();
  cmd_aug->add_option("--out", aug_out, "output JSONL")->required();
  cmd_aug->add_option("--count", aug_count, "number of samples");
  cmd_aug->add_option("--seed", aug_seed, "augment seed");
  cmd_aug->add_option("--tasks", aug_tasks, "comma-separated task subset");

  // train-decoder
  auto* cmd_tdec = app.add_subcommand("train-decoder", "train the action-sequence decoder");
  add_grammars(cmd_tdec);
  std::vector<std::string> decoder_train;
  cmd_tdec->add_option("--train", decoder_train, "training JSONL (repeatable)")->required();
  cmd_tdec->add_option("--out-model", model_out, "model checkpoint path")->required();
  cmd_tdec->add_option("--report", report_out, "training report JSON path");
  cmd_tdec->add_option("--hidden", hidden, "hidden size");
  cmd_tdec->add_option("--epochs", epochs, "training epochs");
  cmd_tdec->add_option("--seed", net_seed, "decoder seed");

  // predict
  auto* cmd_pred = app.add_subcommand("predict", "decode sequences for scenes");
  add_grammars(cmd_pred);
  std::string pred_model, pred_in, pred_out;
  cmd_pred->add_option("--model", pred_model, "decoder checkpoint")->required();
  cmd_pred->add_option("--input", pred_in, "input JSONL (dataset format)")->required();
  cmd_pred->add_option("--out", pred_out, "prediction JSONL")->required();

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "score a decoder on a test set");
  add_grammars(cmd_eval);
  std::string eval_model, eval_test, eval_prefix;
  cmd_eval->add_option("--model", eval_model, "decoder checkpoint")->required();
  cmd_eval->add_option("--test", eval_test, "test JSONL")->required();
  cmd_eval->add_option("--report-prefix", eval_prefix, "report file prefix")->required();

  // experiment
  auto* cmd_exp = app.add_subcommand("experiment", "run the ablation or generalization protocol");
  add_grammars(cmd_exp);
  std::string exp_name, out_dir, held_out_arg;
  long long exp_seed = -1;
  cmd_exp->add_option("name", exp_name, "ablation | generalization")->required();
  cmd_exp->add_option("--out-dir", out_dir, "output directory")->required();
  cmd_exp->add_option("--seed", exp_seed, "base seed for data/selector/augment/decoder");
  cmd_exp->add_option("--held-out", held_out_arg, "comma-separated held-out task names");

  CLI11_PARSE(app, argc, argv);

  if (!validate_positional.empty()) grammars_path = validate_positional;
  if (grammars_path.empty()) {
    std::fprintf(stderr, "error: --grammars is required\n");
    return TP_ERROR_INVALID_ARGUMENT;
  }

  GrammarHandle grammar;
  check(tp_grammar_set_load_file(grammars_path.c_str(), &grammar.gs));

  if (cmd_validate->parsed()) {
    OwnedString summary;
    check(tp_grammar_set_summary_json(grammar.gs, &summary.s));
    json j = json::parse(summary.s);
    std::printf("grammar set OK: %d task(s), %d distinct node ids\n",
                tp_grammar_set_task_count(grammar.gs), j.at("nodeIndexSize").get<int>());
    for (const auto& jt : j.at("tasks"))
      std::printf("  %-48s nodes=%-3d or=%-2d terminals=%-3d language=%zu\n",
                  jt.at("name").get<std::string>().c_str(), jt.at("nodes").get<int>(),
                  jt.at("orNodes").get<int>(), jt.at("terminals").get<int>(),
                  jt.at("languageSize").get<size_t>());
    return 0;
  }

  if (cmd_enumerate->parsed()) {
    OwnedString out;
    check(tp_enumerate_task(grammar.gs, task_name.c_str(), max_sequences, &out.s));
    json j = json::parse(out.s);
    for (const auto& jseq : j.at("sequences")) {
      std::string line;
      for (const auto& jp : jseq) {
        if (!line.empty()) line += " ";
        line += "(" + jp[0].get<std::string>() + ", " + jp[1].get<std::string>() + ")";
      }
      std::printf("%s\n", line.c_str());
    }
    std::printf("total: %zu\n", j.at("count").get<size_t>());
    return 0;
  }

  if (cmd_gen->parsed()) {
    if (count_per_task >= 0) cfg.set("data.countPerTask", count_per_task);
    if (data_seed >= 0) cfg.set("seeds.data", data_seed);
    if (!split_arg.empty()) {
      auto parts = split_csv(split_arg);
      if (parts.size() != 2) {
        std::fprintf(stderr, "error: --split expects two ratios\n");
        return TP_ERROR_INVALID_ARGUMENT;
      }
      cfg.set("data.split", json::array({std::stod(parts[0]), std::stod(parts[1])}));
    }
    if (!tasks_arg.empty()) cfg.set("data.tasks", split_csv(tasks_arg));
    check(tp_generate_dataset(grammar.gs, cfg.build().c_str(), out_train.c_str(),
                              out_test.c_str()));
    std::printf("wrote %s and %s\n", out_train.c_str(), out_test.c_str());
    return 0;
  }

  if (cmd_tsel->parsed()) {
    if (hidden > 0) cfg.set("selector.hidden", hidden);
    if (epochs > 0) cfg.set("selector.epochs", epochs);
    if (net_seed >= 0) cfg.set("seeds.selector", net_seed);
    OwnedString report;
    check(tp_train_selector(grammar.gs, train_path.c_str(), cfg.build().c_str(),
                            model_out.c_str(), report_out.empty() ? nullptr : &report.s));
    if (!report_out.empty()) {
      std::FILE* f = std::fopen(report_out.c_str(), "wb");
      if (f) {
        std::fputs(report.s, f);
        std::fclose(f);
      }
    }
    std::printf("selector checkpoint written to %s\n", model_out.c_str());
    return 0;
  }

  if (cmd_aug->parsed()) {
    if (aug_count > 0) cfg.set("augment.count", aug_count);
    if (aug_seed >= 0) cfg.set("seeds.augment", aug_seed);
    if (!aug_tasks.empty()) cfg.set("augment.tasks", split_csv(aug_tasks));
    check(tp_generate_augmented(grammar.gs, selector_model.c_str(), cfg.build().c_str(),
                                aug_out.c_str()));
    std::printf("augmented samples written to %s\n", aug_out.c_str());
    return 0;
  }

  if (cmd_tdec->parsed()) {
    if (hidden > 0) cfg.set("decoder.hidden", hidden);
    if (epochs > 0) cfg.set("decoder.epochs", epochs);
    if (net_seed >= 0) cfg.set("seeds.decoder", net_seed);
    std::vector<const char*> paths;
    for (const auto& p : decoder_train) paths.push_back(p.c_str());
    OwnedString report;
    check(tp_train_decoder(grammar.gs, paths.data(), paths.size(), cfg.build().c_str(),
                           model_out.c_str(), report_out.empty() ? nullptr : &report.s));
    if (!report_out.empty()) {
      std::FILE* f = std::fopen(report_out.c_str(), "wb");
      if (f) {
        std::fputs(report.s, f);
        std::fclose(f);
      }
    }
    std::printf("decoder checkpoint written to %s\n", model_out.c_str());
    return 0;
  }

  if (cmd_pred->parsed()) {
    check(tp_predict(grammar.gs, pred_model.c_str(), pred_in.c_str(), cfg.build().c_str(),
                     pred_out.c_str()));
    std::printf("predictions written to %s\n", pred_out.c_str());
    return 0;
  }

  if (cmd_eval->parsed()) {
    check(tp_evaluate(grammar.gs, eval_model.c_str(), eval_test.c_str(), cfg.build().c_str(),
                      eval_prefix.c_str()));
    std::printf("reports written with prefix %s\n", eval_prefix.c_str());
    return 0;
  }

  if (cmd_exp->parsed()) {
    cfg.set("experiment.name", exp_name);
    if (exp_seed >= 0) {
      cfg.set("seeds.data", exp_seed);
      cfg.set("seeds.selector", exp_seed + 1);
      cfg.set("seeds.augment", exp_seed + 2);
      cfg.set("seeds.decoder", exp_seed + 3);
    }
    if (!held_out_arg.empty()) cfg.set("experiment.heldOutTasks", split_csv(held_out_arg));
    check(tp_run_experiment(grammar.gs, cfg.build().c_str(), out_dir.c_str()));
    std::printf("experiment reports written to %s\n", out_dir.c_str());
    return 0;
  }

  return 0;
}
