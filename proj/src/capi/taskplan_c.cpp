#include "taskplan.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>

#include "core/config.hpp"
#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/metrics.hpp"
#include "core/model_io.hpp"
#include "core/selector.hpp"

using namespace taskplan;

struct tp_grammar_set {
  GrammarSet gs;
};

namespace {

thread_local std::string g_last_error;

tp_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return TP_ERROR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return TP_ERROR_PARSE;
    case ErrorKind::Validation: return TP_ERROR_VALIDATION;
    case ErrorKind::Io: return TP_ERROR_IO;
    case ErrorKind::State: return TP_ERROR_STATE;
    case ErrorKind::Internal: return TP_ERROR_INTERNAL;
  }
  return TP_ERROR_INTERNAL;
}

template <typename Fn>
tp_status guarded(Fn&& fn) {
  try {
    fn();
    return TP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TP_ERROR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tp_status require(bool ok, const char* message) {
  if (ok) return TP_OK;
  g_last_error = message;
  return TP_ERROR_INVALID_ARGUMENT;
}

RunConfig parse_config(const char* config_json) {
  RunConfig cfg = RunConfig::defaults();
  if (config_json && *config_json) cfg.apply_json(parse_json(config_json, "config"));
  return cfg;
}

std::vector<int> resolve_task_names(const GrammarSet& gs, const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) {
    int t = gs.task_index(n);
    if (t < 0) throw Error(ErrorKind::InvalidArgument, "unknown task '" + n + "'");
    out.push_back(t);
  }
  return out;
}

json train_log_json(const std::vector<TrainLogEntry>& log) {
  json j = json::array();
  for (const auto& e : log)
    j.push_back({{"epoch", e.epoch},
                 {"loss", e.loss},
                 {"trainAcc", e.train_acc},
                 {"valAcc", e.val_acc}});
  return j;
}

int effective_max_len(const RunConfig& cfg, const GrammarSet& gs) {
  return std::max(cfg.max_len, gs.max_sequence_length() + 1);
}

}  // namespace

extern "C" {

const char* tp_version(void) { return "0.1.0"; }

const char* tp_last_error(void) { return g_last_error.c_str(); }

void tp_string_free(char* s) { std::free(s); }

tp_status tp_grammar_set_load_file(const char* path, tp_grammar_set** out) {
  if (tp_status s = require(path && out, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    auto handle = std::make_unique<tp_grammar_set>();
    handle->gs = load_grammar_set(read_text_file(path));
    *out = handle.release();
  });
}

tp_status tp_grammar_set_load_string(const char* json_text, tp_grammar_set** out) {
  if (tp_status s = require(json_text && out, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    auto handle = std::make_unique<tp_grammar_set>();
    handle->gs = load_grammar_set(json_text);
    *out = handle.release();
  });
}

void tp_grammar_set_free(tp_grammar_set* gs) { delete gs; }

int tp_grammar_set_task_count(const tp_grammar_set* gs) {
  return gs ? static_cast<int>(gs->gs.tasks.size()) : 0;
}

tp_status tp_grammar_set_summary_json(const tp_grammar_set* gs, char** out_json) {
  if (tp_status s = require(gs && out_json, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    json j;
    j["vocab"] = {{"actions", gs->gs.vocab.actions.size()},
                  {"objects", gs->gs.vocab.objects.size()},
                  {"tasks", gs->gs.vocab.tasks.size()}};
    j["vocabFingerprint"] = to_hex(gs->gs.vocab.fingerprint());
    j["nodeIndexSize"] = gs->gs.node_index.size();
    j["maxSequenceLength"] = gs->gs.max_sequence_length();
    json jt = json::array();
    for (const auto& g : gs->gs.tasks) {
      size_t language = enumerate_language(g, 100000).size();
      jt.push_back({{"name", g.name},
                    {"nodes", g.nodes.size()},
                    {"orNodes", g.count_kind(NodeKind::Or)},
                    {"andNodes", g.count_kind(NodeKind::And)},
                    {"terminals", g.count_kind(NodeKind::Terminal)},
                    {"maxBranching", max_or_branching(g)},
                    {"languageSize", language},
                    {"maxDerivationLength", max_derivation_length(g)}});
    }
    j["tasks"] = jt;
    *out_json = dup_string(j.dump(2));
  });
}

tp_status tp_enumerate_task(const tp_grammar_set* gs, const char* task_name, int max_sequences,
                            char** out_json) {
  if (tp_status s = require(gs && task_name && out_json, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    int t = gs->gs.task_index(task_name);
    if (t < 0)
      throw Error(ErrorKind::InvalidArgument, "unknown task '" + std::string(task_name) + "'");
    auto seqs = enumerate_language(gs->gs.task(t), static_cast<size_t>(max_sequences));
    json j;
    j["task"] = task_name;
    j["count"] = seqs.size();
    json js = json::array();
    for (const auto& seq : seqs) {
      json jseq = json::array();
      for (const auto& a : seq)
        jseq.push_back({gs->gs.vocab.actions[a.action], gs->gs.vocab.objects[a.object]});
      js.push_back(jseq);
    }
    j["sequences"] = js;
    *out_json = dup_string(j.dump(2));
  });
}

tp_status tp_generate_dataset(const tp_grammar_set* gs, const char* config_json,
                              const char* train_path, const char* test_path) {
  if (tp_status s = require(gs && train_path && test_path, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    DataGenSpec spec;
    spec.count_per_task = cfg.data.count_per_task;
    spec.seed = cfg.seeds.data;
    spec.split = cfg.data.split;
    spec.extra_object_prob = cfg.data.extra_object_prob;
    spec.tasks = resolve_task_names(gs->gs, cfg.data.tasks);
    auto [train, test] = gen_dataset(gs->gs, spec);
    save_dataset_jsonl(train_path, train, gs->gs, cfg.provenance());
    save_dataset_jsonl(test_path, test, gs->gs, cfg.provenance());
  });
}

tp_status tp_train_selector(const tp_grammar_set* gs, const char* train_jsonl,
                            const char* config_json, const char* model_path,
                            char** out_report_json) {
  if (tp_status s = require(gs && train_jsonl && model_path, "null argument"); s != TP_OK)
    return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    Dataset train = load_dataset_jsonl(train_jsonl, gs->gs);
    TrainConfig tc = cfg.selector;
    tc.seed = cfg.seeds.selector;
    SelectorTrainResult r = train_selector(gs->gs, train.samples, tc, cfg.n_max, cfg.b_max);
    save_selector_model(model_path, r.model, cfg.provenance());
    if (out_report_json) {
      json j;
      j["provenance"] = cfg.provenance();
      j["bestEpoch"] = r.best_epoch;
      j["bestValAcc"] = r.best_val_acc;
      j["stepsPerEpoch"] = r.steps_per_epoch;
      j["log"] = train_log_json(r.log);
      *out_report_json = dup_string(j.dump(2));
    }
  });
}

tp_status tp_generate_augmented(const tp_grammar_set* gs, const char* selector_model,
                                const char* config_json, const char* out_jsonl) {
  if (tp_status s = require(gs && selector_model && out_jsonl, "null argument"); s != TP_OK)
    return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    SelectorModel model = load_selector_model(selector_model, gs->gs);
    AugmentSpec spec;
    spec.count = cfg.augment.count;
    spec.seed = cfg.seeds.augment;
    spec.extra_object_prob = cfg.data.extra_object_prob;
    spec.tasks = resolve_task_names(gs->gs, cfg.augment.tasks);
    Dataset ds;
    ds.samples = generate_augmented(model, gs->gs, spec);
    save_dataset_jsonl(out_jsonl, ds, gs->gs, cfg.provenance());
  });
}

tp_status tp_train_decoder(const tp_grammar_set* gs, const char* const* train_jsonls,
                           size_t n_train, const char* config_json, const char* model_path,
                           char** out_report_json) {
  if (tp_status s = require(gs && train_jsonls && n_train > 0 && model_path, "null argument");
      s != TP_OK)
    return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    std::vector<Sample> samples;
    for (size_t i = 0; i < n_train; ++i) {
      Dataset part = load_dataset_jsonl(train_jsonls[i], gs->gs);
      samples.insert(samples.end(), part.samples.begin(), part.samples.end());
    }
    TrainConfig tc = cfg.decoder;
    tc.seed = cfg.seeds.decoder;
    DecoderTrainResult r = train_decoder(gs->gs, samples, tc, effective_max_len(cfg, gs->gs));
    save_decoder_model(model_path, r.model, cfg.provenance());
    if (out_report_json) {
      json j;
      j["provenance"] = cfg.provenance();
      j["epochsRun"] = r.epochs_run;
      j["stepsPerEpoch"] = r.steps_per_epoch;
      j["log"] = train_log_json(r.log);
      *out_report_json = dup_string(j.dump(2));
    }
  });
}

tp_status tp_predict(const tp_grammar_set* gs, const char* decoder_model,
                     const char* input_jsonl, const char* config_json, const char* out_jsonl) {
  if (tp_status s = require(gs && decoder_model && input_jsonl && out_jsonl, "null argument");
      s != TP_OK)
    return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    DecoderModel model = load_decoder_model(decoder_model, gs->gs);
    Dataset input = load_dataset_jsonl(input_jsonl, gs->gs);
    std::ostringstream os;
    json header;
    header["provenance"] = cfg.provenance();
    os << header.dump() << "\n";
    for (const auto& s : input.samples) {
      ActionSequence seq = decode(model, gs->gs.vocab, s.scene, s.task);
      json j;
      j["task"] = gs->gs.vocab.tasks[s.task];
      j["sceneId"] = s.scene.id;
      json jseq = json::array();
      for (const auto& a : seq)
        jseq.push_back({gs->gs.vocab.actions[a.action], gs->gs.vocab.objects[a.object]});
      j["sequence"] = jseq;
      j["logprob"] = seq.empty() ? 0.0 : score(model, gs->gs.vocab, s.scene, s.task, seq);
      os << j.dump() << "\n";
    }
    write_text_file(out_jsonl, os.str());
  });
}

tp_status tp_evaluate(const tp_grammar_set* gs, const char* decoder_model,
                      const char* test_jsonl, const char* config_json,
                      const char* report_prefix) {
  if (tp_status s = require(gs && decoder_model && test_jsonl && report_prefix, "null argument");
      s != TP_OK)
    return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    DecoderModel model = load_decoder_model(decoder_model, gs->gs);
    Dataset test = load_dataset_jsonl(test_jsonl, gs->gs);
    MetricsReport report = evaluate_decoder(model, gs->gs, test.samples);
    const std::string prefix(report_prefix);
    json j;
    j["provenance"] = cfg.provenance();
    j["metrics"] = report.to_json();
    write_text_file(prefix + ".json", j.dump(2) + "\n");
    write_text_file(prefix + ".txt", report.to_text());
    write_text_file(prefix + "_confusion_action.csv", report.confusion_action_csv());
    write_text_file(prefix + "_confusion_object.csv", report.confusion_object_csv());
  });
}

tp_status tp_run_experiment(const tp_grammar_set* gs, const char* config_json,
                            const char* out_dir) {
  if (tp_status s = require(gs && out_dir, "null argument"); s != TP_OK) return s;
  return guarded([&] {
    RunConfig cfg = parse_config(config_json);
    run_experiment(gs->gs, cfg, out_dir);
  });
}

}  // extern "C"
