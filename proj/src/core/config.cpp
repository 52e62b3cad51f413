#include "core/config.hpp"

#include "core/error.hpp"
#include "core/rng.hpp"

namespace taskplan {

namespace {

void apply_train(TrainConfig& cfg, const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, where + ": not an object");
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<int>();
  if (j.contains("lr")) cfg.sgd.lr = j.at("lr").get<double>();
  if (j.contains("momentum")) cfg.sgd.momentum = j.at("momentum").get<double>();
  if (j.contains("weightDecay")) cfg.sgd.weight_decay = j.at("weightDecay").get<double>();
  if (j.contains("batchSize")) cfg.sgd.batch_size = j.at("batchSize").get<int>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("valRatio")) cfg.val_ratio = j.at("valRatio").get<double>();
  if (j.contains("lrDecay")) cfg.lr_decay = j.at("lrDecay").get<double>();
  if (j.contains("lrDecayEvery")) cfg.lr_decay_every = j.at("lrDecayEvery").get<int>();
  if (j.contains("clipNorm")) cfg.clip_norm = j.at("clipNorm").get<double>();
  if (j.contains("stopAtTokenAcc")) cfg.stop_at_token_acc = j.at("stopAtTokenAcc").get<double>();
}

json train_to_json(const TrainConfig& cfg) {
  return {{"hidden", cfg.hidden},
          {"lr", cfg.sgd.lr},
          {"momentum", cfg.sgd.momentum},
          {"weightDecay", cfg.sgd.weight_decay},
          {"batchSize", cfg.sgd.batch_size},
          {"epochs", cfg.epochs},
          {"valRatio", cfg.val_ratio},
          {"lrDecay", cfg.lr_decay},
          {"lrDecayEvery", cfg.lr_decay_every},
          {"clipNorm", cfg.clip_norm},
          {"stopAtTokenAcc", cfg.stop_at_token_acc}};
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.selector.epochs = 300;
  cfg.selector.val_ratio = 0.1;
  cfg.selector.lr_decay = 0.5;
  cfg.selector.lr_decay_every = 120;
  cfg.decoder.epochs = 150;
  cfg.decoder.val_ratio = 0.0;
  return cfg;
}

void RunConfig::apply_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Validation, "config: top level is not an object");
  if (j.contains("nMax")) n_max = j.at("nMax").get<int>();
  if (j.contains("bMax")) b_max = j.at("bMax").get<int>();
  if (j.contains("maxLen")) max_len = j.at("maxLen").get<int>();
  if (j.contains("paperScale")) paper_scale = j.at("paperScale").get<bool>();
  if (j.contains("selector")) apply_train(selector, j.at("selector"), "config.selector");
  if (j.contains("decoder")) apply_train(decoder, j.at("decoder"), "config.decoder");
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (s.contains("data")) seeds.data = s.at("data").get<uint64_t>();
    if (s.contains("selector")) seeds.selector = s.at("selector").get<uint64_t>();
    if (s.contains("augment")) seeds.augment = s.at("augment").get<uint64_t>();
    if (s.contains("decoder")) seeds.decoder = s.at("decoder").get<uint64_t>();
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("countPerTask")) data.count_per_task = d.at("countPerTask").get<int>();
    if (d.contains("split")) {
      const json& sp = d.at("split");
      if (!sp.is_array() || sp.size() != 2)
        throw Error(ErrorKind::Validation, "config.data.split must be [train, test]");
      data.split = {sp[0].get<double>(), sp[1].get<double>()};
    }
    if (d.contains("extraObjectProb"))
      data.extra_object_prob = d.at("extraObjectProb").get<double>();
    if (d.contains("tasks")) data.tasks = d.at("tasks").get<std::vector<std::string>>();
  }
  if (j.contains("augment")) {
    const json& a = j.at("augment");
    if (a.contains("count")) augment.count = a.at("count").get<int>();
    if (a.contains("tasks")) augment.tasks = a.at("tasks").get<std::vector<std::string>>();
  }
  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    if (e.contains("name")) experiment.name = e.at("name").get<std::string>();
    if (e.contains("heldOutTasks"))
      experiment.held_out_tasks = e.at("heldOutTasks").get<std::vector<std::string>>();
    if (e.contains("annotatedPerTask"))
      experiment.annotated_per_task = e.at("annotatedPerTask").get<int>();
    if (e.contains("testPerTask")) experiment.test_per_task = e.at("testPerTask").get<int>();
    if (e.contains("augmentPerTask"))
      experiment.augment_per_task = e.at("augmentPerTask").get<int>();
    if (e.contains("decoderSeedCount"))
      experiment.decoder_seed_count = e.at("decoderSeedCount").get<int>();
  }
  if (paper_scale) {
    selector.hidden = 512;
    decoder.hidden = 512;
  }
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg = defaults();
  cfg.apply_json(j);
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  j["nMax"] = n_max;
  j["bMax"] = b_max;
  j["maxLen"] = max_len;
  j["paperScale"] = paper_scale;
  j["selector"] = train_to_json(selector);
  j["decoder"] = train_to_json(decoder);
  j["seeds"] = {{"data", seeds.data},
                {"selector", seeds.selector},
                {"augment", seeds.augment},
                {"decoder", seeds.decoder}};
  j["data"] = {{"countPerTask", data.count_per_task},
               {"split", {data.split[0], data.split[1]}},
               {"extraObjectProb", data.extra_object_prob},
               {"tasks", data.tasks}};
  j["augment"] = {{"count", augment.count}, {"tasks", augment.tasks}};
  j["experiment"] = {{"name", experiment.name},
                     {"heldOutTasks", experiment.held_out_tasks},
                     {"annotatedPerTask", experiment.annotated_per_task},
                     {"testPerTask", experiment.test_per_task},
                     {"augmentPerTask", experiment.augment_per_task},
                     {"decoderSeedCount", experiment.decoder_seed_count}};
  return j;
}

uint64_t RunConfig::hash() const { return fnv1a(to_json().dump()); }

json RunConfig::provenance() const {
  return {{"tool", "taskplan"},
          {"version", "0.1.0"},
          {"formatVersion", 1},
          {"configHash", to_hex(hash())},
          {"seeds",
           {{"data", seeds.data},
            {"selector", seeds.selector},
            {"augment", seeds.augment},
            {"decoder", seeds.decoder}}}};
}

}  // namespace taskplan
