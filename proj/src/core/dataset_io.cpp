#include "core/dataset_io.hpp"

#include <sstream>

namespace taskplan {

json sample_to_json(const Sample& s, const GrammarSet& gs) {
  json j;
  json jobjects = json::array();
  for (const auto& o : s.scene.objects) {
    json jo;
    jo["class"] = gs.vocab.objects[o.class_id];
    jo["loc"] = {o.loc[0], o.loc[1], o.loc[2]};
    jobjects.push_back(jo);
  }
  j["scene"] = {{"id", s.scene.id}, {"objects", jobjects}};
  j["task"] = gs.vocab.tasks[s.task];
  json jseq = json::array();
  for (const auto& a : s.sequence)
    jseq.push_back({gs.vocab.actions[a.action], gs.vocab.objects[a.object]});
  j["sequence"] = jseq;
  if (s.selections) {
    json jsel = json::array();
    for (const auto& step : *s.selections) jsel.push_back({step.or_node, step.child});
    j["selections"] = jsel;
  }
  j["provenance"] = s.provenance == Provenance::Annotated ? "annotated" : "augmented";
  return j;
}

Sample sample_from_json(const json& j, const GrammarSet& gs, const std::string& where) {
  Sample s;
  const json& jscene = require_object(j, "scene", where);
  if (jscene.contains("id")) s.scene.id = jscene.at("id").get<std::string>();
  for (const auto& jo : require_array(jscene, "objects", where)) {
    ObjectInstance o;
    const std::string cls = require_string(jo, "class", where);
    int ci = gs.vocab.object_index(cls);
    if (ci < 0) throw Error(ErrorKind::Validation, where + ": unknown object class '" + cls + "'");
    o.class_id = ci;
    const json& jloc = require_array(jo, "loc", where);
    if (jloc.size() != 3)
      throw Error(ErrorKind::Validation, where + ": object location is not a 3-vector");
    for (int k = 0; k < 3; ++k) {
      double v = jloc[k].get<double>();
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorKind::Validation, where + ": location coordinate outside [0,1]");
      o.loc[k] = v;
    }
    s.scene.objects.push_back(o);
  }

  const std::string task = require_string(j, "task", where);
  s.task = gs.vocab.task_index(task);
  if (s.task < 0) throw Error(ErrorKind::Validation, where + ": unknown task '" + task + "'");

  for (const auto& jp : require_array(j, "sequence", where)) {
    if (!jp.is_array() || jp.size() != 2)
      throw Error(ErrorKind::Validation, where + ": sequence entry is not an [action, object] pair");
    AtomicAction a;
    a.action = gs.vocab.action_index(jp[0].get<std::string>());
    a.object = gs.vocab.object_index(jp[1].get<std::string>());
    if (a.action < 0 || a.object < 0)
      throw Error(ErrorKind::Validation, where + ": unknown action or object in sequence");
    s.sequence.push_back(a);
  }
  if (s.sequence.empty()) throw Error(ErrorKind::Validation, where + ": empty action sequence");

  if (j.contains("selections")) {
    SelectionList sel;
    for (const auto& js : j.at("selections")) {
      if (!js.is_array() || js.size() != 2)
        throw Error(ErrorKind::Validation, where + ": selection entry is not an [orNode, idx] pair");
      sel.push_back({js[0].get<std::string>(), js[1].get<int>()});
    }
    s.selections = std::move(sel);
  }

  const std::string prov = require_string(j, "provenance", where);
  if (prov == "annotated")
    s.provenance = Provenance::Annotated;
  else if (prov == "augmented")
    s.provenance = Provenance::Augmented;
  else
    throw Error(ErrorKind::Validation, where + ": unknown provenance '" + prov + "'");
  return s;
}

std::string dataset_to_jsonl(const Dataset& ds, const GrammarSet& gs, const json& provenance) {
  std::ostringstream os;
  json header;
  header["provenance"] = provenance;
  header["provenance"]["vocabFingerprint"] = to_hex(gs.vocab.fingerprint());
  os << header.dump() << "\n";
  for (const auto& s : ds.samples) os << sample_to_json(s, gs).dump() << "\n";
  return os.str();
}

void save_dataset_jsonl(const std::string& path, const Dataset& ds, const GrammarSet& gs,
                        const json& provenance) {
  write_text_file(path, dataset_to_jsonl(ds, gs, provenance));
}

Dataset parse_dataset_jsonl(const std::string& text, const GrammarSet& gs,
                            const std::string& origin) {
  Dataset ds;
  std::istringstream is(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    json j = parse_json(line, where);
    if (j.contains("provenance") && j.at("provenance").is_object()) {
      const json& p = j.at("provenance");
      if (p.contains("vocabFingerprint") &&
          p.at("vocabFingerprint").get<std::string>() != to_hex(gs.vocab.fingerprint()))
        throw Error(ErrorKind::State,
                    where + ": dataset vocab fingerprint does not match the grammar set");
      continue;
    }
    ds.samples.push_back(sample_from_json(j, gs, where));
  }
  return ds;
}

Dataset load_dataset_jsonl(const std::string& path, const GrammarSet& gs) {
  return parse_dataset_jsonl(read_text_file(path), gs, path);
}

}  // namespace taskplan
