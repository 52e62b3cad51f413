#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "core/error.hpp"

namespace taskplan {

namespace {

void require_nonempty(const std::vector<Sample>& test) {
  if (test.empty()) throw Error(ErrorKind::InvalidArgument, "evaluation over an empty test set");
}

std::string csv_of(const std::vector<std::vector<long long>>& m,
                   const std::vector<std::string>& gold_names) {
  std::ostringstream os;
  os << "gold";
  for (const auto& n : gold_names) os << "," << n;
  os << ",<end>\n";
  for (size_t r = 0; r < m.size(); ++r) {
    os << gold_names[r];
    for (long long v : m[r]) os << "," << v;
    os << "\n";
  }
  return os.str();
}

}  // namespace

void atomic_accuracy(const DecoderModel& m, const GrammarSet& gs,
                     const std::vector<Sample>& test, MetricsReport& report) {
  require_nonempty(test);
  const Vocab& vocab = gs.vocab;
  const int na = static_cast<int>(vocab.actions.size());
  const int no = static_cast<int>(vocab.objects.size());
  report.action_names = vocab.actions;
  report.object_names = vocab.objects;
  report.action_counts.assign(na, 0);
  report.object_counts.assign(no, 0);
  report.confusion_action.assign(na, std::vector<long long>(na + 1, 0));
  report.confusion_object.assign(no, std::vector<long long>(no + 1, 0));

  long long steps = 0, action_hits = 0, object_hits = 0;
  for (const auto& s : test) {
    LstmState state;
    Vec scene_task = concat(encode_scene(s.scene, vocab), encode_task(s.task, vocab));
    state.h = head_forward(m.init, scene_task);
    state.c.assign(m.cell.hidden, 0.0);
    Vec x = encode_atomic_start(vocab);
    for (size_t t = 0; t < s.sequence.size(); ++t) {
      state = lstm_step(m.cell, x, state);
      Vec pa = softmax(head_forward(m.action_head, state.h));
      Vec po = softmax(head_forward(m.object_head, state.h));
      const int pred_a = argmax(pa.data(), static_cast<int>(pa.size()));
      const int pred_o = argmax(po.data(), static_cast<int>(po.size()));
      const int gold_a = s.sequence[t].action;
      const int gold_o = s.sequence[t].object;
      ++steps;
      ++report.action_counts[gold_a];
      ++report.object_counts[gold_o];
      ++report.confusion_action[gold_a][pred_a];
      ++report.confusion_object[gold_o][pred_o];
      if (pred_a == gold_a) ++action_hits;
      if (pred_o == gold_o) ++object_hits;
      x = encode_atomic(s.sequence[t], vocab, true);  // teacher forcing
    }
  }

  report.per_action_acc.assign(na, 0.0);
  for (int a = 0; a < na; ++a)
    if (report.action_counts[a] > 0)
      report.per_action_acc[a] =
          static_cast<double>(report.confusion_action[a][a]) / report.action_counts[a];
  report.per_object_acc.assign(no, 0.0);
  for (int o = 0; o < no; ++o)
    if (report.object_counts[o] > 0)
      report.per_object_acc[o] =
          static_cast<double>(report.confusion_object[o][o]) / report.object_counts[o];
  report.avg_action_acc = steps == 0 ? 0.0 : static_cast<double>(action_hits) / steps;
  report.avg_object_acc = steps == 0 ? 0.0 : static_cast<double>(object_hits) / steps;
}

void sequence_accuracy(const DecoderModel& m, const GrammarSet& gs,
                       const std::vector<Sample>& test, MetricsReport& report) {
  require_nonempty(test);
  const int nt = static_cast<int>(gs.vocab.tasks.size());
  report.task_names = gs.vocab.tasks;
  report.per_task_total.assign(nt, 0);
  report.per_task_correct.assign(nt, 0);
  for (const auto& s : test) {
    ActionSequence predicted = decode(m, gs.vocab, s.scene, s.task);
    ++report.per_task_total[s.task];
    if (predicted == s.sequence) ++report.per_task_correct[s.task];
  }
  report.per_task_seq_acc.assign(nt, 0.0);
  double sum = 0.0;
  int tasks_with_samples = 0;
  for (int t = 0; t < nt; ++t) {
    if (report.per_task_total[t] == 0) continue;
    report.per_task_seq_acc[t] =
        static_cast<double>(report.per_task_correct[t]) / report.per_task_total[t];
    sum += report.per_task_seq_acc[t];
    ++tasks_with_samples;
  }
  report.avg_sequence_acc = tasks_with_samples == 0 ? 0.0 : sum / tasks_with_samples;
}

double grammar_validity(const DecoderModel& m, const GrammarSet& gs,
                        const std::vector<Sample>& test) {
  require_nonempty(test);
  int valid = 0;
  for (const auto& s : test) {
    ActionSequence predicted = decode(m, gs.vocab, s.scene, s.task);
    if (contains(gs.task(s.task), predicted)) ++valid;
  }
  return static_cast<double>(valid) / static_cast<double>(test.size());
}

MetricsReport evaluate_decoder(const DecoderModel& m, const GrammarSet& gs,
                               const std::vector<Sample>& test) {
  MetricsReport report;
  atomic_accuracy(m, gs, test, report);
  sequence_accuracy(m, gs, test, report);
  report.grammar_validity_rate = grammar_validity(m, gs, test);
  return report;
}

json MetricsReport::to_json() const {
  json j;
  j["actions"] = json::object();
  for (size_t a = 0; a < action_names.size(); ++a)
    j["actions"][action_names[a]] = {{"accuracy", per_action_acc[a]},
                                     {"count", action_counts[a]}};
  j["objects"] = json::object();
  for (size_t o = 0; o < object_names.size(); ++o)
    j["objects"][object_names[o]] = {{"accuracy", per_object_acc[o]},
                                     {"count", object_counts[o]}};
  j["avgActionAcc"] = avg_action_acc;
  j["avgObjectAcc"] = avg_object_acc;
  j["tasks"] = json::object();
  for (size_t t = 0; t < task_names.size(); ++t) {
    if (per_task_total.empty() || per_task_total[t] == 0) continue;
    j["tasks"][task_names[t]] = {{"sequenceAccuracy", per_task_seq_acc[t]},
                                 {"correct", per_task_correct[t]},
                                 {"total", per_task_total[t]}};
  }
  j["avgSequenceAcc"] = avg_sequence_acc;
  j["grammarValidityRate"] = grammar_validity_rate;
  j["confusionAction"] = confusion_action;
  j["confusionObject"] = confusion_object;
  j["actionNames"] = action_names;
  j["objectNames"] = object_names;
  j["taskNames"] = task_names;
  j["perTaskTotal"] = per_task_total;
  j["perTaskCorrect"] = per_task_correct;
  return j;
}

MetricsReport MetricsReport::from_json(const json& j) {
  MetricsReport r;
  r.action_names = j.at("actionNames").get<std::vector<std::string>>();
  r.object_names = j.at("objectNames").get<std::vector<std::string>>();
  r.task_names = j.at("taskNames").get<std::vector<std::string>>();
  r.avg_action_acc = j.at("avgActionAcc").get<double>();
  r.avg_object_acc = j.at("avgObjectAcc").get<double>();
  r.avg_sequence_acc = j.at("avgSequenceAcc").get<double>();
  r.grammar_validity_rate = j.at("grammarValidityRate").get<double>();
  r.confusion_action = j.at("confusionAction").get<std::vector<std::vector<long long>>>();
  r.confusion_object = j.at("confusionObject").get<std::vector<std::vector<long long>>>();
  r.per_task_total = j.at("perTaskTotal").get<std::vector<int>>();
  r.per_task_correct = j.at("perTaskCorrect").get<std::vector<int>>();
  const int na = static_cast<int>(r.action_names.size());
  const int no = static_cast<int>(r.object_names.size());
  r.action_counts.assign(na, 0);
  r.per_action_acc.assign(na, 0.0);
  for (int a = 0; a < na; ++a) {
    const json& e = j.at("actions").at(r.action_names[a]);
    r.action_counts[a] = e.at("count").get<long long>();
    r.per_action_acc[a] = e.at("accuracy").get<double>();
  }
  r.object_counts.assign(no, 0);
  r.per_object_acc.assign(no, 0.0);
  for (int o = 0; o < no; ++o) {
    const json& e = j.at("objects").at(r.object_names[o]);
    r.object_counts[o] = e.at("count").get<long long>();
    r.per_object_acc[o] = e.at("accuracy").get<double>();
  }
  const int nt = static_cast<int>(r.task_names.size());
  r.per_task_seq_acc.assign(nt, 0.0);
  for (int t = 0; t < nt; ++t)
    if (r.per_task_total[t] > 0)
      r.per_task_seq_acc[t] = static_cast<double>(r.per_task_correct[t]) / r.per_task_total[t];
  return r;
}

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  auto pct = [](double v) { return 100.0 * v; };

  os << "atomic action accuracy (teacher-forced)\n";
  size_t width = 0;
  for (const auto& n : action_names) width = std::max(width, n.size());
  for (const auto& n : object_names) width = std::max(width, n.size());
  for (size_t a = 0; a < action_names.size(); ++a)
    os << "  " << std::left << std::setw(static_cast<int>(width)) << action_names[a] << "  "
       << std::right << std::setw(6) << pct(per_action_acc[a]) << "  (" << action_counts[a]
       << " steps)\n";
  os << "  average action accuracy: " << pct(avg_action_acc) << "\n";
  for (size_t o = 0; o < object_names.size(); ++o)
    os << "  " << std::left << std::setw(static_cast<int>(width)) << object_names[o] << "  "
       << std::right << std::setw(6) << pct(per_object_acc[o]) << "  (" << object_counts[o]
       << " steps)\n";
  os << "  average object accuracy: " << pct(avg_object_acc) << "\n\n";

  os << "sequence accuracy (free-running)\n";
  width = 0;
  for (const auto& n : task_names) width = std::max(width, n.size());
  for (size_t t = 0; t < task_names.size(); ++t) {
    if (per_task_total.empty() || per_task_total[t] == 0) continue;
    os << "  " << std::left << std::setw(static_cast<int>(width)) << task_names[t] << "  "
       << std::right << std::setw(6) << pct(per_task_seq_acc[t]) << "  (" << per_task_correct[t]
       << "/" << per_task_total[t] << ")\n";
  }
  os << "  average sequence accuracy: " << pct(avg_sequence_acc) << "\n";
  os << "  grammar validity rate: " << pct(grammar_validity_rate) << "\n";
  return os.str();
}

std::string MetricsReport::confusion_action_csv() const {
  return csv_of(confusion_action, action_names);
}

std::string MetricsReport::confusion_object_csv() const {
  return csv_of(confusion_object, object_names);
}

}  // namespace taskplan
