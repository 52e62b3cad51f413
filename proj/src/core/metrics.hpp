#ifndef TASKPLAN_CORE_METRICS_HPP
#define TASKPLAN_CORE_METRICS_HPP

#include "core/decoder.hpp"
#include "core/jsonio.hpp"

namespace taskplan {

// Evaluation report mirroring the usual atomic-accuracy / sequence-accuracy
// tables. Atomic accuracies are teacher-forced (ground-truth prefixes, END
// step excluded); sequence accuracy and grammar validity are free-running.
// Confusion matrices are gold x predicted with one extra predicted column for
// END, so row sums equal gold token counts.
struct MetricsReport {
  std::vector<std::string> action_names, object_names, task_names;

  std::vector<long long> action_counts, object_counts;  // gold occurrences
  std::vector<double> per_action_acc, per_object_acc;   // recall per class
  double avg_action_acc = 0.0;  // micro average over steps
  double avg_object_acc = 0.0;

  std::vector<int> per_task_total, per_task_correct;
  std::vector<double> per_task_seq_acc;
  double avg_sequence_acc = 0.0;  // unweighted mean over tasks with samples
  double grammar_validity_rate = 0.0;

  std::vector<std::vector<long long>> confusion_action;  // |A| x (|A|+1)
  std::vector<std::vector<long long>> confusion_object;  // |O| x (|O|+1)

  json to_json() const;
  static MetricsReport from_json(const json& j);
  std::string to_text() const;
  std::string confusion_action_csv() const;
  std::string confusion_object_csv() const;
};

// Teacher-forced per-step argmax comparison; fills the atomic accuracy fields
// and the confusion matrices.
void atomic_accuracy(const DecoderModel& m, const GrammarSet& gs,
                     const std::vector<Sample>& test, MetricsReport& report);

// Free-running decode, exact sequence match; fills the per-task fields.
void sequence_accuracy(const DecoderModel& m, const GrammarSet& gs,
                       const std::vector<Sample>& test, MetricsReport& report);

// Fraction of free-running decodes that are members of the task grammar.
double grammar_validity(const DecoderModel& m, const GrammarSet& gs,
                        const std::vector<Sample>& test);

// All of the above in one pass-friendly call.
MetricsReport evaluate_decoder(const DecoderModel& m, const GrammarSet& gs,
                               const std::vector<Sample>& test);

}  // namespace taskplan

#endif
