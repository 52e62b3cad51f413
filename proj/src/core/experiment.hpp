#ifndef TASKPLAN_CORE_EXPERIMENT_HPP
#define TASKPLAN_CORE_EXPERIMENT_HPP

#include <string>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace taskplan {

// Per-seed outcome of one experiment arm (decoder trained with or without
// selector-generated augmented data).
struct ArmResult {
  uint64_t seed = 0;
  double avg_sequence_acc = 0.0;
  double held_out_avg = 0.0;  // generalization runs: mean over held-out tasks
  MetricsReport report;
};

struct ExperimentResult {
  std::string name;
  std::vector<ArmResult> with_aog, without_aog;
  json summary;
  std::vector<std::string> files_written;
};

// `ablation`: decoder trained on annotated vs annotated+augmented data over
// the training tasks, both arms evaluated on the same annotated test split.
// `generalization`: the held-out tasks contribute no annotation anywhere; the
// with-AOG arm adds selector-generated samples for all tasks (including the
// held-out ones) and both arms are evaluated on held-out-task scenes only.
// Writes per-arm reports, a summary JSON and an aligned text table to out_dir;
// deterministic for a fixed config.
ExperimentResult run_experiment(const GrammarSet& gs, const RunConfig& cfg,
                                const std::string& out_dir);

}  // namespace taskplan

#endif
