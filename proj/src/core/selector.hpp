#ifndef TASKPLAN_CORE_SELECTOR_HPP
#define TASKPLAN_CORE_SELECTOR_HPP

#include "core/scene.hpp"
#include "core/train.hpp"

namespace taskplan {

// The or-node selector network: the initial hidden state is a projection of
// [scene features, task one-hot]; each step consumes the adjacency encoding
// of the current (pruned) graph and a masked softmax over a fixed-width
// branch head picks the child of the current DFS or-node.
struct SelectorModel {
  uint64_t vocab_fp = 0;
  int n_max = 0;
  int b_max = 0;
  DenseHead init;    // hidden x (4*|objects| + |tasks|)
  LstmParams cell;   // input = n_max^2
  DenseHead branch;  // b_max x hidden
};

SelectorModel make_selector_model(const GrammarSet& gs, int hidden, int n_max, int b_max,
                                  uint64_t seed);

std::vector<TensorRef> model_tensors(SelectorModel& m);
SelectorModel zeros_like(const SelectorModel& m);

enum class SelectMode { Greedy, Sample };

// Walks the reachable or-nodes of the task grammar in DFS order, re-encoding
// the pruned graph at every step, and returns the full selection list.
// Structural validity is unconditional: the softmax is masked to the current
// or-node's children, so even a random-weight model cannot select an invalid
// child. Sample mode draws from the masked distribution using rng.
SelectionList select_branches(const SelectorModel& m, const GrammarSet& gs, const Scene& scene,
                              int task, SelectMode mode, Rng* rng = nullptr);

// Teacher-forced summed cross-entropy over the sample's annotated selections
// (the graph is pruned along the annotation). Used for training and as the
// scalar objective of the finite-difference gradient check.
double selector_sample_loss(const SelectorModel& m, const GrammarSet& gs, const Sample& sample);

// Adds the gradients of selector_sample_loss to `grads`; returns the loss and
// counts teacher-forced decision hits.
double selector_accumulate_grads(const SelectorModel& m, const GrammarSet& gs,
                                 const Sample& sample, SelectorModel& grads, int& correct,
                                 int& decisions);

struct SelectorTrainResult {
  SelectorModel model;  // best-on-validation snapshot (final when val_ratio = 0)
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  int steps_per_epoch = 0;
};

SelectorTrainResult train_selector(const GrammarSet& gs, const std::vector<Sample>& annotated,
                                   const TrainConfig& cfg, int n_max, int b_max);

// Fraction of samples whose greedy selection list equals the annotation.
double selection_match_rate(const SelectorModel& m, const GrammarSet& gs,
                            const std::vector<Sample>& samples);

// Per-decision teacher-forced accuracy.
double selection_accuracy_tf(const SelectorModel& m, const GrammarSet& gs,
                             const std::vector<Sample>& samples);

struct AugmentSpec {
  int count = 2000;
  uint64_t seed = 3;
  double extra_object_prob = 0.4;
  std::vector<int> tasks;  // empty = all tasks of the grammar set
};

// Greedy selections on fresh synthetic scenes, round-robin over tasks. Every
// emitted sequence is a member of its task grammar by construction.
std::vector<Sample> generate_augmented(const SelectorModel& m, const GrammarSet& gs,
                                       const AugmentSpec& spec);

}  // namespace taskplan

#endif
