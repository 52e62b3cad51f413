#ifndef TASKPLAN_CORE_SCENE_HPP
#define TASKPLAN_CORE_SCENE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/grammar.hpp"
#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/vocab.hpp"

namespace taskplan {

struct ObjectInstance {
  int class_id = 0;
  std::array<double, 3> loc{0.0, 0.0, 0.0};  // normalized to the unit cube
};

// Set of located object instances standing in for a parsed image.
struct Scene {
  std::string id;
  std::vector<ObjectInstance> objects;

  bool has_class(int class_id) const;
  // Instance used by the per-class encoding slot: nearest to the origin,
  // ties broken by lower instance index. Null when the class is absent.
  const ObjectInstance* representative(int class_id) const;
};

// Per-class slots of [presence, x, y, z]; length 4 * |objects|.
Vec encode_scene(const Scene& scene, const Vocab& vocab);

// One-hot over tasks.
Vec encode_task(int task, const Vocab& vocab);

// Concatenated one-hots over actions and objects. With END slots the layout
// is (|actions|+1) + (|objects|+1); the END marker sets both extra slots.
Vec encode_atomic(const AtomicAction& a, const Vocab& vocab, bool with_end = true);
Vec encode_atomic_end(const Vocab& vocab);
// Start-of-sequence marker for the decoder: the all-zero atomic feature.
Vec encode_atomic_start(const Vocab& vocab);
int atomic_feature_size(const Vocab& vocab, bool with_end = true);

inline int action_end_index(const Vocab& v) { return static_cast<int>(v.actions.size()); }
inline int object_end_index(const Vocab& v) { return static_cast<int>(v.objects.size()); }

// Deterministic or-node choice rule standing in for human annotation: at each
// reachable or-node pick the feasible child (all required objects present)
// with the smallest summed terminal distance to the origin, ties by lower
// child index.
struct SelectionRules {
  bool distance_tiebreak = true;
};

// Throws ErrorKind::State when no child of a reachable or-node is feasible.
SelectionList oracle_selections(const Scene& scene, const AndOrGraph& g,
                                const SelectionRules& rules);

bool branch_feasible(const Scene& scene, const AndOrGraph& g, int node);

enum class Provenance { Annotated, Augmented };

// The unit of training/evaluation data: a scene, a task and its action
// sequence, plus the or-node selections when known.
struct Sample {
  Scene scene;
  int task = 0;
  ActionSequence sequence;
  std::optional<SelectionList> selections;
  Provenance provenance = Provenance::Annotated;
};

struct DataGenSpec {
  int count_per_task = 50;
  uint64_t seed = 1;
  std::array<double, 2> split{0.6, 0.4};  // train, test
  double extra_object_prob = 0.4;
  std::vector<int> tasks;  // empty = all tasks in the grammar set
};

struct Dataset {
  std::vector<Sample> samples;
};

// Scene guaranteed to keep the task feasible: the objects of one uniformly
// drawn full branch are always present, every other class independently with
// extra_object_prob, locations uniform in the unit cube.
Scene sample_feasible_scene(const AndOrGraph& g, const Vocab& vocab, double extra_object_prob,
                            Rng& rng);

// Deterministic per seed; per-task split by the given ratios (train first).
std::pair<Dataset, Dataset> gen_dataset(const GrammarSet& gs, const DataGenSpec& spec);

}  // namespace taskplan

#endif
