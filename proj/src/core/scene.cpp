#include "core/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"

namespace taskplan {

namespace {
double dist2_to_origin(const ObjectInstance& o) {
  return o.loc[0] * o.loc[0] + o.loc[1] * o.loc[1] + o.loc[2] * o.loc[2];
}
}  // namespace

bool Scene::has_class(int class_id) const {
  for (const auto& o : objects)
    if (o.class_id == class_id) return true;
  return false;
}

const ObjectInstance* Scene::representative(int class_id) const {
  const ObjectInstance* best = nullptr;
  for (const auto& o : objects) {
    if (o.class_id != class_id) continue;
    if (!best || dist2_to_origin(o) < dist2_to_origin(*best)) best = &o;
  }
  return best;
}

Vec encode_scene(const Scene& scene, const Vocab& vocab) {
  const int n = static_cast<int>(vocab.objects.size());
  Vec v(static_cast<size_t>(n) * 4, 0.0);
  for (int c = 0; c < n; ++c) {
    const ObjectInstance* rep = scene.representative(c);
    if (!rep) continue;
    v[c * 4 + 0] = 1.0;
    v[c * 4 + 1] = rep->loc[0];
    v[c * 4 + 2] = rep->loc[1];
    v[c * 4 + 3] = rep->loc[2];
  }
  return v;
}

Vec encode_task(int task, const Vocab& vocab) {
  if (task < 0 || task >= static_cast<int>(vocab.tasks.size()))
    throw Error(ErrorKind::InvalidArgument, "task id " + std::to_string(task) + " out of range");
  Vec v(vocab.tasks.size(), 0.0);
  v[task] = 1.0;
  return v;
}

int atomic_feature_size(const Vocab& vocab, bool with_end) {
  int extra = with_end ? 1 : 0;
  return static_cast<int>(vocab.actions.size()) + extra +
         static_cast<int>(vocab.objects.size()) + extra;
}

Vec encode_atomic(const AtomicAction& a, const Vocab& vocab, bool with_end) {
  const int na = static_cast<int>(vocab.actions.size()) + (with_end ? 1 : 0);
  const int no = static_cast<int>(vocab.objects.size()) + (with_end ? 1 : 0);
  if (a.action < 0 || a.action >= na)
    throw Error(ErrorKind::InvalidArgument, "action id out of range for encoding");
  if (a.object < 0 || a.object >= no)
    throw Error(ErrorKind::InvalidArgument, "object id out of range for encoding");
  Vec v(static_cast<size_t>(na) + no, 0.0);
  v[a.action] = 1.0;
  v[na + a.object] = 1.0;
  return v;
}

Vec encode_atomic_end(const Vocab& vocab) {
  return encode_atomic({action_end_index(vocab), object_end_index(vocab)}, vocab, true);
}

Vec encode_atomic_start(const Vocab& vocab) {
  return Vec(static_cast<size_t>(atomic_feature_size(vocab, true)), 0.0);
}

bool branch_feasible(const Scene& scene, const AndOrGraph& g, int node) {
  const Node& n = g.at(node);
  switch (n.kind) {
    case NodeKind::Terminal:
      return scene.has_class(n.atomic->object);
    case NodeKind::And:
      for (int c : n.children)
        if (!branch_feasible(scene, g, c)) return false;
      return true;
    case NodeKind::Or:
      for (int c : n.children)
        if (branch_feasible(scene, g, c)) return true;
      return false;
  }
  return false;
}

namespace {

// Summed distance to origin over the terminals of the cheapest feasible
// resolution of the subtree. Only called on feasible nodes.
double branch_score(const Scene& scene, const AndOrGraph& g, int node) {
  const Node& n = g.nodes[node];
  switch (n.kind) {
    case NodeKind::Terminal:
      return std::sqrt(dist2_to_origin(*scene.representative(n.atomic->object)));
    case NodeKind::And: {
      double sum = 0.0;
      for (int c : n.children) sum += branch_score(scene, g, c);
      return sum;
    }
    case NodeKind::Or: {
      double best = 0.0;
      bool found = false;
      for (int c : n.children) {
        if (!branch_feasible(scene, g, c)) continue;
        double s = branch_score(scene, g, c);
        if (!found || s < best) {
          best = s;
          found = true;
        }
      }
      return best;
    }
  }
  return 0.0;
}

}  // namespace

SelectionList oracle_selections(const Scene& scene, const AndOrGraph& g,
                                const SelectionRules& rules) {
  // Resolve or-nodes in DFS order via repeated prune, mirroring the walk the
  // selector network performs.
  SelectionList sel;
  AndOrGraph cur = g;
  std::set<std::string> done;
  for (;;) {
    int next = -1;
    for (int id : or_nodes_dfs(cur)) {
      if (!done.count(cur.nodes[id].label)) {
        next = id;
        break;
      }
    }
    if (next < 0) break;
    done.insert(cur.nodes[next].label);
    const Node& node = cur.nodes[next];
    int pick = -1;
    double pick_score = 0.0;
    for (size_t i = 0; i < node.children.size(); ++i) {
      if (!branch_feasible(scene, cur, node.children[i])) continue;
      if (!rules.distance_tiebreak) {
        pick = static_cast<int>(i);
        break;
      }
      double s = branch_score(scene, cur, node.children[i]);
      if (pick < 0 || s < pick_score) {
        pick = static_cast<int>(i);
        pick_score = s;
      }
    }
    if (pick < 0)
      throw Error(ErrorKind::State, "scene '" + scene.id + "' renders task '" + g.name +
                                        "' infeasible at or-node '" + node.label + "'");
    sel.push_back({node.label, pick});
    cur = prune(cur, next, pick);
  }
  return sel;
}

Scene sample_feasible_scene(const AndOrGraph& g, const Vocab& vocab, double extra_object_prob,
                            Rng& rng) {
  // Support one full branch: the objects of a uniformly sampled derivation.
  SelectionList sel = sample_random_parse(g, rng, /*use_priors=*/false);
  ActionSequence seq = extract_sequence({&g, sel});
  std::set<int> required;
  for (const auto& a : seq) required.insert(a.object);

  Scene scene;
  const int n = static_cast<int>(vocab.objects.size());
  for (int c = 0; c < n; ++c) {
    bool include = required.count(c) > 0;
    if (!include) include = rng.uniform01() < extra_object_prob;
    if (!include) continue;
    ObjectInstance o;
    o.class_id = c;
    o.loc = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    scene.objects.push_back(o);
  }
  return scene;
}

std::pair<Dataset, Dataset> gen_dataset(const GrammarSet& gs, const DataGenSpec& spec) {
  if (spec.count_per_task <= 0)
    throw Error(ErrorKind::InvalidArgument, "gen_dataset: countPerTask must be positive");
  if (spec.split[0] < 0.0 || spec.split[1] < 0.0 ||
      std::abs(spec.split[0] + spec.split[1] - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "gen_dataset: split ratios must be >= 0 and sum to 1");

  std::vector<int> tasks = spec.tasks;
  if (tasks.empty())
    for (size_t t = 0; t < gs.tasks.size(); ++t) tasks.push_back(static_cast<int>(t));
  for (int t : tasks)
    if (t < 0 || t >= static_cast<int>(gs.tasks.size()))
      throw Error(ErrorKind::InvalidArgument, "gen_dataset: task id out of range");

  Dataset train, test;
  const SelectionRules rules;
  const int n_train = static_cast<int>(std::lround(spec.count_per_task * spec.split[0]));
  for (int t : tasks) {
    const AndOrGraph& g = gs.tasks[t];
    for (int i = 0; i < spec.count_per_task; ++i) {
      Rng rng(mix_seed({spec.seed, static_cast<uint64_t>(t), static_cast<uint64_t>(i)}));
      Sample s;
      s.scene = sample_feasible_scene(g, gs.vocab, spec.extra_object_prob, rng);
      s.scene.id = "t" + std::to_string(t) + "_s" + std::to_string(i);
      s.task = t;
      s.selections = oracle_selections(s.scene, g, rules);
      s.sequence = extract_sequence({&g, *s.selections});
      s.provenance = Provenance::Annotated;
      (i < n_train ? train : test).samples.push_back(std::move(s));
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace taskplan
