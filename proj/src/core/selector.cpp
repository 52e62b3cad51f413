#include "core/selector.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"

namespace taskplan {

SelectorModel make_selector_model(const GrammarSet& gs, int hidden, int n_max, int b_max,
                                  uint64_t seed) {
  if (gs.node_index.size() > n_max)
    throw Error(ErrorKind::InvalidArgument,
                "nMax " + std::to_string(n_max) + " too small for " +
                    std::to_string(gs.node_index.size()) + " grammar nodes");
  for (const auto& g : gs.tasks)
    if (max_or_branching(g) > b_max)
      throw Error(ErrorKind::InvalidArgument,
                  "bMax " + std::to_string(b_max) + " too small for task '" + g.name + "'");

  SelectorModel m;
  m.vocab_fp = gs.vocab.fingerprint();
  m.n_max = n_max;
  m.b_max = b_max;
  const int feat = 4 * static_cast<int>(gs.vocab.objects.size()) +
                   static_cast<int>(gs.vocab.tasks.size());
  Rng rng(mix_seed({seed, fnv1a("selector-init")}));
  init_dense_head(m.init, hidden, feat, rng);
  init_lstm_params(m.cell, n_max * n_max, hidden, rng);
  init_dense_head(m.branch, b_max, hidden, rng);
  return m;
}

std::vector<TensorRef> model_tensors(SelectorModel& m) {
  std::vector<TensorRef> out;
  for (auto& t : head_tensors(m.init, "init")) out.push_back(t);
  for (auto& t : lstm_tensors(m.cell, "cell")) out.push_back(t);
  for (auto& t : head_tensors(m.branch, "branch")) out.push_back(t);
  return out;
}

SelectorModel zeros_like(const SelectorModel& m) {
  SelectorModel z = m;
  z.init.w.zero();
  std::fill(z.init.b.begin(), z.init.b.end(), 0.0);
  z.cell.w_i.zero();
  z.cell.w_f.zero();
  z.cell.w_o.zero();
  z.cell.w_g.zero();
  std::fill(z.cell.b_i.begin(), z.cell.b_i.end(), 0.0);
  std::fill(z.cell.b_f.begin(), z.cell.b_f.end(), 0.0);
  std::fill(z.cell.b_o.begin(), z.cell.b_o.end(), 0.0);
  std::fill(z.cell.b_g.begin(), z.cell.b_g.end(), 0.0);
  z.branch.w.zero();
  std::fill(z.branch.b.begin(), z.branch.b.end(), 0.0);
  return z;
}

namespace {

struct SelectorForward {
  double loss = 0.0;
  int decisions = 0;
  int correct = 0;
  SelectionList selections;
  Vec scene_task;
  std::vector<LstmCache> steps;
  std::vector<Vec> probs;
  std::vector<int> targets;
  std::vector<std::vector<char>> masks;
};

// One walk over the task grammar. `teacher` non-null replays annotated
// selections (training); otherwise the model's own choice prunes the graph.
SelectorForward selector_walk(const SelectorModel& m, const GrammarSet& gs, const Scene& scene,
                              int task, const SelectionList* teacher, SelectMode mode, Rng* rng,
                              bool keep_caches) {
  const AndOrGraph& g = gs.task(task);
  SelectorForward fwd;
  fwd.scene_task = concat(encode_scene(scene, gs.vocab), encode_task(task, gs.vocab));

  LstmState state;
  state.h = head_forward(m.init, fwd.scene_task);
  state.c.assign(m.cell.hidden, 0.0);

  AndOrGraph cur = g;
  std::set<std::string> done;
  size_t cursor = 0;
  for (;;) {
    int next = -1;
    for (int id : or_nodes_dfs(cur)) {
      if (!done.count(cur.nodes[id].label)) {
        next = id;
        break;
      }
    }
    if (next < 0) break;
    const Node& node = cur.nodes[next];
    done.insert(node.label);
    const int arity = static_cast<int>(node.children.size());
    if (arity > m.b_max)
      throw Error(ErrorKind::State, "or-node '" + node.label + "' branching " +
                                        std::to_string(arity) + " exceeds bMax " +
                                        std::to_string(m.b_max));

    Vec x = encode_adjacency(cur, gs.node_index, m.n_max);
    LstmCache cache;
    lstm_forward(m.cell, x, state, cache);
    state.h = cache.h;
    state.c = cache.c;

    std::vector<char> mask(m.b_max, 0);
    for (int i = 0; i < arity; ++i) mask[i] = 1;
    Vec logits = head_forward(m.branch, state.h);
    Vec p = softmax(logits, &mask);

    int pick;
    if (teacher) {
      if (cursor >= teacher->size())
        throw Error(ErrorKind::Validation,
                    "annotated selections exhausted at or-node '" + node.label + "'");
      const SelectionStep& step = (*teacher)[cursor++];
      if (step.or_node != node.label)
        throw Error(ErrorKind::Validation, "annotated selection names or-node '" + step.or_node +
                                               "' but grammar DFS reaches '" + node.label + "'");
      if (step.child < 0 || step.child >= arity)
        throw Error(ErrorKind::Validation,
                    "annotated child index out of range at or-node '" + node.label + "'");
      pick = step.child;
      CeResult ce = cross_entropy(p, pick, &mask);
      fwd.loss += ce.loss;
      fwd.decisions += 1;
      if (argmax(p.data(), m.b_max) == pick) fwd.correct += 1;
    } else if (mode == SelectMode::Greedy) {
      pick = argmax(p.data(), m.b_max);
    } else {
      if (!rng)
        throw Error(ErrorKind::InvalidArgument, "select_branches: Sample mode needs an rng");
      double u = rng->uniform01();
      double cum = 0.0;
      pick = arity - 1;
      for (int i = 0; i < arity; ++i) {
        cum += p[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    }

    fwd.selections.push_back({node.label, pick});
    if (keep_caches) {
      fwd.steps.push_back(std::move(cache));
      fwd.probs.push_back(std::move(p));
      fwd.targets.push_back(teacher ? pick : -1);
      fwd.masks.push_back(std::move(mask));
    }
    cur = prune(cur, next, pick);
  }
  if (teacher && cursor != teacher->size())
    throw Error(ErrorKind::Validation, "annotated selections have unused trailing entries");
  return fwd;
}

void selector_backward(const SelectorModel& m, const SelectorForward& fwd, SelectorModel& grads) {
  const int hidden = m.cell.hidden;
  Vec dh(hidden, 0.0), dc(hidden, 0.0);
  for (int t = static_cast<int>(fwd.steps.size()) - 1; t >= 0; --t) {
    Vec dlog(fwd.probs[t].size(), 0.0);
    for (size_t i = 0; i < dlog.size(); ++i) {
      if (!fwd.masks[t][i]) continue;
      dlog[i] = fwd.probs[t][i] - (static_cast<int>(i) == fwd.targets[t] ? 1.0 : 0.0);
    }
    head_backward(m.branch, fwd.steps[t].h, dlog, grads.branch, &dh);
    Vec dh_prev, dc_prev;
    lstm_backward(m.cell, fwd.steps[t], dh, dc, grads.cell, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
  head_backward(m.init, fwd.scene_task, dh, grads.init, nullptr);
}

const SelectionList& require_selections(const Sample& s) {
  if (!s.selections)
    throw Error(ErrorKind::Validation, "sample '" + s.scene.id + "' has no or-node selections");
  return *s.selections;
}

}  // namespace

SelectionList select_branches(const SelectorModel& m, const GrammarSet& gs, const Scene& scene,
                              int task, SelectMode mode, Rng* rng) {
  return selector_walk(m, gs, scene, task, nullptr, mode, rng, false).selections;
}

double selector_sample_loss(const SelectorModel& m, const GrammarSet& gs, const Sample& sample) {
  return selector_walk(m, gs, sample.scene, sample.task, &require_selections(sample),
                       SelectMode::Greedy, nullptr, false)
      .loss;
}

double selector_accumulate_grads(const SelectorModel& m, const GrammarSet& gs,
                                 const Sample& sample, SelectorModel& grads, int& correct,
                                 int& decisions) {
  SelectorForward fwd = selector_walk(m, gs, sample.scene, sample.task,
                                      &require_selections(sample), SelectMode::Greedy, nullptr,
                                      true);
  selector_backward(m, fwd, grads);
  correct += fwd.correct;
  decisions += fwd.decisions;
  return fwd.loss;
}

double selection_match_rate(const SelectorModel& m, const GrammarSet& gs,
                            const std::vector<Sample>& samples) {
  if (samples.empty()) return 0.0;
  int hits = 0;
  for (const auto& s : samples) {
    SelectionList predicted = select_branches(m, gs, s.scene, s.task, SelectMode::Greedy);
    if (s.selections && predicted == *s.selections) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double selection_accuracy_tf(const SelectorModel& m, const GrammarSet& gs,
                             const std::vector<Sample>& samples) {
  int correct = 0, decisions = 0;
  for (const auto& s : samples) {
    SelectorForward fwd = selector_walk(m, gs, s.scene, s.task, &require_selections(s),
                                        SelectMode::Greedy, nullptr, false);
    correct += fwd.correct;
    decisions += fwd.decisions;
  }
  return decisions == 0 ? 1.0 : static_cast<double>(correct) / decisions;
}

SelectorTrainResult train_selector(const GrammarSet& gs, const std::vector<Sample>& annotated,
                                   const TrainConfig& cfg, int n_max, int b_max) {
  if (annotated.empty())
    throw Error(ErrorKind::InvalidArgument, "train_selector: empty training set");
  for (const auto& s : annotated) require_selections(s);

  SelectorModel model = make_selector_model(gs, cfg.hidden, n_max, b_max, cfg.seed);
  SelectorModel grads = zeros_like(model);
  SelectorModel velocity = zeros_like(model);
  auto params_t = model_tensors(model);
  auto grads_t = model_tensors(grads);
  auto vel_t = model_tensors(velocity);

  // Deterministic validation split: shuffle once, take the head.
  std::vector<int> order(annotated.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng split_rng(mix_seed({cfg.seed, fnv1a("selector-valsplit")}));
  split_rng.shuffle(order);
  const int n_val = static_cast<int>(std::lround(cfg.val_ratio * annotated.size()));
  std::vector<Sample> val, train;
  for (size_t i = 0; i < order.size(); ++i)
    (static_cast<int>(i) < n_val ? val : train).push_back(annotated[order[i]]);

  SelectorTrainResult result;
  result.model = model;
  result.best_val_acc = -1.0;
  result.steps_per_epoch =
      (static_cast<int>(train.size()) + cfg.sgd.batch_size - 1) / cfg.sgd.batch_size;

  Rng shuffle_rng(mix_seed({cfg.seed, fnv1a("selector-shuffle")}));
  std::vector<int> idx(train.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  SgdHyper hyper = cfg.sgd;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.lr_decay_every > 0 && epoch > 0 && epoch % cfg.lr_decay_every == 0)
      hyper.lr *= cfg.lr_decay;
    shuffle_rng.shuffle(idx);

    double loss_sum = 0.0;
    int correct = 0, decisions = 0;
    for (size_t start = 0; start < idx.size(); start += hyper.batch_size) {
      const size_t stop = std::min(idx.size(), start + hyper.batch_size);
      for (auto& t : grads_t) std::fill(t.data, t.data + t.n, 0.0);
      for (size_t k = start; k < stop; ++k)
        loss_sum += selector_accumulate_grads(model, gs, train[idx[k]], grads, correct, decisions);
      finish_batch(grads_t, static_cast<int>(stop - start), cfg.clip_norm, params_t, vel_t, hyper);
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(train.size());
    entry.train_acc = decisions == 0 ? 1.0 : static_cast<double>(correct) / decisions;
    entry.val_acc = val.empty() ? entry.train_acc : selection_match_rate(model, gs, val);
    result.log.push_back(entry);

    if (val.empty()) {
      result.model = model;
      result.best_epoch = epoch;
      result.best_val_acc = entry.val_acc;
    } else if (entry.val_acc > result.best_val_acc) {
      result.model = model;
      result.best_epoch = epoch;
      result.best_val_acc = entry.val_acc;
    }
  }
  return result;
}

std::vector<Sample> generate_augmented(const SelectorModel& m, const GrammarSet& gs,
                                       const AugmentSpec& spec) {
  std::vector<int> tasks = spec.tasks;
  if (tasks.empty())
    for (size_t t = 0; t < gs.tasks.size(); ++t) tasks.push_back(static_cast<int>(t));
  std::vector<Sample> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const int task = tasks[i % tasks.size()];
    Rng rng(mix_seed({spec.seed, static_cast<uint64_t>(i)}));
    Sample s;
    s.scene = sample_feasible_scene(gs.task(task), gs.vocab, spec.extra_object_prob, rng);
    s.scene.id = "aug_" + std::to_string(i);
    s.task = task;
    s.selections = select_branches(m, gs, s.scene, task, SelectMode::Greedy);
    s.sequence = extract_sequence({&gs.task(task), *s.selections});
    s.provenance = Provenance::Augmented;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace taskplan
