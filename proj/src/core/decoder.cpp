#include "core/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace taskplan {

DecoderModel make_decoder_model(const GrammarSet& gs, int hidden, int max_len, uint64_t seed) {
  DecoderModel m;
  m.vocab_fp = gs.vocab.fingerprint();
  m.max_len = max_len;
  const int feat = 4 * static_cast<int>(gs.vocab.objects.size()) +
                   static_cast<int>(gs.vocab.tasks.size());
  const int n_actions = static_cast<int>(gs.vocab.actions.size()) + 1;
  const int n_objects = static_cast<int>(gs.vocab.objects.size()) + 1;
  Rng rng(mix_seed({seed, fnv1a("decoder-init")}));
  init_dense_head(m.init, hidden, feat, rng);
  init_lstm_params(m.cell, n_actions + n_objects, hidden, rng);
  init_dense_head(m.action_head, n_actions, hidden, rng);
  init_dense_head(m.object_head, n_objects, hidden, rng);
  return m;
}

std::vector<TensorRef> model_tensors(DecoderModel& m) {
  std::vector<TensorRef> out;
  for (auto& t : head_tensors(m.init, "init")) out.push_back(t);
  for (auto& t : lstm_tensors(m.cell, "cell")) out.push_back(t);
  for (auto& t : head_tensors(m.action_head, "action_head")) out.push_back(t);
  for (auto& t : head_tensors(m.object_head, "object_head")) out.push_back(t);
  return out;
}

DecoderModel zeros_like(const DecoderModel& m) {
  DecoderModel z = m;
  for (auto& t : model_tensors(z)) std::fill(t.data, t.data + t.n, 0.0);
  return z;
}

namespace {

LstmState initial_state(const DecoderModel& m, const Vocab& vocab, const Scene& scene, int task,
                        Vec* scene_task_out) {
  Vec scene_task = concat(encode_scene(scene, vocab), encode_task(task, vocab));
  LstmState state;
  state.h = head_forward(m.init, scene_task);
  state.c.assign(m.cell.hidden, 0.0);
  if (scene_task_out) *scene_task_out = std::move(scene_task);
  return state;
}

// Teacher-forced inputs for a sequence: start marker, then each gold pair.
std::vector<Vec> forced_inputs(const Vocab& vocab, const ActionSequence& seq) {
  std::vector<Vec> xs;
  xs.reserve(seq.size() + 1);
  xs.push_back(encode_atomic_start(vocab));
  for (const auto& a : seq) xs.push_back(encode_atomic(a, vocab, true));
  return xs;
}

struct DecoderForward {
  double loss = 0.0;
  int tokens = 0;   // two per step (action + object)
  int correct = 0;
  Vec scene_task;
  std::vector<LstmCache> steps;
  std::vector<Vec> p_action, p_object;
  std::vector<int> t_action, t_object;
};

DecoderForward decoder_forward(const DecoderModel& m, const Vocab& vocab, const Sample& sample,
                               bool keep_caches) {
  if (static_cast<int>(sample.sequence.size()) > m.max_len)
    throw Error(ErrorKind::InvalidArgument,
                "sample '" + sample.scene.id + "' longer than maxLen " + std::to_string(m.max_len));
  DecoderForward fwd;
  LstmState state = initial_state(m, vocab, sample.scene, sample.task, &fwd.scene_task);
  std::vector<Vec> xs = forced_inputs(vocab, sample.sequence);
  const int n_steps = static_cast<int>(xs.size());
  for (int t = 0; t < n_steps; ++t) {
    LstmCache cache;
    lstm_forward(m.cell, xs[t], state, cache);
    state.h = cache.h;
    state.c = cache.c;
    Vec pa = softmax(head_forward(m.action_head, state.h));
    Vec po = softmax(head_forward(m.object_head, state.h));
    const bool end_step = t == n_steps - 1;
    const int ta = end_step ? action_end_index(vocab) : sample.sequence[t].action;
    const int to = end_step ? object_end_index(vocab) : sample.sequence[t].object;
    fwd.loss += cross_entropy(pa, ta).loss + cross_entropy(po, to).loss;
    fwd.tokens += 2;
    if (argmax(pa.data(), static_cast<int>(pa.size())) == ta) fwd.correct += 1;
    if (argmax(po.data(), static_cast<int>(po.size())) == to) fwd.correct += 1;
    if (keep_caches) {
      fwd.steps.push_back(std::move(cache));
      fwd.p_action.push_back(std::move(pa));
      fwd.p_object.push_back(std::move(po));
      fwd.t_action.push_back(ta);
      fwd.t_object.push_back(to);
    }
  }
  return fwd;
}

void decoder_backward(const DecoderModel& m, const DecoderForward& fwd, DecoderModel& grads) {
  const int hidden = m.cell.hidden;
  Vec dh(hidden, 0.0), dc(hidden, 0.0);
  for (int t = static_cast<int>(fwd.steps.size()) - 1; t >= 0; --t) {
    Vec da = fwd.p_action[t];
    da[fwd.t_action[t]] -= 1.0;
    Vec dobj = fwd.p_object[t];
    dobj[fwd.t_object[t]] -= 1.0;
    head_backward(m.action_head, fwd.steps[t].h, da, grads.action_head, &dh);
    head_backward(m.object_head, fwd.steps[t].h, dobj, grads.object_head, &dh);
    Vec dh_prev, dc_prev;
    lstm_backward(m.cell, fwd.steps[t], dh, dc, grads.cell, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
  head_backward(m.init, fwd.scene_task, dh, grads.init, nullptr);
}

}  // namespace

ActionSequence decode(const DecoderModel& m, const Vocab& vocab, const Scene& scene, int task) {
  ActionSequence out;
  LstmState state = initial_state(m, vocab, scene, task, nullptr);
  Vec x = encode_atomic_start(vocab);
  const int n_real_objects = static_cast<int>(vocab.objects.size());
  for (int t = 0; t < m.max_len; ++t) {
    state = lstm_step(m.cell, x, state);
    Vec pa = softmax(head_forward(m.action_head, state.h));
    Vec po = softmax(head_forward(m.object_head, state.h));
    const int a = argmax(pa.data(), static_cast<int>(pa.size()));
    if (a == action_end_index(vocab)) break;
    const int o = argmax(po.data(), n_real_objects);
    out.push_back({a, o});
    x = encode_atomic(out.back(), vocab, true);
  }
  return out;
}

double score(const DecoderModel& m, const Vocab& vocab, const Scene& scene, int task,
             const ActionSequence& seq) {
  if (static_cast<int>(seq.size()) > m.max_len)
    throw Error(ErrorKind::InvalidArgument, "score: sequence longer than maxLen");
  Sample s;
  s.scene = scene;
  s.task = task;
  s.sequence = seq;
  // loss is the summed negative log likelihood of the sequence plus END
  return -decoder_forward(m, vocab, s, false).loss;
}

double decoder_sample_loss(const DecoderModel& m, const Vocab& vocab, const Sample& sample) {
  return decoder_forward(m, vocab, sample, false).loss;
}

double decoder_accumulate_grads(const DecoderModel& m, const Vocab& vocab, const Sample& sample,
                                DecoderModel& grads, int& correct, int& tokens) {
  DecoderForward fwd = decoder_forward(m, vocab, sample, true);
  decoder_backward(m, fwd, grads);
  correct += fwd.correct;
  tokens += fwd.tokens;
  return fwd.loss;
}

double token_accuracy(const DecoderModel& m, const Vocab& vocab,
                      const std::vector<Sample>& samples) {
  int correct = 0, tokens = 0;
  for (const auto& s : samples) {
    DecoderForward fwd = decoder_forward(m, vocab, s, false);
    correct += fwd.correct;
    tokens += fwd.tokens;
  }
  return tokens == 0 ? 1.0 : static_cast<double>(correct) / tokens;
}

DecoderTrainResult train_decoder(const GrammarSet& gs, const std::vector<Sample>& samples,
                                 const TrainConfig& cfg, int max_len) {
  if (samples.empty())
    throw Error(ErrorKind::InvalidArgument, "train_decoder: empty training set");
  for (const auto& s : samples) {
    if (s.sequence.empty())
      throw Error(ErrorKind::Validation, "sample '" + s.scene.id + "' has an empty sequence");
    if (static_cast<int>(s.sequence.size()) > max_len)
      throw Error(ErrorKind::Validation,
                  "sample '" + s.scene.id + "' exceeds maxLen " + std::to_string(max_len));
  }

  DecoderModel model = make_decoder_model(gs, cfg.hidden, max_len, cfg.seed);
  DecoderModel grads = zeros_like(model);
  DecoderModel velocity = zeros_like(model);
  auto params_t = model_tensors(model);
  auto grads_t = model_tensors(grads);
  auto vel_t = model_tensors(velocity);

  DecoderTrainResult result;
  result.steps_per_epoch =
      (static_cast<int>(samples.size()) + cfg.sgd.batch_size - 1) / cfg.sgd.batch_size;

  Rng shuffle_rng(mix_seed({cfg.seed, fnv1a("decoder-shuffle")}));
  std::vector<int> idx(samples.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  SgdHyper hyper = cfg.sgd;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.lr_decay_every > 0 && epoch > 0 && epoch % cfg.lr_decay_every == 0)
      hyper.lr *= cfg.lr_decay;
    shuffle_rng.shuffle(idx);

    double loss_sum = 0.0;
    int correct = 0, tokens = 0;
    for (size_t start = 0; start < idx.size(); start += hyper.batch_size) {
      const size_t stop = std::min(idx.size(), start + hyper.batch_size);
      for (auto& t : grads_t) std::fill(t.data, t.data + t.n, 0.0);
      for (size_t k = start; k < stop; ++k)
        loss_sum +=
            decoder_accumulate_grads(model, gs.vocab, samples[idx[k]], grads, correct, tokens);
      finish_batch(grads_t, static_cast<int>(stop - start), cfg.clip_norm, params_t, vel_t, hyper);
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(samples.size());
    entry.train_acc = tokens == 0 ? 1.0 : static_cast<double>(correct) / tokens;
    entry.val_acc = entry.train_acc;
    result.log.push_back(entry);
    result.epochs_run = epoch + 1;

    if (cfg.stop_at_token_acc > 0.0) {
      // Evaluate with the post-update parameters so the stop condition is
      // the accuracy of the returned model.
      double acc = token_accuracy(model, gs.vocab, samples);
      result.log.back().val_acc = acc;
      if (acc >= cfg.stop_at_token_acc) break;
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace taskplan
