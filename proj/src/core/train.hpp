#ifndef TASKPLAN_CORE_TRAIN_HPP
#define TASKPLAN_CORE_TRAIN_HPP

#include <cstdint>
#include <vector>

#include "core/lstm.hpp"

namespace taskplan {

struct TrainConfig {
  int hidden = 64;
  SgdHyper sgd;            // lr 0.01, momentum 0.9, weight decay 5e-4, batch 40
  int epochs = 200;
  double val_ratio = 0.1;  // held-out fraction for best-model selection (0 = keep final)
  double lr_decay = 1.0;   // lr multiplier applied every lr_decay_every epochs
  int lr_decay_every = 0;
  double clip_norm = 0.0;  // 0 = no gradient clipping
  double stop_at_token_acc = 0.0;  // early stop once training token accuracy reaches this
  uint64_t seed = 1;
};

struct TrainLogEntry {
  int epoch = 0;
  double loss = 0.0;      // mean per-sample training loss
  double train_acc = 0.0; // teacher-forced accuracy on the training split
  double val_acc = 0.0;   // validation metric (selection match / token accuracy)
};

// Mean-of-batch semantics: accumulated gradients are divided by the batch
// count before the optimizer step, so lr does not depend on batch size.
inline void finish_batch(std::vector<TensorRef>& grads, int batch_count, double clip_norm,
                         std::vector<TensorRef>& params, std::vector<TensorRef>& velocity,
                         const SgdHyper& hyper) {
  const double inv = 1.0 / batch_count;
  for (auto& t : grads) scale(inv, t.data, t.n);
  if (clip_norm > 0.0) {
    double norm = global_grad_norm(grads);
    if (norm > clip_norm)
      for (auto& t : grads) scale(clip_norm / norm, t.data, t.n);
  }
  for (size_t i = 0; i < params.size(); ++i)
    sgd_momentum_step(params[i].data, grads[i].data, velocity[i].data, params[i].n, hyper);
}

}  // namespace taskplan

#endif
