#ifndef TASKPLAN_CORE_LSTM_HPP
#define TASKPLAN_CORE_LSTM_HPP

#include <cstdint>
#include <vector>

#include "core/linalg.hpp"
#include "core/rng.hpp"

namespace taskplan {

// Gate parameters of the standard LSTM cell
//   i = sigmoid(W_i [x,h] + b_i)      f = sigmoid(W_f [x,h] + b_f)
//   o = sigmoid(W_o [x,h] + b_o)      c' = f*c + i*tanh(W_g [x,h] + b_g)
//   h' = o * tanh(c')
// Each gate matrix has the logical shape hidden x (input+hidden) but is
// stored input-major: w.row(j)[k] is the weight from concat dimension j into
// hidden unit k. Step inputs are mostly sparse (adjacency flattenings,
// one-hot pairs), so the forward/backward passes walk active input rows.
struct LstmParams {
  int input = 0;
  int hidden = 0;
  Mat w_i, w_f, w_o, w_g;  // (input+hidden) x hidden
  Vec b_i, b_f, b_o, b_g;  // hidden
};

struct LstmState {
  Vec h, c;
};

LstmState zero_state(int hidden);

// Everything the backward pass needs from one forward step.
struct LstmCache {
  Vec x;
  std::vector<int> active;  // nonzero input dimensions
  Vec h_prev, c_prev;
  Vec i, f, o, g;  // post-nonlinearity gate values (g = tanh of its preact)
  Vec c, tanh_c, h;
};

void lstm_forward(const LstmParams& p, const Vec& x, const LstmState& prev, LstmCache& cache);

LstmState lstm_step(const LstmParams& p, const Vec& x, const LstmState& prev);

// Accumulates parameter gradients into `grads` (same shapes as p) and the
// gradients w.r.t. the previous state into dh_prev / dc_prev. dh must already
// combine the head gradient at this step with the recurrent gradient from the
// next step.
void lstm_backward(const LstmParams& p, const LstmCache& cache, const Vec& dh, const Vec& dc,
                   LstmParams& grads, Vec& dh_prev, Vec& dc_prev);

// Affine head: y = W x + b, W stored out x in (dense, small).
struct DenseHead {
  Mat w;
  Vec b;
};

Vec head_forward(const DenseHead& head, const Vec& x);
// dx may be null; when given, W^T dy is accumulated into it.
void head_backward(const DenseHead& head, const Vec& x, const Vec& dy, DenseHead& grads, Vec* dx);

// Masked, max-subtracted softmax. Masked entries are exactly zero. Throws
// when every entry is masked.
Vec softmax(const Vec& z, const std::vector<char>* mask = nullptr);

struct CeResult {
  double loss = 0.0;
  Vec d_logits;  // p - onehot(target), zero on masked slots
};

CeResult cross_entropy(const Vec& p, int target, const std::vector<char>* mask = nullptr);

// v <- momentum*v - lr*(g + weightDecay*p); p <- p + v
struct SgdHyper {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int batch_size = 40;
};

void sgd_momentum_step(double* p, const double* g, double* v, size_t n, const SgdHyper& hyper);

// Glorot-uniform weights with bound sqrt(6/(fanIn+fanOut)), zero biases
// except the forget-gate bias, which starts at 1.
void init_lstm_params(LstmParams& p, int input, int hidden, Rng& rng);
void init_dense_head(DenseHead& head, int out, int in, Rng& rng);

// Flat view over every tensor of a model, in a fixed order; shared by the
// optimizer, checkpoints and the finite-difference checks.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  size_t n = 0;
  std::vector<int> shape;
};

std::vector<TensorRef> lstm_tensors(LstmParams& p, const std::string& prefix);
std::vector<TensorRef> head_tensors(DenseHead& head, const std::string& prefix);

double global_grad_norm(const std::vector<TensorRef>& grads);

}  // namespace taskplan

#endif
