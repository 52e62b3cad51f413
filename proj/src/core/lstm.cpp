#include "core/lstm.hpp"

#include <cassert>
#include <cmath>

#include "core/error.hpp"

namespace taskplan {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// preact = b + W_x^T x (active rows only) + W_h^T h
void gate_preact(const Mat& w, const Vec& b, const Vec& x, const std::vector<int>& active,
                 const Vec& h, int input, int hidden, Vec& out) {
  out = b;
  for (int j : active) axpy(x[j], w.row(j), out.data(), hidden);
  for (int k = 0; k < hidden; ++k) axpy(h[k], w.row(input + k), out.data(), hidden);
}

void gate_backward(const Mat& w, const Vec& x, const std::vector<int>& active, const Vec& h_prev,
                   const Vec& d_pre, int input, int hidden, Mat& dw, Vec& db, Vec& dh_prev) {
  axpy(1.0, d_pre.data(), db.data(), hidden);
  for (int j : active) axpy(x[j], d_pre.data(), dw.row(j), hidden);
  for (int k = 0; k < hidden; ++k) {
    axpy(h_prev[k], d_pre.data(), dw.row(input + k), hidden);
    dh_prev[k] += dot(w.row(input + k), d_pre.data(), hidden);
  }
}

}  // namespace

LstmState zero_state(int hidden) {
  return {Vec(hidden, 0.0), Vec(hidden, 0.0)};
}

void lstm_forward(const LstmParams& p, const Vec& x, const LstmState& prev, LstmCache& cache) {
  if (static_cast<int>(x.size()) != p.input)
    throw Error(ErrorKind::InvalidArgument, "lstm_forward: input size " + std::to_string(x.size()) +
                                                " does not match cell input " +
                                                std::to_string(p.input));
  if (static_cast<int>(prev.h.size()) != p.hidden ||
      static_cast<int>(prev.c.size()) != p.hidden)
    throw Error(ErrorKind::InvalidArgument, "lstm_forward: state size does not match cell");

  const int hidden = p.hidden;
  cache.x = x;
  cache.active = nonzero_indices(x);
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;

  Vec pre_i, pre_f, pre_o, pre_g;
  gate_preact(p.w_i, p.b_i, x, cache.active, prev.h, p.input, hidden, pre_i);
  gate_preact(p.w_f, p.b_f, x, cache.active, prev.h, p.input, hidden, pre_f);
  gate_preact(p.w_o, p.b_o, x, cache.active, prev.h, p.input, hidden, pre_o);
  gate_preact(p.w_g, p.b_g, x, cache.active, prev.h, p.input, hidden, pre_g);

  cache.i.resize(hidden);
  cache.f.resize(hidden);
  cache.o.resize(hidden);
  cache.g.resize(hidden);
  cache.c.resize(hidden);
  cache.tanh_c.resize(hidden);
  cache.h.resize(hidden);
  for (int k = 0; k < hidden; ++k) {
    cache.i[k] = sigmoid(pre_i[k]);
    cache.f[k] = sigmoid(pre_f[k]);
    cache.o[k] = sigmoid(pre_o[k]);
    cache.g[k] = std::tanh(pre_g[k]);
    cache.c[k] = cache.f[k] * prev.c[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = cache.o[k] * cache.tanh_c[k];
    assert(cache.i[k] > 0.0 && cache.i[k] < 1.0);
    assert(cache.f[k] > 0.0 && cache.f[k] < 1.0);
    assert(cache.o[k] > 0.0 && cache.o[k] < 1.0);
    assert(cache.h[k] > -1.0 && cache.h[k] < 1.0);
    assert(std::isfinite(cache.c[k]));
  }
}

LstmState lstm_step(const LstmParams& p, const Vec& x, const LstmState& prev) {
  LstmCache cache;
  lstm_forward(p, x, prev, cache);
  return {std::move(cache.h), std::move(cache.c)};
}

void lstm_backward(const LstmParams& p, const LstmCache& cache, const Vec& dh, const Vec& dc,
                   LstmParams& grads, Vec& dh_prev, Vec& dc_prev) {
  const int hidden = p.hidden;
  Vec d_ct(hidden), d_pre_i(hidden), d_pre_f(hidden), d_pre_o(hidden), d_pre_g(hidden);
  dh_prev.assign(hidden, 0.0);
  dc_prev.resize(hidden);
  for (int k = 0; k < hidden; ++k) {
    const double d_o = dh[k] * cache.tanh_c[k];
    d_ct[k] = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double d_i = d_ct[k] * cache.g[k];
    const double d_f = d_ct[k] * cache.c_prev[k];
    const double d_g = d_ct[k] * cache.i[k];
    dc_prev[k] = d_ct[k] * cache.f[k];
    d_pre_i[k] = d_i * cache.i[k] * (1.0 - cache.i[k]);
    d_pre_f[k] = d_f * cache.f[k] * (1.0 - cache.f[k]);
    d_pre_o[k] = d_o * cache.o[k] * (1.0 - cache.o[k]);
    d_pre_g[k] = d_g * (1.0 - cache.g[k] * cache.g[k]);
  }
  gate_backward(p.w_i, cache.x, cache.active, cache.h_prev, d_pre_i, p.input, hidden, grads.w_i,
                grads.b_i, dh_prev);
  gate_backward(p.w_f, cache.x, cache.active, cache.h_prev, d_pre_f, p.input, hidden, grads.w_f,
                grads.b_f, dh_prev);
  gate_backward(p.w_o, cache.x, cache.active, cache.h_prev, d_pre_o, p.input, hidden, grads.w_o,
                grads.b_o, dh_prev);
  gate_backward(p.w_g, cache.x, cache.active, cache.h_prev, d_pre_g, p.input, hidden, grads.w_g,
                grads.b_g, dh_prev);
}

Vec head_forward(const DenseHead& head, const Vec& x) {
  const int out = head.w.rows;
  const int in = head.w.cols;
  if (static_cast<int>(x.size()) != in)
    throw Error(ErrorKind::InvalidArgument, "head_forward: input size mismatch");
  Vec y(out);
  for (int r = 0; r < out; ++r) y[r] = head.b[r] + dot(head.w.row(r), x.data(), in);
  return y;
}

void head_backward(const DenseHead& head, const Vec& x, const Vec& dy, DenseHead& grads, Vec* dx) {
  const int out = head.w.rows;
  const int in = head.w.cols;
  for (int r = 0; r < out; ++r) {
    grads.b[r] += dy[r];
    axpy(dy[r], x.data(), grads.w.row(r), in);
    if (dx) axpy(dy[r], head.w.row(r), dx->data(), in);
  }
}

Vec softmax(const Vec& z, const std::vector<char>* mask) {
  if (mask && mask->size() != z.size())
    throw Error(ErrorKind::InvalidArgument, "softmax: mask length mismatch");
  double maxv = 0.0;
  bool any = false;
  for (size_t i = 0; i < z.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    if (!any || z[i] > maxv) maxv = z[i];
    any = true;
  }
  if (!any) throw Error(ErrorKind::InvalidArgument, "softmax: all entries masked");
  Vec p(z.size(), 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    p[i] = std::exp(z[i] - maxv);
    sum += p[i];
  }
  for (size_t i = 0; i < z.size(); ++i) p[i] /= sum;
  return p;
}

CeResult cross_entropy(const Vec& p, int target, const std::vector<char>* mask) {
  if (target < 0 || target >= static_cast<int>(p.size()))
    throw Error(ErrorKind::InvalidArgument, "cross_entropy: target out of range");
  if (mask && !(*mask)[target])
    throw Error(ErrorKind::InvalidArgument, "cross_entropy: target is masked");
  CeResult r;
  r.loss = -std::log(std::max(p[target], 1e-300));
  r.d_logits.assign(p.size(), 0.0);
  for (size_t i = 0; i < p.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    r.d_logits[i] = p[i] - (static_cast<int>(i) == target ? 1.0 : 0.0);
  }
  return r;
}

void sgd_momentum_step(double* p, const double* g, double* v, size_t n, const SgdHyper& hyper) {
  for (size_t k = 0; k < n; ++k) {
    v[k] = hyper.momentum * v[k] - hyper.lr * (g[k] + hyper.weight_decay * p[k]);
    p[k] += v[k];
  }
}

namespace {

void glorot_fill(Mat& m, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : m.d) w = rng.uniform(-bound, bound);
}

}  // namespace

void init_lstm_params(LstmParams& p, int input, int hidden, Rng& rng) {
  p.input = input;
  p.hidden = hidden;
  const int concat = input + hidden;
  p.w_i = Mat(concat, hidden);
  p.w_f = Mat(concat, hidden);
  p.w_o = Mat(concat, hidden);
  p.w_g = Mat(concat, hidden);
  glorot_fill(p.w_i, concat, hidden, rng);
  glorot_fill(p.w_f, concat, hidden, rng);
  glorot_fill(p.w_o, concat, hidden, rng);
  glorot_fill(p.w_g, concat, hidden, rng);
  p.b_i.assign(hidden, 0.0);
  p.b_f.assign(hidden, 1.0);  // open forget gate at the start of training
  p.b_o.assign(hidden, 0.0);
  p.b_g.assign(hidden, 0.0);
}

void init_dense_head(DenseHead& head, int out, int in, Rng& rng) {
  head.w = Mat(out, in);
  glorot_fill(head.w, in, out, rng);
  head.b.assign(out, 0.0);
}

std::vector<TensorRef> lstm_tensors(LstmParams& p, const std::string& prefix) {
  auto shape = std::vector<int>{p.input + p.hidden, p.hidden};
  return {
      {prefix + ".w_i", p.w_i.d.data(), p.w_i.d.size(), shape},
      {prefix + ".w_f", p.w_f.d.data(), p.w_f.d.size(), shape},
      {prefix + ".w_o", p.w_o.d.data(), p.w_o.d.size(), shape},
      {prefix + ".w_g", p.w_g.d.data(), p.w_g.d.size(), shape},
      {prefix + ".b_i", p.b_i.data(), p.b_i.size(), {p.hidden}},
      {prefix + ".b_f", p.b_f.data(), p.b_f.size(), {p.hidden}},
      {prefix + ".b_o", p.b_o.data(), p.b_o.size(), {p.hidden}},
      {prefix + ".b_g", p.b_g.data(), p.b_g.size(), {p.hidden}},
  };
}

std::vector<TensorRef> head_tensors(DenseHead& head, const std::string& prefix) {
  return {
      {prefix + ".w", head.w.d.data(), head.w.d.size(), {head.w.rows, head.w.cols}},
      {prefix + ".b", head.b.data(), head.b.size(), {static_cast<int>(head.b.size())}},
  };
}

double global_grad_norm(const std::vector<TensorRef>& grads) {
  double sq = 0.0;
  for (const auto& t : grads)
    for (size_t k = 0; k < t.n; ++k) sq += t.data[k] * t.data[k];
  return std::sqrt(sq);
}

}  // namespace taskplan
