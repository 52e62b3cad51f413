#ifndef TASKPLAN_CORE_LINALG_HPP
#define TASKPLAN_CORE_LINALG_HPP

#include <cstddef>
#include <vector>

#include "core/error.hpp"

namespace taskplan {

// All numeric state is 64-bit; determinism and gradient-check tightness
// matter more than speed at this scale.
using Vec = std::vector<double>;

struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> d;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int r) { return d.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return d.data() + static_cast<size_t>(r) * cols; }

  double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

  void zero() { std::fill(d.begin(), d.end(), 0.0); }
};

inline void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

inline double dot(const double* x, const double* y, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

inline void scale(double a, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

inline std::vector<int> nonzero_indices(const Vec& x) {
  std::vector<int> idx;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) idx.push_back(static_cast<int>(i));
  return idx;
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline int argmax(const double* p, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

}  // namespace taskplan

#endif
