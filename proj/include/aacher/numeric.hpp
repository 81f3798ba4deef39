#pragma once

#include <cstddef>
#include <vector>

#include "aacher/errors.hpp"

namespace aacher {

using Vec = std::vector<double>;

// Dense row-major matrix of 64-bit reals.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }
};

// out = W x + b
inline void affine(const Mat& W, const Vec& b, const Vec& x, Vec& out) {
  if (x.size() != W.cols || b.size() != W.rows) {
    throw ContractViolation("affine: shape mismatch");
  }
  out.resize(W.rows);
  for (std::size_t r = 0; r < W.rows; ++r) {
    const double* w = W.row(r);
    double acc = b[r];
    for (std::size_t c = 0; c < W.cols; ++c) acc += w[c] * x[c];
    out[r] = acc;
  }
}

// out = W^T g  (gradient propagation through an affine layer)
inline void matvec_transposed(const Mat& W, const Vec& g, Vec& out) {
  if (g.size() != W.rows) throw ContractViolation("matvec_transposed: shape mismatch");
  out.assign(W.cols, 0.0);
  for (std::size_t r = 0; r < W.rows; ++r) {
    const double* w = W.row(r);
    const double gr = g[r];
    for (std::size_t c = 0; c < W.cols; ++c) out[c] += gr * w[c];
  }
}

// G += g x^T
inline void outer_accumulate(Mat& G, const Vec& g, const Vec& x) {
  if (g.size() != G.rows || x.size() != G.cols) {
    throw ContractViolation("outer_accumulate: shape mismatch");
  }
  for (std::size_t r = 0; r < G.rows; ++r) {
    double* row = G.row(r);
    const double gr = g[r];
    for (std::size_t c = 0; c < G.cols; ++c) row[c] += gr * x[c];
  }
}

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace aacher
