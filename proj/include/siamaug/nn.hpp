#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/rng.hpp"

namespace siamaug::nn {

using Vec = std::vector<double>;

// Row-major dense matrix, sized for desk-scale models.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  bool empty() const { return a.empty(); }
  bool same_shape(const Mat& other) const { return rows == other.rows && cols == other.cols; }
};

inline Vec matvec(const Mat& w, const Vec& x) {
  if (w.cols != x.size()) throw ContractError("matvec dimension mismatch");
  Vec y(w.rows, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    double acc = 0.0;
    const double* row = w.a.data() + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

// y = W x + b
inline Vec affine(const Mat& w, const Vec& x, const Vec& b) {
  Vec y = matvec(w, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

// dW += dy * x^T ; db += dy ; returns dx = W^T dy
inline Vec affine_backward(const Mat& w, const Vec& x, const Vec& dy, Mat& dw, Vec& db) {
  for (std::size_t i = 0; i < w.rows; ++i) {
    db[i] += dy[i];
    double* drow = dw.a.data() + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) drow[j] += dy[i] * x[j];
  }
  Vec dx(w.cols, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double* row = w.a.data() + i * w.cols;
    for (std::size_t j = 0; j < w.cols; ++j) dx[j] += row[j] * dy[i];
  }
  return dx;
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ContractError("dot dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

enum class Activation { kIdentity, kTanh };

// Two-layer perceptron. The encoder uses a tanh hidden layer; projection and
// prediction heads stay linear so identity weights give the identity map.
// Both activations are smooth, which the finite-difference gradient oracle
// relies on.
struct Mlp2 {
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
  Activation act = Activation::kTanh;

  static Mlp2 make(std::size_t in, std::size_t hidden, std::size_t out,
                   Activation act = Activation::kTanh) {
    Mlp2 m;
    m.w1 = Mat(hidden, in);
    m.b1 = Vec(hidden, 0.0);
    m.w2 = Mat(out, hidden);
    m.b2 = Vec(out, 0.0);
    m.act = act;
    return m;
  }

  std::size_t in_dim() const { return w1.cols; }
  std::size_t out_dim() const { return w2.rows; }
  bool empty() const { return w1.empty(); }

  // hidden receives the post-activation hidden layer for reuse in backward.
  Vec forward(const Vec& x, Vec& hidden) const {
    hidden = affine(w1, x, b1);
    if (act == Activation::kTanh) {
      for (double& h : hidden) h = std::tanh(h);
    }
    return affine(w2, hidden, b2);
  }

  Vec forward(const Vec& x) const {
    Vec hidden;
    return forward(x, hidden);
  }

  // Accumulates parameter gradients into `grad` and returns dL/dx.
  Vec backward(const Vec& x, const Vec& hidden, const Vec& dy, Mlp2& grad) const {
    Vec dhidden = affine_backward(w2, hidden, dy, grad.w2, grad.b2);
    if (act == Activation::kTanh) {
      for (std::size_t i = 0; i < dhidden.size(); ++i) {
        dhidden[i] *= 1.0 - hidden[i] * hidden[i];
      }
    }
    return affine_backward(w1, x, dhidden, grad.w1, grad.b1);
  }
};

inline void fill_uniform(Mat& m, Rng& rng, double scale) {
  for (double& v : m.a) v = rng.uniform(-scale, scale);
}

}  // namespace siamaug::nn
