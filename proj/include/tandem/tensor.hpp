#pragma once

#include <cstddef>
#include <vector>

namespace tandem {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. The whole numeric core runs in 64-bit
// floats so gradient checks and oracle comparisons stay tight.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<size_t>(r) * c, 0.0);
  }

  void zero() { data.assign(data.size(), 0.0); }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// y = W x + b where W is (out x in), x has length in, y length out.
inline void affine(const Matrix& w, const double* x, const double* b, double* y) {
  for (int o = 0; o < w.rows; ++o) y[o] = dot(w.row(o), x, w.cols) + b[o];
}

// x += W^T dy (backprop through the affine above).
inline void affine_backward_input(const Matrix& w, const double* dy, double* dx) {
  for (int o = 0; o < w.rows; ++o) axpy(dy[o], w.row(o), dx, w.cols);
}

// dW += dy (x) x, db += dy.
inline void affine_backward_params(const double* dy, const double* x, Matrix& dw,
                                   double* db) {
  for (int o = 0; o < dw.rows; ++o) {
    axpy(dy[o], x, dw.row(o), dw.cols);
    db[o] += dy[o];
  }
}

}  // namespace tandem
