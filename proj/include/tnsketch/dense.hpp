#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace tnsketch {

/// Small dense row-major matrix for sketch oracles and tests.
template <typename T>
struct Matrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<T> a;

  Matrix() = default;
  Matrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), a(r * c, T{}) {}

  T& at(std::int64_t r, std::int64_t c) { return a[r * cols + c]; }
  const T& at(std::int64_t r, std::int64_t c) const { return a[r * cols + c]; }

  static Matrix identity(std::int64_t n) {
    Matrix m(n, n);
    for (std::int64_t i = 0; i < n; ++i) m.at(i, i) = T{1};
    return m;
  }
};

using DenseMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;

template <typename T>
Matrix<T> matmul(const Matrix<T>& x, const Matrix<T>& y) {
  Matrix<T> out(x.rows, y.cols);
  for (std::int64_t i = 0; i < x.rows; ++i) {
    for (std::int64_t k = 0; k < x.cols; ++k) {
      T v = x.at(i, k);
      if (v == T{}) continue;
      for (std::int64_t j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
    }
  }
  return out;
}

template <typename T>
std::vector<T> matvec(const Matrix<T>& x, const std::vector<T>& v) {
  std::vector<T> out(x.rows, T{});
  for (std::int64_t i = 0; i < x.rows; ++i) {
    for (std::int64_t j = 0; j < x.cols; ++j) out[i] += x.at(i, j) * v[j];
  }
  return out;
}

template <typename T>
Matrix<T> kron(const Matrix<T>& x, const Matrix<T>& y) {
  Matrix<T> out(x.rows * y.rows, x.cols * y.cols);
  for (std::int64_t i = 0; i < x.rows; ++i) {
    for (std::int64_t j = 0; j < x.cols; ++j) {
      T v = x.at(i, j);
      if (v == T{}) continue;
      for (std::int64_t k = 0; k < y.rows; ++k) {
        for (std::int64_t l = 0; l < y.cols; ++l) {
          out.at(i * y.rows + k, j * y.cols + l) = v * y.at(k, l);
        }
      }
    }
  }
  return out;
}

/// Row-wise Kronecker: equal row counts, (x • y)(k, (i-1)*cols_y + j) = x(k,i) y(k,j).
template <typename T>
Matrix<T> row_kron(const Matrix<T>& x, const Matrix<T>& y) {
  Matrix<T> out(x.rows, x.cols * y.cols);
  for (std::int64_t r = 0; r < x.rows; ++r) {
    for (std::int64_t i = 0; i < x.cols; ++i) {
      for (std::int64_t j = 0; j < y.cols; ++j) {
        out.at(r, i * y.cols + j) = x.at(r, i) * y.at(r, j);
      }
    }
  }
  return out;
}

}  // namespace tnsketch
