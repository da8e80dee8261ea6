#pragma once

#include "stackrl/common.hpp"

namespace stackrl {

/// Dense row-major matrix of doubles. The substrate for all network
/// parameters and batch activations.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
    SRL_CHECK(r >= 0 && c >= 0, "matrix dims must be non-negative");
  }
  Matrix(int r, int c, Vec values) : rows(r), cols(c), data(std::move(values)) {
    SRL_CHECK(data.size() == static_cast<size_t>(r) * c, "data length must be rows*cols");
  }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  bool all_finite() const;
};

// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// c = a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// dst += src, elementwise
void add_inplace(Matrix& dst, const Matrix& src);
// dst += scale * src
void axpy_inplace(Matrix& dst, double scale, const Matrix& src);
void scale_inplace(Matrix& m, double scale);
// adds the 1 x cols row vector to every row of m
void add_row_broadcast(Matrix& m, const Matrix& row);
// 1 x cols sums over rows
Matrix column_sums(const Matrix& m);
// horizontal concatenation; any argument may be empty (cols == 0)
Matrix hconcat(const Matrix& a, const Matrix& b);
Matrix hconcat(const Matrix& a, const Matrix& b, const Matrix& c);
// columns [lo, hi) as a new matrix
Matrix slice_cols(const Matrix& m, int lo, int hi);

Matrix from_row(const Vec& v);

}  // namespace stackrl
