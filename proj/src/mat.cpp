#include "stackrl/mat.hpp"

#include <cmath>
#include <cstring>

namespace stackrl {

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  SRL_CHECK(a.cols == b.rows, "matmul: inner dims must match");
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int p = 0; p < a.cols; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  SRL_CHECK(a.rows == b.rows, "matmul_tn: row counts must match");
  Matrix c(a.cols, b.cols);
  for (int p = 0; p < a.rows; ++p) {
    const double* arow = a.row(p);
    const double* brow = b.row(p);
    for (int i = 0; i < a.cols; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.row(i);
      for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  SRL_CHECK(a.cols == b.cols, "matmul_nt: col counts must match");
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

void add_inplace(Matrix& dst, const Matrix& src) {
  SRL_CHECK(dst.same_shape(src), "add_inplace: shape mismatch");
  for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

void axpy_inplace(Matrix& dst, double scale, const Matrix& src) {
  SRL_CHECK(dst.same_shape(src), "axpy_inplace: shape mismatch");
  for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += scale * src.data[i];
}

void scale_inplace(Matrix& m, double scale) {
  for (double& v : m.data) v *= scale;
}

void add_row_broadcast(Matrix& m, const Matrix& row) {
  SRL_CHECK(row.rows == 1 && row.cols == m.cols, "add_row_broadcast: bad row shape");
  for (int i = 0; i < m.rows; ++i) {
    double* mrow = m.row(i);
    for (int j = 0; j < m.cols; ++j) mrow[j] += row.data[j];
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols);
  for (int i = 0; i < m.rows; ++i) {
    const double* mrow = m.row(i);
    for (int j = 0; j < m.cols; ++j) out.data[j] += mrow[j];
  }
  return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.cols == 0) return b;
  if (b.cols == 0) return a;
  SRL_CHECK(a.rows == b.rows, "hconcat: row counts must match");
  Matrix c(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    std::memcpy(c.row(i), a.row(i), sizeof(double) * a.cols);
    std::memcpy(c.row(i) + a.cols, b.row(i), sizeof(double) * b.cols);
  }
  return c;
}

Matrix hconcat(const Matrix& a, const Matrix& b, const Matrix& c) {
  return hconcat(hconcat(a, b), c);
}

Matrix slice_cols(const Matrix& m, int lo, int hi) {
  SRL_CHECK(0 <= lo && lo <= hi && hi <= m.cols, "slice_cols: bad range");
  Matrix out(m.rows, hi - lo);
  for (int i = 0; i < m.rows; ++i)
    std::memcpy(out.row(i), m.row(i) + lo, sizeof(double) * (hi - lo));
  return out;
}

Matrix from_row(const Vec& v) {
  Matrix m(1, static_cast<int>(v.size()));
  m.data = v;
  return m;
}

}  // namespace stackrl
