#include "mfddm/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "mfddm/parallel.hpp"

namespace mfddm {

std::size_t CsrPattern::find(std::size_t r, std::size_t c) const {
  const auto first = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
  const auto last = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return nnz();
  return static_cast<std::size_t>(it - columns.begin());
}

SparseMatrix::SparseMatrix(std::shared_ptr<const CsrPattern> pattern, std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_) throw std::invalid_argument("SparseMatrix: null pattern");
  if (values_.size() != pattern_->nnz()) throw std::invalid_argument("SparseMatrix: value count != nnz");
}

SparseMatrix::SparseMatrix(std::shared_ptr<const CsrPattern> pattern)
    : SparseMatrix(pattern, std::vector<double>(pattern ? pattern->nnz() : 0, 0.0)) {}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense,
                                      double drop_tol) {
  if (dense.size() != rows * cols) throw std::invalid_argument("SparseMatrix::from_dense: size mismatch");
  auto pattern = std::make_shared<CsrPattern>();
  pattern->rows = rows;
  pattern->cols = cols;
  pattern->row_offsets.push_back(0);
  std::vector<double> values;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = dense[r * cols + c];
      if (std::abs(v) > drop_tol || (drop_tol == 0.0 && v != 0.0)) {
        pattern->columns.push_back(static_cast<std::uint32_t>(c));
        values.push_back(v);
      }
    }
    pattern->row_offsets.push_back(pattern->columns.size());
  }
  return SparseMatrix(std::move(pattern), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  auto pattern = std::make_shared<CsrPattern>();
  pattern->rows = n;
  pattern->cols = n;
  pattern->row_offsets.resize(n + 1);
  pattern->columns.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pattern->row_offsets[i] = i;
    pattern->columns[i] = static_cast<std::uint32_t>(i);
  }
  pattern->row_offsets[n] = n;
  return SparseMatrix(std::move(pattern), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) throw std::out_of_range("SparseMatrix::at: index out of range");
  const std::size_t pos = pattern_->find(r, c);
  return pos == nnz() ? 0.0 : values_[pos];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y, std::size_t threads) const {
  if (x.size() != cols() || y.size() != rows()) throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
  const auto& offsets = pattern_->row_offsets;
  const auto* cols_ptr = pattern_->columns.data();
  const auto* vals = values_.data();
  const auto* xp = x.data();
  auto* yp = y.data();
  parallel_blocks(rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double sum = 0.0;
      for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) sum += vals[k] * xp[cols_ptr[k]];
      yp[r] = sum;
    }
  });
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows());
  multiply(x, y);
  return y;
}

double SparseMatrix::quadratic_form(std::span<const double> x) const {
  if (x.size() != cols() || rows() != cols()) throw std::invalid_argument("SparseMatrix::quadratic_form: size mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < rows(); ++r) {
    double sum = 0.0;
    for (std::size_t k = pattern_->row_offsets[r]; k < pattern_->row_offsets[r + 1]; ++k)
      sum += values_[k] * x[pattern_->columns[k]];
    total += x[r] * sum;
  }
  return total;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(std::min(rows(), cols()), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = at(r, r);
  return d;
}

double SparseMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t k = pattern_->row_offsets[r]; k < pattern_->row_offsets[r + 1]; ++k) {
      const std::size_t c = pattern_->columns[k];
      const double mirror = c < rows() ? at(c, r) : 0.0;
      worst = std::max(worst, std::abs(values_[k] - mirror));
    }
  }
  return worst;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace mfddm
