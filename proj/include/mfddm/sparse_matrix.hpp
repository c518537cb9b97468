#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace mfddm {

/// Row offsets and sorted column indices of a CSR matrix. Several matrices
/// assembled on the same grid share one pattern.
struct CsrPattern {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // rows + 1
  std::vector<std::uint32_t> columns;    // sorted within each row

  std::size_t nnz() const { return columns.size(); }
  std::size_t row_nnz(std::size_t r) const { return row_offsets[r + 1] - row_offsets[r]; }
  /// Position of (r, c) in `columns`, or nnz() when not stored.
  std::size_t find(std::size_t r, std::size_t c) const;
};

class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::shared_ptr<const CsrPattern> pattern, std::vector<double> values);
  explicit SparseMatrix(std::shared_ptr<const CsrPattern> pattern);

  /// Keeps every entry with |a| > drop_tol from a row-major dense matrix.
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense,
                                 double drop_tol = 0.0);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return pattern_->rows; }
  std::size_t cols() const { return pattern_->cols; }
  std::size_t nnz() const { return pattern_->nnz(); }
  const CsrPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const CsrPattern>& pattern_ptr() const { return pattern_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Stored entry or 0.
  double at(std::size_t r, std::size_t c) const;

  /// y = A x. Rows are split into contiguous blocks across threads.
  void multiply(std::span<const double> x, std::span<double> y, std::size_t threads = 1) const;
  std::vector<double> operator*(std::span<const double> x) const;

  /// x^T A x
  double quadratic_form(std::span<const double> x) const;

  std::vector<double> diagonal() const;

  /// Largest |a_rc - a_cr| over stored entries, and largest |a_rc|.
  double asymmetry() const;
  double max_abs() const;

 private:
  std::shared_ptr<const CsrPattern> pattern_;
  std::vector<double> values_;
};

}  // namespace mfddm
