#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roomgroup {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double frobenius_norm(const Matrix& m);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
bool is_symmetric(const Matrix& m, double tol = 0.0);

struct JacobiOptions {
  double tol = 1e-10;         // relative to the Frobenius norm of the input
  std::size_t max_sweeps = 100;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

/// Cyclic Jacobi eigensolver for real symmetric matrices.
/// Throws Error{NoConvergence} when the off-diagonal norm is still above
/// tol * ||S||_F after max_sweeps sweeps.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, const JacobiOptions& options = {});

}  // namespace roomgroup
