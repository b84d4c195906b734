#include "binopt/tridiagonal.hpp"

#include <algorithm>
#include <cmath>

namespace binopt {

void TridiagonalMatrix::apply(std::span<const double> x,
                              std::span<double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) {
    throw std::invalid_argument("TridiagonalMatrix::apply: size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += lower[i] * x[i - 1];
    if (i + 1 < n) v += upper[i] * x[i + 1];
    y[i] = v;
  }
}

bool TridiagonalMatrix::diagonally_dominant() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(diag[i]) <= std::abs(lower[i]) + std::abs(upper[i])) {
      return false;
    }
  }
  return true;
}

ThomasFactorization::ThomasFactorization(const TridiagonalMatrix& matrix) {
  const std::size_t n = matrix.size();
  if (n == 0) throw std::invalid_argument("ThomasFactorization: empty matrix");
  lower_ = matrix.lower;
  c_prime_.resize(n);
  inv_pivot_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot =
        i == 0 ? matrix.diag[0]
               : matrix.diag[i] - matrix.lower[i] * c_prime_[i - 1];
    const double row_max =
        std::max({std::abs(matrix.lower[i]), std::abs(matrix.diag[i]),
                  std::abs(matrix.upper[i])});
    if (!std::isfinite(pivot) ||
        std::abs(pivot) <= kPivotTolerance * row_max) {
      throw SolveError("Thomas elimination: zero pivot in row " +
                       std::to_string(i));
    }
    inv_pivot_[i] = 1.0 / pivot;
    c_prime_[i] = matrix.upper[i] * inv_pivot_[i];
  }
}

void ThomasFactorization::solve(std::span<const double> rhs,
                                std::span<double> x) const {
  const std::size_t n = size();
  if (rhs.size() != n || x.size() != n) {
    throw std::invalid_argument("ThomasFactorization::solve: size mismatch");
  }
  x[0] = rhs[0] * inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) {
    x[i] = (rhs[i] - lower_[i] * x[i - 1]) * inv_pivot_[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] -= c_prime_[i] * x[i + 1];
  }
}

std::vector<double> solve_tridiagonal(const TridiagonalMatrix& matrix,
                                      std::span<const double> rhs) {
  return ThomasFactorization(matrix).solve(rhs);
}

}  // namespace binopt
