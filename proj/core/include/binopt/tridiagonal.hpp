#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace binopt {

/// Thrown when a linear solve breaks down (zero pivot) or a time step fails.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

/// Square tridiagonal operator stored band-wise.
///
/// All three bands have length n; lower[0] and upper[n-1] are unused and
/// kept at zero.
struct TridiagonalMatrix {
  std::vector<double> lower;  // A(i, i-1)
  std::vector<double> diag;   // A(i, i)
  std::vector<double> upper;  // A(i, i+1)

  std::size_t size() const { return diag.size(); }

  static TridiagonalMatrix zero(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
            std::vector<double>(n, 0.0)};
  }

  /// y = A x.
  void apply(std::span<const double> x, std::span<double> y) const;

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(size());
    apply(x, y);
    return y;
  }

  /// Strict row diagonal dominance: |diag| > |lower| + |upper| in every row.
  bool diagonally_dominant() const;
};

/// Thomas factorization of a tridiagonal matrix: one forward elimination,
/// reusable for many right-hand sides.
///
/// Pivots smaller than kPivotTolerance relative to the row maximum raise
/// SolveError.
class ThomasFactorization {
 public:
  static constexpr double kPivotTolerance = 1e-14;

  explicit ThomasFactorization(const TridiagonalMatrix& matrix);

  std::size_t size() const { return inv_pivot_.size(); }

  /// Solves A x = rhs by back substitution against the stored factors.
  void solve(std::span<const double> rhs, std::span<double> x) const;

  std::vector<double> solve(std::span<const double> rhs) const {
    std::vector<double> x(size());
    solve(rhs, x);
    return x;
  }

 private:
  std::vector<double> lower_;      // copy of the subdiagonal
  std::vector<double> c_prime_;    // eliminated superdiagonal
  std::vector<double> inv_pivot_;  // reciprocal pivots
};

/// One-shot Thomas solve (forward elimination + back substitution).
std::vector<double> solve_tridiagonal(const TridiagonalMatrix& matrix,
                                      std::span<const double> rhs);

}  // namespace binopt
