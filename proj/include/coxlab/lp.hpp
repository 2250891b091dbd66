#pragma once

#include <cstddef>
#include <vector>

namespace coxlab {

/// Dense tableau simplex for
///
///     maximize c^T x  subject to  A x <= b,  x >= 0,
///
/// with b >= 0 so the origin is a feasible starting basis. Pivoting follows
/// Bland's rule (lowest-index entering and leaving variables), which rules out
/// cycling on the highly degenerate cone constraints this library produces.
class DenseSimplex {
 public:
  enum class Status { Optimal, Unbounded, IterationLimit };

  struct Result {
    Status status = Status::Optimal;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
  };

  /// `a` is row-major with `b.size()` rows and `c.size()` columns.
  DenseSimplex(std::vector<double> a, std::vector<double> b, std::vector<double> c);

  Result solve(std::size_t max_pivots = 1'000'000);

  /// max_i (A x - b)_i^+ together with max_j (-x_j)^+.
  double feasibility_residual(const std::vector<double>& x) const;

 private:
  double& at(std::size_t r, std::size_t col) { return tableau_[r * (cols_ + 1) + col]; }
  void pivot(std::size_t r, std::size_t s);

  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  // (rows_ + 1) x (cols_ + 1): constraint rows then the objective row;
  // the last column holds the right-hand side.
  std::vector<double> tableau_;
  std::vector<std::size_t> basic_;
  std::vector<std::size_t> nonbasic_;
};

}  // namespace coxlab
