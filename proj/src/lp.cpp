#include "coxlab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coxlab/error.hpp"

namespace coxlab {

namespace {
constexpr double kPivotTol = 1e-11;
}

DenseSimplex::DenseSimplex(std::vector<double> a, std::vector<double> b, std::vector<double> c)
    : rows_(b.size()), cols_(c.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (a_.size() != rows_ * cols_) {
    throw Error(ErrorKind::InvalidArgument, "constraint matrix shape mismatch");
  }
  for (double v : b_) {
    if (!(v >= 0.0)) throw Error(ErrorKind::LpFailure, "right-hand side must be nonnegative");
  }
  tableau_.assign((rows_ + 1) * (cols_ + 1), 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) at(i, j) = a_[i * cols_ + j];
    at(i, cols_) = b_[i];
  }
  for (std::size_t j = 0; j < cols_; ++j) at(rows_, j) = -c_[j];
  // Variables 0..cols_-1 are structural, cols_..cols_+rows_-1 are slacks.
  nonbasic_.resize(cols_);
  std::iota(nonbasic_.begin(), nonbasic_.end(), std::size_t{0});
  basic_.resize(rows_);
  std::iota(basic_.begin(), basic_.end(), cols_);
}

void DenseSimplex::pivot(std::size_t r, std::size_t s) {
  const std::size_t width = cols_ + 1;
  double* pr = &tableau_[r * width];
  const double inv = 1.0 / pr[s];
  for (std::size_t i = 0; i <= rows_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * width];
    const double factor = row[s] * inv;
    if (factor == 0.0) continue;
    for (std::size_t j = 0; j < width; ++j) row[j] -= pr[j] * factor;
    row[s] = -factor;
  }
  for (std::size_t j = 0; j < width; ++j) pr[j] *= inv;
  pr[s] = inv;
  std::swap(basic_[r], nonbasic_[s]);
  // Ratio ties are accepted within kPivotTol; keep the basis primal feasible.
  for (std::size_t i = 0; i < rows_; ++i) {
    double& rhs = tableau_[i * width + cols_];
    if (rhs < 0.0) rhs = 0.0;
  }
}

DenseSimplex::Result DenseSimplex::solve(std::size_t max_pivots) {
  Result result;
  while (true) {
    // Entering: lowest variable index with positive reduced profit.
    std::size_t enter = cols_;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (at(rows_, j) < -kPivotTol &&
          (enter == cols_ || nonbasic_[j] < nonbasic_[enter])) {
        enter = j;
      }
    }
    if (enter == cols_) break;

    // Leaving: minimum ratio, ties to the lowest basic variable index.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows_; ++i) {
      const double coef = at(i, enter);
      if (coef > kPivotTol) best = std::min(best, at(i, cols_) / coef);
    }
    std::size_t leave = rows_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double coef = at(i, enter);
      if (coef <= kPivotTol || at(i, cols_) / coef > best + kPivotTol) continue;
      if (leave == rows_ || basic_[i] < basic_[leave]) leave = i;
    }
    if (leave == rows_) {
      result.status = Status::Unbounded;
      return result;
    }
    if (result.pivots == max_pivots) {
      result.status = Status::IterationLimit;
      return result;
    }
    pivot(leave, enter);
    ++result.pivots;
  }

  result.x.assign(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (basic_[i] < cols_) result.x[basic_[i]] = at(i, cols_);
  }
  result.objective = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) result.objective += c_[j] * result.x[j];
  result.status = Status::Optimal;
  return result;
}

double DenseSimplex::feasibility_residual(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) worst = std::max(worst, -x[j]);
  for (std::size_t i = 0; i < rows_; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) lhs += a_[i * cols_ + j] * x[j];
    worst = std::max(worst, lhs - b_[i]);
  }
  return worst;
}

}  // namespace coxlab
