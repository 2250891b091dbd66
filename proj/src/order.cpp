#include "coxlab/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coxlab/lp.hpp"
#include "coxlab/parallel.hpp"

namespace coxlab {

std::string_view to_string(OrderStatus status) {
  switch (status) {
    case OrderStatus::Ordered: return "Ordered";
    case OrderStatus::Violated: return "Violated";
    case OrderStatus::IncomparableMarginals: return "IncomparableMarginals";
  }
  return "Unknown";
}

MonotonicityReport check_stochastic_monotonicity(const TransitionMatrix& p,
                                                 const NumericPolicy& policy) {
  MonotonicityReport report;
  const std::size_t m = p.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double tail_lo = 0.0;
    double tail_hi = 0.0;
    // Threshold 0 compares total masses and is skipped.
    for (std::size_t k = m - 1; k >= 1; --k) {
      tail_lo += p(i, k);
      tail_hi += p(i + 1, k);
      const double gap = tail_hi - tail_lo;
      if (gap < -policy.monotonicity_tol) report.violations.push_back({i, k, gap});
    }
  }
  std::sort(report.violations.begin(), report.violations.end(),
            [](const auto& a, const auto& b) {
              return a.row != b.row ? a.row < b.row : a.threshold < b.threshold;
            });
  report.monotone = report.violations.empty();
  return report;
}

double monotone_uniformization_rate(const Ctmc& chain) { return 2.0 * chain.max_exit_rate(); }

MonotonicityReport check_generator_monotonicity(const Ctmc& chain, std::optional<double> eta,
                                                const NumericPolicy& policy) {
  const double rate = eta.value_or(monotone_uniformization_rate(chain));
  return check_stochastic_monotonicity(uniformize(chain, rate), policy);
}

std::pair<MonotonicityReport, MonotonicityReport> check_doubly_monotone(
    const Ctmc& chain, const NumericPolicy& policy) {
  return {check_generator_monotonicity(chain, std::nullopt, policy),
          check_generator_monotonicity(time_reverse(chain, policy), std::nullopt, policy)};
}

CcpStructure check_ccp_structure(const Ctmc& chain, double tol) {
  const Matrix& q = chain.generator();
  const auto m = q.rows();
  CcpStructure out;
  out.holds = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      lo = std::min(lo, q(i, j));
      hi = std::max(hi, q(i, j));
    }
    out.row_spread.push_back(hi - lo);
    out.row_positive.push_back(lo > 0.0);
    if (!(lo > 0.0) || hi - lo > tol) out.holds = false;
  }
  if (out.holds) {
    for (Eigen::Index i = 0; i < m; ++i) {
      out.alpha.push_back(-q(i, i) / static_cast<double>(m - 1));
    }
  }
  return out;
}

bool is_reversible(const Ctmc& chain, double tol) {
  const Matrix& q = chain.generator();
  const Vector& pi = chain.pi();
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) {
      if (std::abs(pi(i) * q(i, j) - pi(j) * q(j, i)) > tol * scale) return false;
    }
  }
  return true;
}

std::vector<CrossDifference> elementary_cross_differences(std::size_t level_count,
                                                          std::size_t dim) {
  std::vector<CrossDifference> out;
  std::size_t cells = 1;
  for (std::size_t k = 0; k < dim; ++k) cells *= level_count;
  // stride[k]: flat-index step of one level in coordinate k (coordinate 0 most significant).
  std::vector<std::size_t> stride(dim, 1);
  for (std::size_t k = dim; k-- > 1;) stride[k - 1] = stride[k] * level_count;

  for (std::size_t z = 0; z < cells; ++z) {
    for (std::size_t i = 0; i < dim; ++i) {
      if ((z / stride[i]) % level_count + 1 >= level_count) continue;
      for (std::size_t j = i + 1; j < dim; ++j) {
        if ((z / stride[j]) % level_count + 1 >= level_count) continue;
        out.push_back({z, z + stride[i], z + stride[j], z + stride[i] + stride[j]});
      }
    }
  }
  return out;
}

double supermodularity_residual(std::span<const double> phi, std::size_t level_count,
                                std::size_t dim) {
  double worst = 0.0;
  for (const auto& d : elementary_cross_differences(level_count, dim)) {
    worst = std::min(worst, phi[d.plus_ij] + phi[d.base] - phi[d.plus_i] - phi[d.plus_j]);
  }
  return worst;
}

OrderVerdict sm_check(const GridDistribution& x, const GridDistribution& y, double epsilon,
                      const NumericPolicy& policy) {
  if (x.dim() != y.dim() || x.levels() != y.levels()) {
    throw Error(ErrorKind::InvalidArgument, "distributions must share levels and dimension");
  }
  const std::size_t n = x.dim();
  const std::size_t cells = x.cell_count();
  if (cells > policy.lattice_cap) {
    throw Error(ErrorKind::LatticeCapExceeded, "lattice has " + std::to_string(cells) +
                                                   " cells, cap is " +
                                                   std::to_string(policy.lattice_cap));
  }

  OrderVerdict verdict;
  for (std::size_t k = 0; k < n; ++k) {
    const auto mx = x.marginal(k);
    const auto my = y.marginal(k);
    for (std::size_t l = 0; l < mx.size(); ++l) {
      verdict.marginal_gap = std::max(verdict.marginal_gap, std::abs(mx[l] - my[l]));
    }
  }
  if (verdict.marginal_gap > epsilon) {
    verdict.status = OrderStatus::IncomparableMarginals;
    verdict.lp_optimum = std::numeric_limits<double>::quiet_NaN();
    return verdict;
  }

  std::vector<double> diff(cells);
  for (std::size_t z = 0; z < cells; ++z) diff[z] = y.pmf()[z] - x.pmf()[z];

  // Shifted variables u = phi + 1 in [0, 2] put the origin at a feasible vertex:
  //   maximize -diff.u  s.t.  u(z+e_i) + u(z+e_j) - u(z) - u(z+e_i+e_j) <= 0,  u <= 2.
  const auto crosses = elementary_cross_differences(x.level_count(), n);
  const std::size_t rows = crosses.size() + cells;
  std::vector<double> a(rows * cells, 0.0);
  std::vector<double> b(rows, 0.0);
  for (std::size_t r = 0; r < crosses.size(); ++r) {
    const auto& d = crosses[r];
    double* row = &a[r * cells];
    row[d.plus_i] += 1.0;
    row[d.plus_j] += 1.0;
    row[d.base] -= 1.0;
    row[d.plus_ij] -= 1.0;
  }
  for (std::size_t z = 0; z < cells; ++z) {
    a[(crosses.size() + z) * cells + z] = 1.0;
    b[crosses.size() + z] = 2.0;
  }
  std::vector<double> profit(cells);
  for (std::size_t z = 0; z < cells; ++z) profit[z] = -diff[z];

  DenseSimplex lp(std::move(a), std::move(b), std::move(profit));
  const auto solution = lp.solve();
  if (solution.status != DenseSimplex::Status::Optimal) {
    throw Error(ErrorKind::LpFailure, "supermodular LP did not reach an optimum");
  }
  const double residual = lp.feasibility_residual(solution.x);
  if (residual > policy.lp_feasibility_tol) {
    throw Error(ErrorKind::LpFailure,
                "supermodular LP feasibility residual " + std::to_string(residual));
  }
  verdict.pivots = solution.pivots;

  std::vector<double> phi(cells);
  double optimum = 0.0;
  for (std::size_t z = 0; z < cells; ++z) {
    phi[z] = std::clamp(solution.x[z] - 1.0, -1.0, 1.0);
    optimum += diff[z] * phi[z];
  }
  verdict.lp_optimum = optimum;

  if (optimum < -epsilon) {
    if (supermodularity_residual(phi, x.level_count(), n) < -policy.witness_tol) {
      throw Error(ErrorKind::LpFailure, "LP witness fails the supermodularity re-check");
    }
    verdict.status = OrderStatus::Violated;
    verdict.witness = SupermodularWitness{std::move(phi), optimum};
  } else {
    verdict.status = OrderStatus::Ordered;
  }
  return verdict;
}

ScanReport sm_decrease_scan(const Ctmc& chain, const std::vector<double>& c_list,
                            const std::vector<TimeGrid>& grids, double epsilon,
                            std::size_t threads, const NumericPolicy& policy) {
  for (std::size_t k = 0; k < c_list.size(); ++k) {
    if (!(c_list[k] > 0.0)) throw Error(ErrorKind::InvalidModulation, "c values must be positive");
    if (k > 0 && !(c_list[k] > c_list[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "c values must be strictly ascending");
    }
  }
  const std::size_t g = grids.size();
  std::vector<std::optional<GridDistribution>> laws(c_list.size() * g);
  parallel_for(laws.size(), threads, [&](std::size_t idx) {
    laws[idx] = finite_dimensional_law(chain, c_list[idx / g], grids[idx % g], policy);
  });

  ScanReport report;
  const std::size_t pairs = c_list.empty() ? 0 : c_list.size() - 1;
  report.cells.resize(pairs * g);
  parallel_for(report.cells.size(), threads, [&](std::size_t idx) {
    const std::size_t pair = idx / g;
    const std::size_t grid = idx % g;
    ScanCell& cell = report.cells[idx];
    cell.c_low = c_list[pair];
    cell.c_high = c_list[pair + 1];
    cell.grid_index = grid;
    cell.verdict = sm_check(*laws[(pair + 1) * g + grid], *laws[pair * g + grid], epsilon, policy);
  });
  report.all_ordered = std::all_of(report.cells.begin(), report.cells.end(), [](const auto& c) {
    return c.verdict.status == OrderStatus::Ordered;
  });
  return report;
}

}  // namespace coxlab
