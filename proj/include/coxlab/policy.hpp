#pragma once

#include <cstddef>

namespace coxlab {

/// Every numeric tolerance and size cap used by the library, in one place.
/// Functions take a policy by const reference and default to `NumericPolicy{}`.
struct NumericPolicy {
  // Generator validation on input: row sums must vanish within this fraction
  // of the row's largest rate. The diagonal is then re-derived from the
  // off-diagonals so the stored rows sum to zero within `row_sum_tol`.
  double input_row_sum_rel_tol = 1e-9;
  double row_sum_tol = 1e-12;
  double stationary_residual_tol = 1e-10;
  double probability_tol = 1e-12;
  double pmf_sum_tol = 1e-10;
  double poisson_tail = 1e-13;
  // Uniformization series are evaluated directly up to this value of eta*t;
  // larger arguments go through scaling and squaring.
  double series_max_argument = 64.0;

  std::size_t max_states = 64;
  std::size_t dim_cap = 4;
  std::size_t lattice_cap = 625;  // 5^4
  std::size_t law_cell_cap = std::size_t{1} << 20;

  double sm_epsilon = 1e-9;
  double monotonicity_tol = 1e-12;
  double witness_tol = 1e-9;
  double lp_feasibility_tol = 1e-10;

  double qbd_tol = 1e-13;
  std::size_t qbd_max_iterations = 1'000'000;
  double curve_exact_slack = 1e-8;
};

}  // namespace coxlab
