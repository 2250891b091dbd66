#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "coxlab/ctmc.hpp"
#include "coxlab/rng.hpp"

namespace coxlab::testing {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline std::vector<double> sorted_uniform(Rng& rng, std::size_t m, double lo, double hi) {
  std::vector<double> v(m);
  for (auto& x : v) x = uniform(rng, lo, hi);
  std::sort(v.begin(), v.end());
  return v;
}

/// Dense generator with Exp(1) off-diagonal rates.
inline Ctmc random_chain(Rng& rng, std::size_t m, double lambda_max = 1.0) {
  const auto n = static_cast<Eigen::Index>(m);
  Matrix q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) q(i, j) = rng.exponential(1.0) + 1e-3;
    }
    q(i, i) = -q.row(i).sum();
  }
  return Ctmc::from_rates(q, sorted_uniform(rng, m, 0.0, lambda_max));
}

inline Ctmc two_state(double a, double b, double lambda0, double lambda1) {
  Matrix q(2, 2);
  q << -a, a, b, -b;
  return Ctmc::from_rates(q, {lambda0, lambda1});
}

inline Ctmc random_two_state(Rng& rng, double lambda_max) {
  const auto lambda = sorted_uniform(rng, 2, 0.0, lambda_max);
  return two_state(uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0), lambda[0], lambda[1]);
}

/// Tridiagonal generator: up rates `up[i]` (i -> i+1), down rates `down[i]` (i+1 -> i).
inline Ctmc birth_death(const std::vector<double>& up, const std::vector<double>& down,
                        std::vector<double> lambda) {
  const auto n = static_cast<Eigen::Index>(lambda.size());
  Matrix q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    q(i, i + 1) = up[static_cast<std::size_t>(i)];
    q(i + 1, i) = down[static_cast<std::size_t>(i)];
  }
  for (Eigen::Index i = 0; i < n; ++i) q(i, i) = -q.row(i).sum() + q(i, i);
  return Ctmc::from_rates(q, std::move(lambda));
}

inline Ctmc random_birth_death(Rng& rng, std::size_t m, double lambda_max) {
  std::vector<double> up(m - 1);
  std::vector<double> down(m - 1);
  for (auto& x : up) x = uniform(rng, 0.2, 2.0);
  for (auto& x : down) x = uniform(rng, 0.2, 2.0);
  return birth_death(up, down, sorted_uniform(rng, m, 0.0, lambda_max));
}

/// Unidirectional cycle 0 -> 1 -> 2 -> 0 at rate 1.
inline Ctmc three_cycle(std::vector<double> lambda = {0.0, 1.0, 2.0}) {
  Matrix q(3, 3);
  q << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  return Ctmc::from_rates(q, std::move(lambda));
}

}  // namespace coxlab::testing
