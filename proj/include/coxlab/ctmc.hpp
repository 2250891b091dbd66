#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coxlab/error.hpp"
#include "coxlab/policy.hpp"

namespace coxlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite-state continuous-time Markov chain together with the intensity value
/// attached to each state.
///
/// States are held sorted by ascending intensity (ties keep input order), the
/// generator rows sum to zero, the rate graph is strongly connected and the
/// stationary distribution is computed once at construction. Instances are
/// immutable.
///
/// The generator is stored as `rate_scale * base_generator` so that repeated
/// modulation multiplies only the scalar: modulate(modulate(x, a), b) and
/// modulate(x, a * b) produce bit-identical generators for unmodulated x.
class Ctmc {
 public:
  /// Validates `rates` as a generator, re-sorts states by `lambda`, checks
  /// irreducibility and solves for the stationary distribution.
  static Ctmc from_rates(const Matrix& rates, std::vector<double> lambda,
                         std::vector<std::string> labels = {},
                         const NumericPolicy& policy = {});

  std::size_t size() const { return static_cast<std::size_t>(generator_.rows()); }
  const Matrix& generator() const { return generator_; }
  const Matrix& base_generator() const { return base_; }
  double rate_scale() const { return scale_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const Vector& pi() const { return pi_; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// `input_index()[k]` is the position in the original input of sorted state k.
  const std::vector<std::size_t>& input_index() const { return input_index_; }

  /// Largest exit rate max_i |Q_ii|.
  double max_exit_rate() const;
  /// Stationary mean intensity sum_i pi_i lambda_i.
  double mean_intensity() const;

 private:
  friend Ctmc modulate(const Ctmc& chain, double c);
  friend Ctmc time_reverse(const Ctmc& chain, const NumericPolicy& policy);

  Ctmc() = default;

  Matrix base_;
  double scale_ = 1.0;
  Matrix generator_;
  std::vector<double> lambda_;
  Vector pi_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> input_index_;
};

/// Row-stochastic matrix.
class TransitionMatrix {
 public:
  /// Validates entries in [0, 1] and unit row sums within `policy.probability_tol`.
  /// Entries below zero by no more than the tolerance are clamped to zero.
  explicit TransitionMatrix(Matrix p, const NumericPolicy& policy = {});

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  const Matrix& matrix() const { return p_; }
  double operator()(std::size_t i, std::size_t j) const {
    return p_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix p_;
};

/// Strictly increasing observation times.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times, const NumericPolicy& policy = {});

  /// n points 0, spacing, 2*spacing, ...
  static TimeGrid equally_spaced(std::size_t n, double spacing,
                                 const NumericPolicy& policy = {});

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
};

/// Probability mass function on the product lattice levels^dim. Cells are
/// stored row-major with coordinate 0 most significant.
class GridDistribution {
 public:
  GridDistribution(std::vector<double> levels, std::size_t dim, std::vector<double> pmf,
                   const NumericPolicy& policy = {});

  std::size_t dim() const { return dim_; }
  const std::vector<double>& levels() const { return levels_; }
  std::size_t level_count() const { return levels_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  std::size_t cell_count() const { return pmf_.size(); }

  /// Lattice coordinates (level indices) of a flat cell index.
  std::vector<std::size_t> coordinates(std::size_t cell) const;
  std::size_t cell(std::span<const std::size_t> coordinates) const;

  /// Law of coordinate k, indexed by level.
  std::vector<double> marginal(std::size_t k) const;

  /// Same pmf over a different (strictly increasing) level list.
  GridDistribution with_levels(std::vector<double> levels) const;

 private:
  std::vector<double> levels_;
  std::size_t dim_;
  std::vector<double> pmf_;
};

/// Solves pi^T Q = 0, sum(pi) = 1 for a validated irreducible generator.
Vector stationary_distribution(const Matrix& generator, const NumericPolicy& policy = {});

/// Q*_ij = (pi_j / pi_i) Q_ji, carried with the same intensities and rate scale.
Ctmc time_reverse(const Ctmc& chain, const NumericPolicy& policy = {});

/// Time-scaled environment X(ct): generator cQ, same intensities and pi.
Ctmc modulate(const Ctmc& chain, double c);

/// P = I + Q / eta; requires eta >= max_i |Q_ii|.
TransitionMatrix uniformize(const Ctmc& chain, double eta);

/// (1 - c) I + c P for c in (0, 1].
TransitionMatrix dampen(const TransitionMatrix& p, double c);

/// exp(Q t) by the uniformization series, with scaling and squaring for
/// large eta * t.
TransitionMatrix transition_probabilities(const Ctmc& chain, double t,
                                          const NumericPolicy& policy = {});

/// Distinct intensity values of the chain, ascending.
std::vector<double> intensity_levels(const Ctmc& chain);

/// Stationary law of (lambda(c t_1), ..., lambda(c t_n)), states with equal
/// intensity lumped onto one level.
GridDistribution finite_dimensional_law(const Ctmc& chain, double c, const TimeGrid& grid,
                                        const NumericPolicy& policy = {});

}  // namespace coxlab
