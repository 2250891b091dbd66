#include "coxlab/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace coxlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAGenerator: return "NotAGenerator";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::InvalidModulation: return "InvalidModulation";
    case ErrorKind::EtaTooSmall: return "EtaTooSmall";
    case ErrorKind::InvalidDampening: return "InvalidDampening";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::LatticeCapExceeded: return "LatticeCapExceeded";
    case ErrorKind::LpFailure: return "LpFailure";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::UnstableWithoutOverride: return "UnstableWithoutOverride";
    case ErrorKind::NotExponentialService: return "NotExponentialService";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

namespace {

void require_strongly_connected(const Matrix& q) {
  const Eigen::Index m = q.rows();
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < m; ++j) {
        const double rate = forward ? q(i, j) : q(j, i);
        if (j != i && rate > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == m;
  };
  if (!reach_all(true) || !reach_all(false)) {
    throw Error(ErrorKind::NotIrreducible,
                "rate graph is not strongly connected (more than one communicating class)");
  }
}

void check_generator(const Matrix& q, double rel_tol) {
  if (q.rows() != q.cols() || q.rows() < 1) {
    throw Error(ErrorKind::NotAGenerator, "generator must be a non-empty square matrix");
  }
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double sum = 0.0;
    double scale = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const double v = q(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NotAGenerator, "row " + std::to_string(i) + " has a non-finite entry");
      }
      if (j != i && v < 0.0) {
        std::ostringstream os;
        os << "row " << i << " has negative off-diagonal rate " << v << " in column " << j;
        throw Error(ErrorKind::NotAGenerator, os.str());
      }
      sum += v;
      scale = std::max(scale, std::abs(v));
    }
    if (std::abs(sum) > rel_tol * std::max(scale, 1.0)) {
      std::ostringstream os;
      os << "row " << i << " sums to " << sum << " instead of 0";
      throw Error(ErrorKind::NotAGenerator, os.str());
    }
  }
}

// Diagonal re-derived from the off-diagonals so rows sum to zero.
void normalize_diagonal(Matrix& q) {
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      if (j != i) off += q(i, j);
    }
    q(i, i) = -off;
  }
}

Vector solve_stationary(const Matrix& q, const NumericPolicy& policy) {
  const Eigen::Index m = q.rows();
  Matrix a = q.transpose();
  a.row(m - 1).setOnes();
  Vector b = Vector::Zero(m);
  b(m - 1) = 1.0;
  Vector pi = a.fullPivLu().solve(b);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  pi /= pi.sum();

  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  const double residual = (pi.transpose() * q).cwiseAbs().maxCoeff();
  if (!(residual <= policy.stationary_residual_tol * scale)) {
    throw Error(ErrorKind::NotIrreducible,
                "stationary solve residual " + std::to_string(residual) + " exceeds tolerance");
  }
  return pi;
}

}  // namespace

Vector stationary_distribution(const Matrix& generator, const NumericPolicy& policy) {
  check_generator(generator, policy.input_row_sum_rel_tol);
  if (generator.rows() > static_cast<Eigen::Index>(policy.max_states)) {
    throw Error(ErrorKind::DimensionCapExceeded, "state count above cap");
  }
  if (generator.rows() == 1) return Vector::Ones(1);
  require_strongly_connected(generator);
  return solve_stationary(generator, policy);
}

Ctmc Ctmc::from_rates(const Matrix& rates, std::vector<double> lambda,
                      std::vector<std::string> labels, const NumericPolicy& policy) {
  check_generator(rates, policy.input_row_sum_rel_tol);
  const auto m = static_cast<std::size_t>(rates.rows());
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "a chain needs at least 2 states");
  if (m > policy.max_states) {
    throw Error(ErrorKind::DimensionCapExceeded,
                "state count " + std::to_string(m) + " above cap " + std::to_string(policy.max_states));
  }
  if (lambda.size() != m) {
    throw Error(ErrorKind::InvalidArgument, "intensity vector length does not match generator");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(lambda[i]) || lambda[i] < 0.0) {
      throw Error(ErrorKind::InvalidArgument,
                  "intensity of state " + std::to_string(i) + " must be finite and >= 0");
    }
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < m; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != m) throw Error(ErrorKind::InvalidArgument, "label count mismatch");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambda[a] < lambda[b]; });

  Ctmc chain;
  chain.base_.resize(rates.rows(), rates.cols());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      chain.base_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rates(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(order[j]));
    }
    chain.lambda_.push_back(lambda[order[i]]);
    chain.labels_.push_back(labels[order[i]]);
  }
  normalize_diagonal(chain.base_);
  chain.input_index_ = order;
  chain.scale_ = 1.0;
  chain.generator_ = chain.base_;
  require_strongly_connected(chain.generator_);
  chain.pi_ = solve_stationary(chain.generator_, policy);
  return chain;
}

double Ctmc::max_exit_rate() const { return (-generator_.diagonal()).maxCoeff(); }

double Ctmc::mean_intensity() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda_.size(); ++i) sum += pi_(static_cast<Eigen::Index>(i)) * lambda_[i];
  return sum;
}

Ctmc modulate(const Ctmc& chain, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::InvalidModulation, "modulation rate must be positive and finite");
  }
  Ctmc out = chain;
  out.scale_ = chain.scale_ * c;
  out.generator_ = out.scale_ * chain.base_;
  return out;
}

Ctmc time_reverse(const Ctmc& chain, const NumericPolicy& policy) {
  const Vector& pi = chain.pi_;
  const Eigen::Index m = pi.size();
  if (pi.minCoeff() <= 0.0) {
    throw Error(ErrorKind::NotIrreducible, "time reversal needs a strictly positive pi");
  }
  Matrix rev(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      rev(i, j) = (i == j) ? chain.base_(i, i) : pi(j) / pi(i) * chain.base_(j, i);
    }
  }
  Ctmc out = chain;
  out.base_ = rev;
  out.generator_ = out.scale_ * rev;
  // Same stationary law; verified rather than re-solved.
  const double scale = std::max(1.0, rev.cwiseAbs().maxCoeff());
  const double residual = (pi.transpose() * rev).cwiseAbs().maxCoeff();
  if (!(residual <= policy.stationary_residual_tol * scale)) {
    throw Error(ErrorKind::NotIrreducible, "reversed generator does not preserve pi");
  }
  return out;
}

TransitionMatrix::TransitionMatrix(Matrix p, const NumericPolicy& policy) : p_(std::move(p)) {
  if (p_.rows() != p_.cols() || p_.rows() < 1) {
    throw Error(ErrorKind::InvalidArgument, "transition matrix must be non-empty and square");
  }
  const double tol = policy.probability_tol;
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      double& v = p_(i, j);
      if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) {
        throw Error(ErrorKind::InvalidArgument, "transition probability out of [0,1] in row " +
                                                    std::to_string(i));
      }
      v = std::clamp(v, 0.0, 1.0);
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw Error(ErrorKind::InvalidArgument,
                  "row " + std::to_string(i) + " of transition matrix does not sum to 1");
    }
  }
}

TransitionMatrix uniformize(const Ctmc& chain, double eta) {
  const Matrix& q = chain.generator();
  if (!(eta >= chain.max_exit_rate()) || !std::isfinite(eta)) {
    throw Error(ErrorKind::EtaTooSmall, "uniformization rate below max exit rate");
  }
  Matrix p = q / eta;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (j != i) off += p(i, j);
    }
    p(i, i) = std::max(0.0, 1.0 - off);
  }
  return TransitionMatrix(std::move(p));
}

TransitionMatrix dampen(const TransitionMatrix& p, double c) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw Error(ErrorKind::InvalidDampening, "dampening factor must lie in (0, 1]");
  }
  if (c == 1.0) return p;
  Matrix out = c * p.matrix();
  out.diagonal().array() += 1.0 - c;
  return TransitionMatrix(std::move(out));
}

namespace {

void normalize_rows(Matrix& p) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p.row(i) /= p.row(i).sum();
  }
}

}  // namespace

TransitionMatrix transition_probabilities(const Ctmc& chain, double t,
                                          const NumericPolicy& policy) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "time must be finite and nonnegative");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(chain.size());
  if (t == 0.0) return TransitionMatrix(Matrix::Identity(m, m));

  const double eta = chain.max_exit_rate();
  double x = eta * t;
  int squarings = 0;
  while (x > policy.series_max_argument) {
    x *= 0.5;
    ++squarings;
  }

  Matrix step = chain.generator() / eta;
  step.diagonal().array() += 1.0;
  step = step.cwiseMax(0.0);

  // sum_k e^{-x} x^k / k! * step^k until the Poisson tail drops below threshold.
  double weight = std::exp(-x);
  double mass = weight;
  Matrix power = Matrix::Identity(m, m);
  Matrix sum = weight * power;
  const double max_terms = x + 50.0 + 20.0 * std::sqrt(x);
  for (int k = 1; 1.0 - mass >= policy.poisson_tail && k < max_terms; ++k) {
    weight *= x / k;
    power = power * step;
    sum += weight * power;
    mass += weight;
  }
  normalize_rows(sum);
  for (int s = 0; s < squarings; ++s) {
    sum = sum * sum;
    normalize_rows(sum);
  }
  return TransitionMatrix(std::move(sum), policy);
}

TimeGrid::TimeGrid(std::vector<double> times, const NumericPolicy& policy)
    : times_(std::move(times)) {
  if (times_.empty()) throw Error(ErrorKind::InvalidArgument, "time grid needs at least one point");
  if (times_.size() > policy.dim_cap) {
    throw Error(ErrorKind::DimensionCapExceeded, "time grid has " + std::to_string(times_.size()) +
                                                     " points, cap is " +
                                                     std::to_string(policy.dim_cap));
  }
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) throw Error(ErrorKind::InvalidArgument, "non-finite grid time");
    if (k > 0 && !(times_[k] > times_[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "grid times must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::equally_spaced(std::size_t n, double spacing, const NumericPolicy& policy) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * spacing;
  return TimeGrid(std::move(t), policy);
}

GridDistribution::GridDistribution(std::vector<double> levels, std::size_t dim,
                                   std::vector<double> pmf, const NumericPolicy& policy)
    : levels_(std::move(levels)), dim_(dim), pmf_(std::move(pmf)) {
  if (levels_.empty() || dim_ == 0) {
    throw Error(ErrorKind::InvalidArgument, "grid distribution needs levels and dimension >= 1");
  }
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    if (!(levels_[k] > levels_[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "levels must be strictly increasing");
    }
  }
  std::size_t cells = 1;
  for (std::size_t k = 0; k < dim_; ++k) cells *= levels_.size();
  if (pmf_.size() != cells) {
    throw Error(ErrorKind::InvalidArgument, "pmf has " + std::to_string(pmf_.size()) +
                                                " cells, lattice has " + std::to_string(cells));
  }
  double total = 0.0;
  for (double& p : pmf_) {
    if (!std::isfinite(p) || p < -policy.pmf_sum_tol) {
      throw Error(ErrorKind::InvalidArgument, "pmf entries must be nonnegative");
    }
    p = std::max(p, 0.0);
    total += p;
  }
  if (std::abs(total - 1.0) > policy.pmf_sum_tol) {
    throw Error(ErrorKind::InvalidArgument, "pmf sums to " + std::to_string(total));
  }
}

std::vector<std::size_t> GridDistribution::coordinates(std::size_t cell) const {
  std::vector<std::size_t> z(dim_);
  const std::size_t l = levels_.size();
  for (std::size_t k = dim_; k-- > 0;) {
    z[k] = cell % l;
    cell /= l;
  }
  return z;
}

std::size_t GridDistribution::cell(std::span<const std::size_t> coordinates) const {
  std::size_t index = 0;
  for (std::size_t z : coordinates) index = index * levels_.size() + z;
  return index;
}

std::vector<double> GridDistribution::marginal(std::size_t k) const {
  std::vector<double> out(levels_.size(), 0.0);
  for (std::size_t c = 0; c < pmf_.size(); ++c) out[coordinates(c)[k]] += pmf_[c];
  return out;
}

GridDistribution GridDistribution::with_levels(std::vector<double> levels) const {
  if (levels.size() != levels_.size()) {
    throw Error(ErrorKind::InvalidArgument, "relabeling must keep the level count");
  }
  return GridDistribution(std::move(levels), dim_, pmf_);
}

std::vector<double> intensity_levels(const Ctmc& chain) {
  std::vector<double> levels = chain.lambda();
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

GridDistribution finite_dimensional_law(const Ctmc& chain, double c, const TimeGrid& grid,
                                        const NumericPolicy& policy) {
  const std::size_t n = grid.size();
  if (n > policy.dim_cap) {
    throw Error(ErrorKind::DimensionCapExceeded, "grid dimension above cap");
  }
  const Ctmc env = modulate(chain, c);
  const std::vector<double> levels = intensity_levels(chain);
  const std::size_t l = levels.size();
  const std::size_t m = chain.size();

  std::size_t cells = 1;
  for (std::size_t k = 0; k < n; ++k) {
    cells *= l;
    if (cells > policy.law_cell_cap) {
      throw Error(ErrorKind::DimensionCapExceeded, "lattice too large for finite-dimensional law");
    }
  }

  std::vector<std::size_t> level_of(m);
  for (std::size_t s = 0; s < m; ++s) {
    level_of[s] = static_cast<std::size_t>(
        std::lower_bound(levels.begin(), levels.end(), chain.lambda()[s]) - levels.begin());
  }

  // Forward recursion over level prefixes; each prefix carries the joint mass
  // of (prefix, current hidden state).
  std::vector<Vector> alpha(l, Vector::Zero(static_cast<Eigen::Index>(m)));
  for (std::size_t s = 0; s < m; ++s) {
    alpha[level_of[s]](static_cast<Eigen::Index>(s)) = chain.pi()(static_cast<Eigen::Index>(s));
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = grid.times()[k] - grid.times()[k - 1];
    const Matrix p = transition_probabilities(env, dt, policy).matrix();
    std::vector<Vector> next(alpha.size() * l, Vector::Zero(static_cast<Eigen::Index>(m)));
    for (std::size_t prefix = 0; prefix < alpha.size(); ++prefix) {
      const Vector moved = (alpha[prefix].transpose() * p).transpose();
      for (std::size_t s = 0; s < m; ++s) {
        next[prefix * l + level_of[s]](static_cast<Eigen::Index>(s)) =
            moved(static_cast<Eigen::Index>(s));
      }
    }
    alpha = std::move(next);
  }

  std::vector<double> pmf(alpha.size());
  for (std::size_t cell = 0; cell < alpha.size(); ++cell) pmf[cell] = alpha[cell].sum();
  return GridDistribution(levels, n, std::move(pmf), policy);
}

}  // namespace coxlab
