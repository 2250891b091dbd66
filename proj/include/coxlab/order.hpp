#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "coxlab/ctmc.hpp"

namespace coxlab {

// ---------------------------------------------------------------------------
// Strong-order stochastic monotonicity

struct MonotonicityViolation {
  std::size_t row = 0;        // rows (row, row + 1) are compared
  std::size_t threshold = 0;  // tail sums over columns >= threshold
  double gap = 0.0;           // tail(row + 1) - tail(row), negative
};

struct MonotonicityReport {
  bool monotone = true;
  std::vector<MonotonicityViolation> violations;
};

/// Rows of P must increase in the strong stochastic order: for every adjacent
/// pair i, i+1 and threshold k, sum_{j>=k} P_{i+1,j} >= sum_{j>=k} P_{i,j}.
MonotonicityReport check_stochastic_monotonicity(const TransitionMatrix& p,
                                                 const NumericPolicy& policy = {});

/// Smallest uniformization rate at which the discrete check on I + Q/eta is
/// equivalent to monotonicity of the generator: twice the largest exit rate.
double monotone_uniformization_rate(const Ctmc& chain);

/// Monotonicity of the generator, checked on I + Q/eta. `eta` defaults to
/// monotone_uniformization_rate(chain); any eta at or above that value gives
/// the same verdict.
MonotonicityReport check_generator_monotonicity(const Ctmc& chain,
                                                std::optional<double> eta = std::nullopt,
                                                const NumericPolicy& policy = {});

/// Reports for Q and for its time reversal Q*.
std::pair<MonotonicityReport, MonotonicityReport> check_doubly_monotone(
    const Ctmc& chain, const NumericPolicy& policy = {});

struct CcpStructure {
  bool holds = false;
  std::vector<double> alpha;       // filled when `holds`
  std::vector<double> row_spread;  // max - min of each row's off-diagonals
  std::vector<bool> row_positive;
};

/// Whether every row's off-diagonal rates equal one positive constant alpha_i.
CcpStructure check_ccp_structure(const Ctmc& chain, double tol = 1e-12);

/// pi_i Q_ij == pi_j Q_ji for all pairs, relative to the largest rate.
bool is_reversible(const Ctmc& chain, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Supermodular order

struct SupermodularWitness {
  std::vector<double> phi;  // on the lattice, same cell layout as GridDistribution
  double objective = 0.0;   // E_Y phi - E_X phi
};

enum class OrderStatus { Ordered, Violated, IncomparableMarginals };

std::string_view to_string(OrderStatus status);

struct OrderVerdict {
  OrderStatus status = OrderStatus::Ordered;
  double lp_optimum = 0.0;  // NaN when short-circuited on marginals
  std::optional<SupermodularWitness> witness;
  double marginal_gap = 0.0;  // largest coordinatewise marginal difference
  std::size_t pivots = 0;
};

/// Elementary supermodularity inequalities on levels^dim, in lexicographic
/// order over (z, i < j): phi(z+e_i+e_j) + phi(z) - phi(z+e_i) - phi(z+e_j) >= 0.
struct CrossDifference {
  std::size_t base, plus_i, plus_j, plus_ij;
};
std::vector<CrossDifference> elementary_cross_differences(std::size_t level_count,
                                                          std::size_t dim);

/// Most negative elementary cross difference of phi (0 when supermodular).
double supermodularity_residual(std::span<const double> phi, std::size_t level_count,
                                std::size_t dim);

/// Decides X <=_sm Y on the shared lattice: equal marginals, then the LP
/// minimize sum_z (p_Y - p_X)(z) phi(z) over supermodular phi in [-1, 1].
OrderVerdict sm_check(const GridDistribution& x, const GridDistribution& y,
                      double epsilon = 1e-9, const NumericPolicy& policy = {});

struct ScanCell {
  double c_low = 0.0;
  double c_high = 0.0;
  std::size_t grid_index = 0;
  OrderVerdict verdict;
};

struct ScanReport {
  bool all_ordered = true;
  std::vector<ScanCell> cells;  // c-pair major, grid minor
};

/// For adjacent c_low < c_high and every grid, checks
/// law(c_high) <=_sm law(c_low). Cells may be evaluated on `threads` workers;
/// the result is independent of the thread count.
ScanReport sm_decrease_scan(const Ctmc& chain, const std::vector<double>& c_list,
                            const std::vector<TimeGrid>& grids, double epsilon = 1e-9,
                            std::size_t threads = 1, const NumericPolicy& policy = {});

// ---------------------------------------------------------------------------
// Randomized search

struct RateSampler {
  enum class Family { Exponential, TwoPoint };
  Family family = Family::Exponential;
  double rate = 1.0;        // Exponential: mean 1/rate
  double low = 0.0;         // TwoPoint: value `low` with prob. 1 - p_high
  double high = 1.0;        // TwoPoint: value `high` with prob. p_high
  double p_high = 0.5;
  double lambda_max = 1.0;  // intensities: sorted Uniform(0, lambda_max)
};

struct PlantedChain {
  std::uint64_t sample_index = 0;
  Ctmc chain;
};

struct SearchConfig {
  std::size_t states = 3;
  std::vector<double> c_list{0.5, 1.0, 2.0, 4.0};
  std::vector<TimeGrid> grids;
  RateSampler sampler;
  std::uint64_t budget = 100;
  std::uint64_t seed = 0;
  double epsilon = 1e-9;
  std::vector<PlantedChain> planted;
};

struct SearchSample {
  std::uint64_t sample_index = 0;
  Ctmc chain;
  MonotonicityReport monotonicity;
  std::pair<MonotonicityReport, MonotonicityReport> doubly;
  bool ccp = false;
  ScanReport scan;
};

struct SearchResult {
  // Not generator-monotone, yet every scanned cell Ordered.
  std::vector<SearchSample> candidates;
  // Any chain with a Violated cell.
  std::vector<SearchSample> violations;
  std::uint64_t samples_tried = 0;
  std::uint64_t rejected_reducible = 0;
};

/// Draws one chain from the sampler; nullopt when the draw is reducible.
std::optional<Ctmc> sample_chain(std::size_t states, const RateSampler& sampler,
                                 std::uint64_t seed, std::uint64_t sample_index);

/// Deterministic in `config.seed`; `threads` does not affect the result.
SearchResult counterexample_search(const SearchConfig& config, std::size_t threads = 1,
                                   const NumericPolicy& policy = {});

}  // namespace coxlab
