#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "coxlab/ctmc.hpp"
#include "coxlab/service.hpp"

namespace coxlab {

/// Single-server FCFS queue fed by Poisson arrivals at rate lambda(X(ct)),
/// X the baseline chain, with IID service times.
struct QueueSpec {
  Ctmc chain;
  double c = 1.0;
  ServiceDistribution service;
};

struct Stability {
  bool stable = false;
  double rho = 0.0;
  double lambda_bar = 0.0;
};

/// rho = lambda_bar * E[S]; independent of c.
Stability stability_check(const QueueSpec& spec);

enum class WorkloadMethod { QbdExact, Simulation };
std::string_view to_string(WorkloadMethod method);

struct WorkloadEstimate {
  double value = 0.0;       // mean stationary workload
  double half_width = 0.0;  // 95% CI half-width, 0 for exact values
  WorkloadMethod method = WorkloadMethod::QbdExact;
  std::size_t iterations = 0;  // QBD iterations
  std::size_t batches = 0;     // simulation batches
  // Customer-average waiting time (Lindley recursion); simulation only.
  double waiting_time = 0.0;
  double waiting_half_width = 0.0;
  std::uint64_t arrivals = 0;
  double simulated_time = 0.0;
  bool diverging = false;
};

// ---------------------------------------------------------------------------
// Matrix-geometric solution for exponential service

enum class QbdAlgorithm { LogarithmicReduction, FunctionalIteration };

struct QbdSolution {
  Matrix rate_matrix;  // minimal nonnegative R
  Vector boundary;     // stationary vector of level 0
  double mean_queue_length = 0.0;
  double spectral_radius = 0.0;
  std::size_t iterations = 0;
};

/// Level = number in system, phase = environment state. Throws Unstable,
/// NotExponentialService or NoConvergence.
QbdSolution qbd_solve(const QueueSpec& spec,
                      QbdAlgorithm algorithm = QbdAlgorithm::LogarithmicReduction,
                      const NumericPolicy& policy = {});

/// E[N] / mu: with exponential service every customer present holds an
/// Exp(mu) amount of remaining work.
WorkloadEstimate qbd_mean_workload(const QueueSpec& spec,
                                   QbdAlgorithm algorithm = QbdAlgorithm::LogarithmicReduction,
                                   const NumericPolicy& policy = {});

// ---------------------------------------------------------------------------
// Discrete-event simulation

struct Horizon {
  enum class Kind { Arrivals, Time };
  Kind kind = Kind::Arrivals;
  double amount = 1e6;
};

struct SimulationOptions {
  Horizon horizon;
  std::size_t batches = 32;
  double warmup = 0.1;
  std::uint64_t seed = 0;
  bool allow_unstable = false;
};

/// Time-average workload by exact piecewise-linear integration, with a
/// batch-means Student-t interval. Environment, arrival and service variates
/// come from independent substreams of `options.seed`.
WorkloadEstimate simulate_mean_workload(const QueueSpec& spec, const SimulationOptions& options);

/// Two-sided 95% Student-t quantile.
double student_t_975(std::size_t degrees_of_freedom);

// ---------------------------------------------------------------------------
// Bounds and curves

/// Mean M/G/1 waiting time (equal to the mean workload) at arrival rate
/// `lambda`; +inf when lambda * E[S] >= 1.
double pollaczek_khinchine(double lambda, const ServiceDistribution& service);

struct RolskiBounds {
  // Constant-rate (fully averaged) environment.
  double workload_lower = 0.0;
  // Frozen environment: mixture of M/G/1 queues at rate lambda_i, weights pi_i.
  double workload_upper = 0.0;
  double waiting_lower = 0.0;
  // Frozen environment seen by arrivals: weights pi_i lambda_i / lambda_bar.
  double waiting_upper = 0.0;
  double lambda_bar = 0.0;
  double rho = 0.0;
};

RolskiBounds rolski_bounds(const QueueSpec& spec);

enum class CurveMethod { Auto, Qbd, Sim };
enum class CurveVerdict { Decreasing, ViolationSuspected };
std::string_view to_string(CurveVerdict verdict);

struct CurvePoint {
  double c = 0.0;
  WorkloadEstimate estimate;
  bool pair_flag = false;  // w(previous c) < w(this c) - slack
};

struct WorkloadCurve {
  std::vector<CurvePoint> points;
  CurveVerdict verdict = CurveVerdict::Decreasing;
  std::optional<std::size_t> first_violation;  // index of the later point of the pair
};

/// Evaluates w(c) over an ascending c_list. Simulation points use seeds
/// derived from (options.seed, point index), so results do not depend on
/// `threads`.
WorkloadCurve w_curve(const Ctmc& chain, const ServiceDistribution& service,
                      const std::vector<double>& c_list, CurveMethod method = CurveMethod::Auto,
                      const SimulationOptions& options = {}, std::size_t threads = 1,
                      const NumericPolicy& policy = {});

}  // namespace coxlab
