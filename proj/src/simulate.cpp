#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "coxlab/queue.hpp"

namespace coxlab {

double student_t_975(std::size_t degrees_of_freedom) {
  boost::math::students_t dist(static_cast<double>(degrees_of_freedom));
  return boost::math::quantile(dist, 0.975);
}

namespace {

struct BatchAccumulator {
  std::vector<double> area;
  std::vector<double> duration;
  std::vector<double> waiting;
  std::vector<double> customers;

  explicit BatchAccumulator(std::size_t batches)
      : area(batches, 0.0), duration(batches, 0.0), waiting(batches, 0.0), customers(batches, 0.0) {}
};

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

// Ratio point estimate with a batch-means half-width.
Interval batch_interval(const std::vector<double>& num, const std::vector<double>& den) {
  const std::size_t b = num.size();
  double total_num = 0.0;
  double total_den = 0.0;
  std::vector<double> means;
  for (std::size_t k = 0; k < b; ++k) {
    total_num += num[k];
    total_den += den[k];
    if (den[k] > 0.0) means.push_back(num[k] / den[k]);
  }
  Interval out;
  out.mean = total_den > 0.0 ? total_num / total_den : 0.0;
  if (means.size() < 2) {
    out.half_width = std::numeric_limits<double>::infinity();
    return out;
  }
  double avg = 0.0;
  for (double v : means) avg += v;
  avg /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - avg) * (v - avg);
  const double sd = std::sqrt(ss / static_cast<double>(means.size() - 1));
  out.half_width = student_t_975(means.size() - 1) * sd / std::sqrt(static_cast<double>(means.size()));
  return out;
}

}  // namespace

WorkloadEstimate simulate_mean_workload(const QueueSpec& spec, const SimulationOptions& options) {
  validate(spec.service);
  if (!(spec.c > 0.0)) throw Error(ErrorKind::InvalidModulation, "c must be positive");
  if (options.batches < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 batches");
  if (!(options.warmup >= 0.0 && options.warmup < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warm-up fraction must lie in [0, 1)");
  }
  if (!(options.horizon.amount > 0.0) || !std::isfinite(options.horizon.amount)) {
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive and finite");
  }
  const Stability stab = stability_check(spec);
  if (!stab.stable && !options.allow_unstable) {
    throw Error(ErrorKind::UnstableWithoutOverride,
                "traffic intensity " + std::to_string(stab.rho) + " >= 1; pass the override to simulate");
  }

  const bool by_arrivals = options.horizon.kind == Horizon::Kind::Arrivals;
  const double horizon = by_arrivals ? std::floor(options.horizon.amount) : options.horizon.amount;
  const double warm =
      by_arrivals ? std::floor(options.warmup * horizon) : options.warmup * horizon;
  const std::size_t batches = options.batches;
  const double batch_size = (horizon - warm) / static_cast<double>(batches);
  if (by_arrivals && horizon - warm < static_cast<double>(batches)) {
    throw Error(ErrorKind::InvalidArgument, "horizon too short for the batch count");
  }

  const Ctmc env = modulate(spec.chain, spec.c);
  const Matrix& q = env.generator();
  const auto& lambda = env.lambda();
  const auto m = static_cast<Eigen::Index>(env.size());

  Rng env_rng(derive_seed(options.seed, kEnvironmentStream));
  Rng arrival_rng(derive_seed(options.seed, kArrivalStream));
  Rng service_rng(derive_seed(options.seed, kServiceStream));

  // Stationary start of the environment.
  Eigen::Index state = m - 1;
  {
    const double u = env_rng.uniform();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      acc += env.pi()(i);
      if (u < acc) {
        state = i;
        break;
      }
    }
  }

  BatchAccumulator acc(batches);
  double now = 0.0;
  double workload = 0.0;
  double lindley_wait = 0.0;      // W_k
  double last_service = 0.0;      // S_k
  double last_arrival = 0.0;      // epoch of arrival k
  std::uint64_t arrivals = 0;
  // Integrated intensity still to run before the next arrival.
  double arrival_clock = arrival_rng.exponential(1.0);
  double next_switch = now + env_rng.exponential(-q(state, state));

  // Measurement progress: arrival count or elapsed time.
  auto batch_of = [&](double progress) -> std::ptrdiff_t {
    if (progress < warm) return -1;
    const auto k = static_cast<std::ptrdiff_t>((progress - warm) / batch_size);
    return std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(batches) - 1);
  };

  auto integrate = [&](double dt, std::ptrdiff_t batch) {
    double area;
    if (workload >= dt) {
      area = workload * dt - 0.5 * dt * dt;
      workload -= dt;
    } else {
      area = 0.5 * workload * workload;
      workload = 0.0;
    }
    if (batch >= 0) {
      acc.area[static_cast<std::size_t>(batch)] += area;
      acc.duration[static_cast<std::size_t>(batch)] += dt;
    }
  };

  // Advances the clock to `target`, splitting at time-batch boundaries.
  auto advance_to = [&](double target) {
    while (now < target) {
      double stop = target;
      if (!by_arrivals) {
        const std::ptrdiff_t b = batch_of(now);
        const double boundary = b < 0 ? warm : warm + static_cast<double>(b + 1) * batch_size;
        if (boundary > now && boundary < stop) stop = boundary;
      }
      const std::ptrdiff_t b = by_arrivals ? batch_of(static_cast<double>(arrivals)) : batch_of(now);
      integrate(stop - now, b);
      now = stop;
    }
  };

  auto finished = [&] {
    return by_arrivals ? static_cast<double>(arrivals) >= horizon : now >= horizon;
  };

  while (!finished()) {
    const double rate = lambda[static_cast<std::size_t>(state)];
    const double to_arrival = rate > 0.0 ? arrival_clock / rate : std::numeric_limits<double>::infinity();
    const double arrival_time = now + to_arrival;
    const double limit = by_arrivals ? std::numeric_limits<double>::infinity() : horizon;

    if (arrival_time < next_switch && arrival_time <= limit) {
      advance_to(arrival_time);
      // Lindley: W_{k+1} = max(W_k + S_k - A_k, 0).
      if (arrivals > 0) {
        lindley_wait = std::max(lindley_wait + last_service - (now - last_arrival), 0.0);
      } else {
        lindley_wait = workload;
      }
      const double service = sample(spec.service, service_rng);
      const std::ptrdiff_t b =
          by_arrivals ? batch_of(static_cast<double>(arrivals)) : batch_of(now);
      if (b >= 0) {
        acc.waiting[static_cast<std::size_t>(b)] += lindley_wait;
        acc.customers[static_cast<std::size_t>(b)] += 1.0;
      }
      workload += service;
      last_service = service;
      last_arrival = now;
      ++arrivals;
      arrival_clock = arrival_rng.exponential(1.0);
    } else if (next_switch <= limit) {
      arrival_clock -= rate * (next_switch - now);
      advance_to(next_switch);
      const double exit = -q(state, state);
      const double u = env_rng.uniform() * exit;
      double cum = 0.0;
      Eigen::Index target = state;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == state || q(state, j) <= 0.0) continue;
        cum += q(state, j);
        target = j;
        if (u < cum) break;
      }
      state = target;
      next_switch = now + env_rng.exponential(-q(state, state));
    } else {
      advance_to(horizon);
    }
  }

  const Interval work = batch_interval(acc.area, acc.duration);
  const Interval wait = batch_interval(acc.waiting, acc.customers);
  WorkloadEstimate est;
  est.value = work.mean;
  est.half_width = work.half_width;
  est.method = WorkloadMethod::Simulation;
  est.batches = batches;
  est.waiting_time = wait.mean;
  est.waiting_half_width = wait.half_width;
  est.arrivals = arrivals;
  est.simulated_time = now;
  est.diverging = !stab.stable;
  return est;
}

}  // namespace coxlab
