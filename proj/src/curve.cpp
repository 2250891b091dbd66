#include <cmath>
#include <limits>

#include "coxlab/parallel.hpp"
#include "coxlab/queue.hpp"

namespace coxlab {

std::string_view to_string(CurveVerdict verdict) {
  return verdict == CurveVerdict::Decreasing ? "Decreasing" : "ViolationSuspected";
}

double pollaczek_khinchine(double lambda, const ServiceDistribution& service) {
  const double rho = lambda * mean(service);
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return lambda * second_moment(service) / (2.0 * (1.0 - rho));
}

RolskiBounds rolski_bounds(const QueueSpec& spec) {
  const Stability stab = stability_check(spec);
  RolskiBounds out;
  out.lambda_bar = stab.lambda_bar;
  out.rho = stab.rho;
  out.workload_lower = pollaczek_khinchine(stab.lambda_bar, spec.service);
  out.waiting_lower = out.workload_lower;

  const auto& lambda = spec.chain.lambda();
  const Vector& pi = spec.chain.pi();
  double upper = 0.0;
  double waiting = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double weight = pi(static_cast<Eigen::Index>(i));
    if (weight <= 0.0) continue;
    const double frozen = pollaczek_khinchine(lambda[i], spec.service);
    upper += weight * frozen;
    if (lambda[i] > 0.0) waiting += weight * lambda[i] * frozen;
  }
  out.workload_upper = upper;
  out.waiting_upper = stab.lambda_bar > 0.0 ? waiting / stab.lambda_bar : 0.0;
  return out;
}

WorkloadCurve w_curve(const Ctmc& chain, const ServiceDistribution& service,
                      const std::vector<double>& c_list, CurveMethod method,
                      const SimulationOptions& options, std::size_t threads,
                      const NumericPolicy& policy) {
  validate(service);
  for (std::size_t k = 0; k < c_list.size(); ++k) {
    if (!(c_list[k] > 0.0)) throw Error(ErrorKind::InvalidModulation, "c values must be positive");
    if (k > 0 && !(c_list[k] > c_list[k - 1])) {
      throw Error(ErrorKind::InvalidArgument, "c values must be strictly ascending");
    }
  }
  const bool exponential = std::holds_alternative<ExponentialService>(service);
  const bool use_qbd = method == CurveMethod::Qbd || (method == CurveMethod::Auto && exponential);

  WorkloadCurve curve;
  curve.points.resize(c_list.size());
  parallel_for(c_list.size(), threads, [&](std::size_t k) {
    const QueueSpec spec{chain, c_list[k], service};
    CurvePoint& point = curve.points[k];
    point.c = c_list[k];
    if (use_qbd) {
      point.estimate = qbd_mean_workload(spec, QbdAlgorithm::LogarithmicReduction, policy);
    } else {
      SimulationOptions local = options;
      local.seed = derive_seed(options.seed, kCurvePointStream, k);
      point.estimate = simulate_mean_workload(spec, local);
    }
  });

  for (std::size_t k = 0; k + 1 < curve.points.size(); ++k) {
    const auto& a = curve.points[k].estimate;
    const auto& b = curve.points[k + 1].estimate;
    const double slack = use_qbd ? policy.curve_exact_slack : a.half_width + b.half_width;
    if (a.value < b.value - slack) {
      curve.points[k + 1].pair_flag = true;
      if (!curve.first_violation) curve.first_violation = k + 1;
    }
  }
  curve.verdict = curve.first_violation ? CurveVerdict::ViolationSuspected : CurveVerdict::Decreasing;
  return curve;
}

}  // namespace coxlab
