#include <cmath>

#include <Eigen/Eigenvalues>

#include "coxlab/queue.hpp"

namespace coxlab {

std::string_view to_string(WorkloadMethod method) {
  return method == WorkloadMethod::QbdExact ? "qbd" : "sim";
}

Stability stability_check(const QueueSpec& spec) {
  validate(spec.service);
  Stability s;
  s.lambda_bar = spec.chain.mean_intensity();
  s.rho = s.lambda_bar * mean(spec.service);
  s.stable = s.rho < 1.0;
  return s;
}

namespace {

struct Blocks {
  Matrix up;     // A0
  Matrix local;  // A1
  Matrix down;   // A2
  Matrix boundary_local;  // B1
};

Blocks build_blocks(const QueueSpec& spec, double mu) {
  const Ctmc env = modulate(spec.chain, spec.c);
  const auto m = static_cast<Eigen::Index>(env.size());
  Blocks b;
  b.up = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) b.up(i, i) = env.lambda()[static_cast<std::size_t>(i)];
  b.down = mu * Matrix::Identity(m, m);
  b.boundary_local = env.generator() - b.up;
  b.local = b.boundary_local - b.down;
  return b;
}

// Latouche-Ramaswami logarithmic reduction for G, then R = A0 (-(A1 + A0 G))^{-1}.
Matrix solve_logarithmic_reduction(const Blocks& b, const NumericPolicy& policy,
                                   std::size_t& iterations) {
  const auto m = b.up.rows();
  const Matrix identity = Matrix::Identity(m, m);
  const auto neg_local = (-b.local).partialPivLu();
  Matrix h = neg_local.solve(b.up);
  Matrix l = neg_local.solve(b.down);
  Matrix g = l;
  Matrix t = h;
  iterations = 0;
  constexpr std::size_t kMaxDoublings = 200;
  while (iterations < kMaxDoublings) {
    ++iterations;
    const Matrix u = h * l + l * h;
    const auto step = (identity - u).partialPivLu();
    const Matrix h_next = step.solve(h * h);
    const Matrix l_next = step.solve(l * l);
    g += t * l_next;
    t = t * h_next;
    h = h_next;
    l = l_next;
    const double defect = (Vector::Ones(m) - g * Vector::Ones(m)).cwiseAbs().maxCoeff();
    if (defect < policy.qbd_tol || t.cwiseAbs().maxCoeff() < policy.qbd_tol * 1e-3) break;
  }
  if (iterations == kMaxDoublings) {
    throw Error(ErrorKind::NoConvergence, "logarithmic reduction did not converge");
  }
  return b.up * (-(b.local + b.up * g)).inverse();
}

// Plain functional iteration R <- -(A0 + R^2 A2) A1^{-1} from R = 0.
Matrix solve_functional_iteration(const Blocks& b, const NumericPolicy& policy,
                                  std::size_t& iterations) {
  const auto m = b.up.rows();
  const Matrix local_inv = b.local.inverse();
  Matrix r = Matrix::Zero(m, m);
  for (iterations = 1; iterations <= policy.qbd_max_iterations; ++iterations) {
    Matrix next = -(b.up + r * r * b.down) * local_inv;
    const double change = (next - r).cwiseAbs().maxCoeff();
    r = std::move(next);
    if (change < policy.qbd_tol) return r;
  }
  throw Error(ErrorKind::NoConvergence, "functional iteration for R hit the iteration cap");
}

}  // namespace

QbdSolution qbd_solve(const QueueSpec& spec, QbdAlgorithm algorithm, const NumericPolicy& policy) {
  const auto* exp_service = std::get_if<ExponentialService>(&spec.service);
  if (exp_service == nullptr) {
    throw Error(ErrorKind::NotExponentialService, "QBD solution needs exponential service");
  }
  validate(spec.service);
  if (!(spec.c > 0.0)) throw Error(ErrorKind::InvalidModulation, "c must be positive");
  const Stability stab = stability_check(spec);
  if (!stab.stable) {
    throw Error(ErrorKind::Unstable, "traffic intensity " + std::to_string(stab.rho) + " >= 1");
  }

  const Blocks b = build_blocks(spec, exp_service->rate);
  const auto m = b.up.rows();
  QbdSolution sol;
  sol.rate_matrix = algorithm == QbdAlgorithm::LogarithmicReduction
                        ? solve_logarithmic_reduction(b, policy, sol.iterations)
                        : solve_functional_iteration(b, policy, sol.iterations);
  const Matrix& r = sol.rate_matrix;
  sol.spectral_radius = r.eigenvalues().cwiseAbs().maxCoeff();
  if (!(sol.spectral_radius < 1.0)) {
    throw Error(ErrorKind::NoConvergence, "rate matrix spectral radius is not below 1");
  }

  const Matrix identity = Matrix::Identity(m, m);
  const auto fundamental = (identity - r).partialPivLu();
  const Vector ones = Vector::Ones(m);
  const Vector mass = fundamental.solve(ones);  // (I - R)^{-1} 1

  // x0 (B1 + R A2) = 0 with x0 (I - R)^{-1} 1 = 1.
  Matrix system = (b.boundary_local + r * b.down).transpose();
  system.row(m - 1) = mass.transpose();
  Vector rhs = Vector::Zero(m);
  rhs(m - 1) = 1.0;
  sol.boundary = system.fullPivLu().solve(rhs);

  const Vector tail = fundamental.solve(mass);  // (I - R)^{-2} 1
  sol.mean_queue_length = sol.boundary.dot(r * tail);
  return sol;
}

WorkloadEstimate qbd_mean_workload(const QueueSpec& spec, QbdAlgorithm algorithm,
                                   const NumericPolicy& policy) {
  const QbdSolution sol = qbd_solve(spec, algorithm, policy);
  WorkloadEstimate est;
  est.value = sol.mean_queue_length / std::get<ExponentialService>(spec.service).rate;
  est.half_width = 0.0;
  est.method = WorkloadMethod::QbdExact;
  est.iterations = sol.iterations;
  return est;
}

}  // namespace coxlab
