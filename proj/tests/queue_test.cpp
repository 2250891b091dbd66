#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <doctest.h>

#include "coxlab/queue.hpp"
#include "test_support.hpp"

using namespace coxlab;
using coxlab::testing::two_state;
using coxlab::testing::uniform;

namespace {

// Mean workload of the exponential-service queue from a generator truncated
// at `levels` customers.
double truncated_workload(const Ctmc& chain, double c, double mu, int levels) {
  const auto m = static_cast<int>(chain.size());
  const int n = (levels + 1) * m;
  const Matrix& q = chain.generator();
  // Transposed generator with the last equation replaced by normalization.
  std::vector<Eigen::Triplet<double>> entries;
  auto add = [&](int from, int to, double rate) {
    if (to != n - 1) entries.emplace_back(to, from, rate);
    if (from != n - 1) entries.emplace_back(from, from, -rate);
  };
  for (int level = 0; level <= levels; ++level) {
    for (int i = 0; i < m; ++i) {
      const int s = level * m + i;
      for (int j = 0; j < m; ++j) {
        if (j != i) add(s, level * m + j, c * q(i, j));
      }
      if (level < levels) add(s, s + m, chain.lambda()[static_cast<std::size_t>(i)]);
      if (level > 0) add(s, s - m, mu);
    }
  }
  for (int s = 0; s < n; ++s) entries.emplace_back(n - 1, s, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  const Vector p = lu.solve(rhs);
  double en = 0.0;
  for (int s = 0; s < n; ++s) en += (s / m) * p(s);
  return en / mu;
}

// Waiting times of an M/D/1 queue by Lindley's recursion, with a generator
// unrelated to the library's.
double lindley_md1(double lambda, double d, std::size_t customers, std::uint32_t seed) {
  std::minstd_rand gen(seed);
  std::exponential_distribution<double> gap(lambda);
  double w = 0.0;
  double total = 0.0;
  const std::size_t warm = customers / 10;
  for (std::size_t k = 0; k < customers; ++k) {
    w = std::max(0.0, w + d - gap(gen));
    if (k >= warm) total += w;
  }
  return total / static_cast<double>(customers - warm);
}

QueueSpec mmpp_example(double c = 1.0) {
  return QueueSpec{two_state(1.0, 1.0, 0.5, 1.5), c, ExponentialService{2.0}};
}

}  // namespace

TEST_CASE("service distributions") {
  CHECK(mean(ExponentialService{4.0}) == 0.25);
  CHECK(second_moment(ExponentialService{4.0}) == 0.125);
  CHECK(mean(DeterministicService{0.5}) == 0.5);
  CHECK(second_moment(DeterministicService{0.5}) == 0.25);
  CHECK(mean(ErlangService{3, 6.0}) == doctest::Approx(0.5));
  CHECK(second_moment(ErlangService{3, 6.0}) == doctest::Approx(12.0 / 36.0));
  const HyperexponentialService h{{0.25, 0.75}, {1.0, 3.0}};
  CHECK(mean(h) == doctest::Approx(0.25 + 0.25));
  CHECK(second_moment(h) == doctest::Approx(0.5 + 0.75 * 2.0 / 9.0));

  CHECK_THROWS_AS(validate(ExponentialService{0.0}), Error);
  CHECK_THROWS_AS(validate(ErlangService{0, 1.0}), Error);
  CHECK_THROWS_AS(validate(HyperexponentialService{{0.5, 0.4}, {1.0, 2.0}}), Error);
  CHECK_THROWS_AS(validate(DeterministicService{-1.0}), Error);

  Rng rng(5);
  for (const ServiceDistribution& s :
       {ServiceDistribution{ExponentialService{2.0}}, ServiceDistribution{ErlangService{4, 2.0}},
        ServiceDistribution{h}, ServiceDistribution{DeterministicService{0.3}}}) {
    double m1 = 0.0;
    double m2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double x = sample(s, rng);
      m1 += x;
      m2 += x * x;
    }
    CHECK(m1 / n == doctest::Approx(mean(s)).epsilon(0.01));
    CHECK(m2 / n == doctest::Approx(second_moment(s)).epsilon(0.03));
  }
}

TEST_CASE("stability and Pollaczek-Khinchine") {
  const auto st = stability_check(mmpp_example(0.01));
  CHECK(st.stable);
  CHECK(st.lambda_bar == doctest::Approx(1.0));
  CHECK(st.rho == doctest::Approx(0.5));
  CHECK(stability_check(mmpp_example(100.0)).rho == doctest::Approx(0.5));

  CHECK(pollaczek_khinchine(1.0, ExponentialService{2.0}) == doctest::Approx(0.5));
  CHECK(pollaczek_khinchine(1.0, DeterministicService{0.5}) == doctest::Approx(0.25));
  CHECK(std::isinf(pollaczek_khinchine(2.0, ExponentialService{2.0})));
  CHECK(pollaczek_khinchine(0.0, ExponentialService{2.0}) == 0.0);
}

TEST_CASE("Rolski bounds") {
  const auto b = rolski_bounds(mmpp_example());
  CHECK(b.workload_lower == doctest::Approx(0.5));
  CHECK(b.workload_upper == doctest::Approx(5.0 / 6.0));
  CHECK(b.waiting_lower == doctest::Approx(0.5));
  // Arrivals find the fast state three times as often as the slow one.
  CHECK(b.waiting_upper == doctest::Approx(0.25 * (1.0 / 6.0) + 0.75 * 1.5));

  const auto open = rolski_bounds(QueueSpec{two_state(1.0, 1.0, 0.5, 2.5), 1.0, ExponentialService{2.0}});
  CHECK(std::isinf(open.workload_upper));
  CHECK(open.workload_lower == doctest::Approx(pollaczek_khinchine(1.5, ExponentialService{2.0})));
}

TEST_CASE("QBD solution") {
  SUBCASE("M/M/1 in a constant environment") {
    const QueueSpec spec{two_state(0.7, 1.3, 1.0, 1.0), 1.0, ExponentialService{2.0}};
    const auto est = qbd_mean_workload(spec);
    CHECK(est.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(est.half_width == 0.0);
    CHECK(est.method == WorkloadMethod::QbdExact);
    const auto sol = qbd_solve(spec);
    CHECK(sol.spectral_radius == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("two-state example against the truncated generator") {
    const double oracle = truncated_workload(mmpp_example().chain, 1.0, 2.0, 300);
    const auto est = qbd_mean_workload(mmpp_example());
    CHECK(est.value == doctest::Approx(oracle).epsilon(1e-9));
    // Frozen regression value.
    CHECK(est.value == doctest::Approx(0.5451625398929029).epsilon(1e-12));
    const auto b = rolski_bounds(mmpp_example());
    CHECK(est.value > b.workload_lower);
    CHECK(est.value < b.workload_upper);
  }
  SUBCASE("rate matrix solves the quadratic equation") {
    const auto spec = mmpp_example(0.3);
    const auto sol = qbd_solve(spec);
    const Matrix& r = sol.rate_matrix;
    const auto m = static_cast<Eigen::Index>(spec.chain.size());
    Matrix a0 = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) a0(i, i) = spec.chain.lambda()[static_cast<std::size_t>(i)];
    const Matrix a2 = 2.0 * Matrix::Identity(m, m);
    const Matrix a1 = spec.c * spec.chain.generator() - a0 - a2;
    CHECK((a0 + r * a1 + r * r * a2).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.minCoeff() >= 0.0);
    CHECK(sol.spectral_radius < 1.0);
    CHECK(sol.boundary.minCoeff() > 0.0);
  }
  SUBCASE("random environments: both algorithms and the truncation agree") {
    Rng rng(17);
    for (int trial = 0; trial < 12; ++trial) {
      const std::size_t m = 2 + static_cast<std::size_t>(trial % 3);
      const Ctmc chain = coxlab::testing::random_chain(rng, m, 1.6);
      const double c = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
      const QueueSpec spec{chain, c, ExponentialService{2.0}};
      const auto lr = qbd_mean_workload(spec, QbdAlgorithm::LogarithmicReduction);
      const auto fi = qbd_mean_workload(spec, QbdAlgorithm::FunctionalIteration);
      CHECK(lr.value == doctest::Approx(fi.value).epsilon(1e-9));
      CHECK(lr.value == doctest::Approx(truncated_workload(chain, c, 2.0, 500)).epsilon(1e-8));
      CHECK(lr.iterations < fi.iterations);
    }
  }
  SUBCASE("limits in c approach the Rolski bounds") {
    const auto b = rolski_bounds(mmpp_example());
    CHECK(qbd_mean_workload(mmpp_example(1e4)).value == doctest::Approx(b.workload_lower).epsilon(1e-3));
    CHECK(qbd_mean_workload(mmpp_example(1e-4)).value == doctest::Approx(b.workload_upper).epsilon(1e-2));
    // Pinned relative gaps at the ends of the usual sweep range.
    const double near_lower = qbd_mean_workload(mmpp_example(100.0)).value / b.workload_lower - 1.0;
    const double near_upper = 1.0 - qbd_mean_workload(mmpp_example(0.01)).value / b.workload_upper;
    CHECK(near_lower == doctest::Approx(0.001244).epsilon(1e-3));
    CHECK(near_upper == doctest::Approx(0.039634).epsilon(1e-3));
  }
  CHECK_THROWS_AS(qbd_solve(QueueSpec{two_state(1, 1, 0.5, 1.5), 1.0, DeterministicService{0.5}}), Error);
  try {
    qbd_solve(QueueSpec{two_state(1, 1, 1.5, 3.0), 1.0, ExponentialService{2.0}});
    FAIL("expected Unstable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unstable);
  }
}

TEST_CASE("Student-t quantile") {
  CHECK(student_t_975(1) == doctest::Approx(12.7062047).epsilon(1e-8));
  CHECK(student_t_975(31) == doctest::Approx(2.0395134).epsilon(1e-7));
  CHECK(student_t_975(100000) == doctest::Approx(1.959984).epsilon(1e-5));
}

TEST_CASE("simulation") {
  SimulationOptions opt;
  opt.horizon.amount = 200000;
  opt.seed = 42;

  SUBCASE("same seed gives identical results") {
    const auto a = simulate_mean_workload(mmpp_example(), opt);
    const auto b = simulate_mean_workload(mmpp_example(), opt);
    CHECK(a.value == b.value);
    CHECK(a.half_width == b.half_width);
    CHECK(a.waiting_time == b.waiting_time);
    opt.seed = 43;
    CHECK(simulate_mean_workload(mmpp_example(), opt).value != a.value);
  }
  SUBCASE("M/D/1 workload and waiting time") {
    const QueueSpec spec{two_state(1.0, 2.0, 1.0, 1.0), 1.0, DeterministicService{0.5}};
    opt.horizon.amount = 1e6;
    const auto est = simulate_mean_workload(spec, opt);
    CHECK(est.method == WorkloadMethod::Simulation);
    CHECK(est.batches == 32);
    CHECK(std::abs(est.value - 0.25) < 4 * est.half_width);
    CHECK(est.half_width < 0.01);
    CHECK(std::abs(est.waiting_time - 0.25) < 4 * est.waiting_half_width);
    CHECK(std::abs(est.waiting_time - lindley_md1(1.0, 0.5, 1'000'000, 7)) < 0.01);
  }
  SUBCASE("agrees with the QBD value") {
    const auto exact = qbd_mean_workload(mmpp_example(0.5)).value;
    const auto est = simulate_mean_workload(mmpp_example(0.5), opt);
    CHECK(std::abs(est.value - exact) < 4 * est.half_width);
  }
  SUBCASE("time horizon") {
    opt.horizon = {Horizon::Kind::Time, 50000.0};
    opt.batches = 20;
    const auto est = simulate_mean_workload(mmpp_example(), opt);
    CHECK(est.batches == 20);
    CHECK(est.simulated_time == doctest::Approx(50000.0));
    CHECK(std::abs(est.value - qbd_mean_workload(mmpp_example()).value) < 4 * est.half_width);
  }
  SUBCASE("unstable queues need an override") {
    const QueueSpec spec{two_state(1, 1, 1.5, 3.0), 1.0, ExponentialService{2.0}};
    try {
      simulate_mean_workload(spec, opt);
      FAIL("expected UnstableWithoutOverride");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnstableWithoutOverride);
    }
    opt.allow_unstable = true;
    opt.horizon.amount = 20000;
    const auto est = simulate_mean_workload(spec, opt);
    CHECK(est.diverging);
    CHECK(est.value > 100.0);
  }
}

TEST_CASE("workload curves") {
  const std::vector<double> cs{0.05, 0.25, 1.0, 4.0, 20.0};
  SUBCASE("exact curve is decreasing for a two-state environment") {
    const auto curve = w_curve(mmpp_example().chain, ExponentialService{2.0}, cs);
    CHECK(curve.verdict == CurveVerdict::Decreasing);
    CHECK_FALSE(curve.first_violation.has_value());
    REQUIRE(curve.points.size() == cs.size());
    for (std::size_t k = 1; k < cs.size(); ++k) {
      CHECK(curve.points[k].estimate.value < curve.points[k - 1].estimate.value);
      CHECK_FALSE(curve.points[k].pair_flag);
      CHECK(curve.points[k].estimate.method == WorkloadMethod::QbdExact);
    }
  }
  SUBCASE("simulated curve does not depend on the thread count") {
    SimulationOptions opt;
    opt.horizon.amount = 20000;
    opt.seed = 11;
    const auto a = w_curve(mmpp_example().chain, DeterministicService{0.5}, {0.5, 1.0, 2.0},
                           CurveMethod::Auto, opt, 1);
    const auto b = w_curve(mmpp_example().chain, DeterministicService{0.5}, {0.5, 1.0, 2.0},
                           CurveMethod::Auto, opt, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.points[k].estimate.method == WorkloadMethod::Simulation);
      CHECK(a.points[k].estimate.value == b.points[k].estimate.value);
      CHECK(a.points[k].estimate.half_width == b.points[k].estimate.half_width);
    }
    // Each point has its own substream, so points differ from a single run.
    opt.seed = derive_seed(11, kCurvePointStream, 1);
    const auto single = simulate_mean_workload(QueueSpec{mmpp_example().chain, 1.0, DeterministicService{0.5}}, opt);
    CHECK(single.value == a.points[1].estimate.value);
  }
  SUBCASE("qbd method rejects general service") {
    CHECK_THROWS_AS(w_curve(mmpp_example().chain, DeterministicService{0.5}, cs, CurveMethod::Qbd), Error);
  }
  CHECK_THROWS_AS(w_curve(mmpp_example().chain, ExponentialService{2.0}, {1.0, 0.5}), Error);
}
