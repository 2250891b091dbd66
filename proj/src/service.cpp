#include "coxlab/service.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "coxlab/error.hpp"

namespace coxlab {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive and finite");
  }
}
}  // namespace

void validate(const ServiceDistribution& service) {
  std::visit(overloaded{
                 [](const ExponentialService& s) { require_positive(s.rate, "exponential rate"); },
                 [](const DeterministicService& s) { require_positive(s.value, "deterministic value"); },
                 [](const ErlangService& s) {
                   if (s.shape < 1) throw Error(ErrorKind::InvalidArgument, "erlang shape must be >= 1");
                   require_positive(s.rate, "erlang rate");
                 },
                 [](const HyperexponentialService& s) {
                   if (s.probs.empty() || s.probs.size() != s.rates.size()) {
                     throw Error(ErrorKind::InvalidArgument,
                                 "hyperexponential needs matching non-empty probs and rates");
                   }
                   for (double p : s.probs) require_positive(p, "hyperexponential probability");
                   for (double r : s.rates) require_positive(r, "hyperexponential rate");
                   const double total = std::accumulate(s.probs.begin(), s.probs.end(), 0.0);
                   if (std::abs(total - 1.0) > 1e-12) {
                     throw Error(ErrorKind::InvalidArgument, "hyperexponential probs must sum to 1");
                   }
                 },
             },
             service);
}

double mean(const ServiceDistribution& service) {
  return std::visit(overloaded{
                        [](const ExponentialService& s) { return 1.0 / s.rate; },
                        [](const DeterministicService& s) { return s.value; },
                        [](const ErlangService& s) { return s.shape / s.rate; },
                        [](const HyperexponentialService& s) {
                          double m = 0.0;
                          for (std::size_t k = 0; k < s.probs.size(); ++k) m += s.probs[k] / s.rates[k];
                          return m;
                        },
                    },
                    service);
}

double second_moment(const ServiceDistribution& service) {
  return std::visit(overloaded{
                        [](const ExponentialService& s) { return 2.0 / (s.rate * s.rate); },
                        [](const DeterministicService& s) { return s.value * s.value; },
                        [](const ErlangService& s) {
                          return s.shape * (s.shape + 1.0) / (s.rate * s.rate);
                        },
                        [](const HyperexponentialService& s) {
                          double m = 0.0;
                          for (std::size_t k = 0; k < s.probs.size(); ++k) {
                            m += 2.0 * s.probs[k] / (s.rates[k] * s.rates[k]);
                          }
                          return m;
                        },
                    },
                    service);
}

double sample(const ServiceDistribution& service, Rng& rng) {
  return std::visit(overloaded{
                        [&](const ExponentialService& s) { return rng.exponential(s.rate); },
                        [](const DeterministicService& s) { return s.value; },
                        [&](const ErlangService& s) {
                          double total = 0.0;
                          for (int k = 0; k < s.shape; ++k) total += rng.exponential(s.rate);
                          return total;
                        },
                        [&](const HyperexponentialService& s) {
                          const double u = rng.uniform();
                          double acc = 0.0;
                          std::size_t branch = s.probs.size() - 1;
                          for (std::size_t k = 0; k < s.probs.size(); ++k) {
                            acc += s.probs[k];
                            if (u < acc) {
                              branch = k;
                              break;
                            }
                          }
                          return rng.exponential(s.rates[branch]);
                        },
                    },
                    service);
}

std::string describe(const ServiceDistribution& service) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ExponentialService& s) { os << "exponential(" << s.rate << ")"; },
                 [&](const DeterministicService& s) { os << "deterministic(" << s.value << ")"; },
                 [&](const ErlangService& s) { os << "erlang(" << s.shape << ", " << s.rate << ")"; },
                 [&](const HyperexponentialService& s) {
                   os << "hyperexponential(";
                   for (std::size_t k = 0; k < s.probs.size(); ++k) {
                     os << (k ? ", " : "") << s.probs[k] << "@" << s.rates[k];
                   }
                   os << ")";
                 },
             },
             service);
  return os.str();
}

}  // namespace coxlab
