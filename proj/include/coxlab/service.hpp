#pragma once

#include <string>
#include <variant>
#include <vector>

#include "coxlab/rng.hpp"

namespace coxlab {

struct ExponentialService {
  double rate = 1.0;
};
struct DeterministicService {
  double value = 1.0;
};
struct ErlangService {
  int shape = 1;
  double rate = 1.0;
};
struct HyperexponentialService {
  std::vector<double> probs;
  std::vector<double> rates;
};

using ServiceDistribution = std::variant<ExponentialService, DeterministicService, ErlangService,
                                         HyperexponentialService>;

/// Throws InvalidArgument unless every parameter is strictly positive and
/// hyperexponential branch probabilities sum to one.
void validate(const ServiceDistribution& service);

double mean(const ServiceDistribution& service);
double second_moment(const ServiceDistribution& service);
double sample(const ServiceDistribution& service, Rng& rng);
std::string describe(const ServiceDistribution& service);

}  // namespace coxlab
