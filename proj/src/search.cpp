#include <algorithm>

#include "coxlab/order.hpp"
#include "coxlab/parallel.hpp"
#include "coxlab/rng.hpp"

namespace coxlab {

std::optional<Ctmc> sample_chain(std::size_t states, const RateSampler& sampler,
                                 std::uint64_t seed, std::uint64_t sample_index) {
  if (states < 2) throw Error(ErrorKind::InvalidArgument, "search needs at least 2 states");
  Rng rng(derive_seed(seed, kSamplerStream, sample_index));
  const auto m = static_cast<Eigen::Index>(states);
  Matrix q = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      switch (sampler.family) {
        case RateSampler::Family::Exponential:
          q(i, j) = rng.exponential(sampler.rate);
          break;
        case RateSampler::Family::TwoPoint:
          q(i, j) = rng.uniform() < sampler.p_high ? sampler.high : sampler.low;
          break;
      }
    }
    q(i, i) = -q.row(i).sum();
  }
  std::vector<double> lambda(states);
  for (auto& v : lambda) v = sampler.lambda_max * rng.uniform();
  std::sort(lambda.begin(), lambda.end());
  try {
    return Ctmc::from_rates(q, std::move(lambda));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotIrreducible) return std::nullopt;
    throw;
  }
}

SearchResult counterexample_search(const SearchConfig& config, std::size_t threads,
                                   const NumericPolicy& policy) {
  if (config.budget < 1) throw Error(ErrorKind::InvalidArgument, "budget must be >= 1");
  if (config.grids.empty()) throw Error(ErrorKind::InvalidArgument, "search needs at least one grid");

  std::vector<std::optional<SearchSample>> samples(config.budget);
  parallel_for(samples.size(), threads, [&](std::size_t idx) {
    const auto index = static_cast<std::uint64_t>(idx);
    std::optional<Ctmc> chain;
    const auto planted = std::find_if(config.planted.begin(), config.planted.end(),
                                      [&](const auto& p) { return p.sample_index == index; });
    if (planted != config.planted.end()) {
      chain = planted->chain;
    } else {
      chain = sample_chain(config.states, config.sampler, config.seed, index);
    }
    if (!chain) return;
    SearchSample s{index,
                   *chain,
                   check_generator_monotonicity(*chain, std::nullopt, policy),
                   check_doubly_monotone(*chain, policy),
                   check_ccp_structure(*chain).holds,
                   sm_decrease_scan(*chain, config.c_list, config.grids, config.epsilon, 1, policy)};
    samples[idx] = std::move(s);
  });

  SearchResult result;
  result.samples_tried = config.budget;
  for (auto& s : samples) {
    if (!s) {
      ++result.rejected_reducible;
      continue;
    }
    const bool violated = std::any_of(s->scan.cells.begin(), s->scan.cells.end(), [](const auto& c) {
      return c.verdict.status == OrderStatus::Violated;
    });
    if (violated) result.violations.push_back(*s);
    if (!s->monotonicity.monotone && s->scan.all_ordered) result.candidates.push_back(std::move(*s));
  }
  return result;
}

}  // namespace coxlab
