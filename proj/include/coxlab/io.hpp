#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coxlab/ctmc.hpp"
#include "coxlab/order.hpp"
#include "coxlab/queue.hpp"
#include "coxlab/service.hpp"

namespace coxlab::io {

using Json = nlohmann::ordered_json;

/// Contents of a chain specification file:
///
///     { "states": [ { "label": "low", "lambda": 0.5 }, ... ],
///       "Q": [[-1, 1], [2, -2]],
///       "service": { "type": "exponential", "rate": 2 } }
///
/// `service` is optional. Q rows follow the `states` order; the chain
/// re-sorts states by intensity and the permutation is kept in `chain`.
struct ChainFile {
  Ctmc chain;
  std::optional<ServiceDistribution> service;
  Json source;  // parsed document, used for hashing
};

/// Throws Error(Parse) with a field or line diagnostic on malformed input.
ChainFile parse_chain(const Json& doc, const NumericPolicy& policy = {});
ChainFile parse_chain_text(const std::string& text, const NumericPolicy& policy = {});
ChainFile load_chain(const std::filesystem::path& path, const NumericPolicy& policy = {});

ServiceDistribution parse_service(const Json& doc);
Json service_to_json(const ServiceDistribution& service);

/// { "levels": [...], "dim": n, "pmf": [...] }
GridDistribution parse_grid_distribution(const Json& doc, const NumericPolicy& policy = {});
Json grid_distribution_to_json(const GridDistribution& law);

Json chain_to_json(const Ctmc& chain);
Json matrix_to_json(const Matrix& m);
Json to_json(const MonotonicityReport& report);
Json to_json(const CcpStructure& ccp);
Json to_json(const OrderVerdict& verdict);
Json to_json(const ScanReport& report, const std::vector<TimeGrid>& grids);
Json to_json(const SearchSample& sample, const std::vector<TimeGrid>& grids);
Json to_json(const WorkloadEstimate& estimate);
Json to_json(const RolskiBounds& bounds);
Json to_json(const NumericPolicy& policy);

/// Infinite values are written as the string "inf", NaN as null.
Json number(double v);

/// 64-bit FNV-1a of the compact dump; used as a spec fingerprint.
std::uint64_t fingerprint(const Json& doc);
std::string hex(std::uint64_t v);

}  // namespace coxlab::io
