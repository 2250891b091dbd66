#include "coxlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coxlab::io {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::Parse, message); }

double require_number(const Json& doc, const std::string& field) {
  if (!doc.is_number()) fail("field '" + field + "' must be a number");
  return doc.get<double>();
}

const Json& require_field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) fail(where + " must be an object");
  const auto it = obj.find(name);
  if (it == obj.end()) fail(where + " is missing field '" + name + "'");
  return *it;
}

std::vector<double> number_array(const Json& doc, const std::string& field) {
  if (!doc.is_array()) fail("field '" + field + "' must be an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    out.push_back(require_number(doc[k], field + "[" + std::to_string(k) + "]"));
  }
  return out;
}

}  // namespace

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ServiceDistribution parse_service(const Json& doc) {
  const std::string where = "service";
  const Json& type = require_field(doc, "type", where);
  if (!type.is_string()) fail("service.type must be a string");
  const auto kind = type.get<std::string>();
  ServiceDistribution out;
  if (kind == "exponential") {
    out = ExponentialService{require_number(require_field(doc, "rate", where), "service.rate")};
  } else if (kind == "deterministic") {
    out = DeterministicService{require_number(require_field(doc, "value", where), "service.value")};
  } else if (kind == "erlang") {
    const Json& shape = require_field(doc, "shape", where);
    if (!shape.is_number_integer()) fail("service.shape must be an integer");
    out = ErlangService{shape.get<int>(),
                        require_number(require_field(doc, "rate", where), "service.rate")};
  } else if (kind == "hyperexponential") {
    out = HyperexponentialService{number_array(require_field(doc, "probs", where), "service.probs"),
                                  number_array(require_field(doc, "rates", where), "service.rates")};
  } else {
    fail("unknown service type '" + kind + "'");
  }
  try {
    validate(out);
  } catch (const Error& e) {
    fail(std::string("service: ") + e.what());
  }
  return out;
}

Json service_to_json(const ServiceDistribution& service) {
  Json out;
  if (const auto* s = std::get_if<ExponentialService>(&service)) {
    out["type"] = "exponential";
    out["rate"] = s->rate;
  } else if (const auto* s = std::get_if<DeterministicService>(&service)) {
    out["type"] = "deterministic";
    out["value"] = s->value;
  } else if (const auto* s = std::get_if<ErlangService>(&service)) {
    out["type"] = "erlang";
    out["shape"] = s->shape;
    out["rate"] = s->rate;
  } else if (const auto* s = std::get_if<HyperexponentialService>(&service)) {
    out["type"] = "hyperexponential";
    out["probs"] = s->probs;
    out["rates"] = s->rates;
  }
  return out;
}

ChainFile parse_chain(const Json& doc, const NumericPolicy& policy) {
  if (!doc.is_object()) fail("chain file must contain an object");
  const Json& states = require_field(doc, "states", "chain file");
  if (!states.is_array() || states.size() < 2) fail("field 'states' must list at least 2 states");
  std::vector<double> lambda;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string where = "states[" + std::to_string(i) + "]";
    const Json& s = states[i];
    lambda.push_back(require_number(require_field(s, "lambda", where), where + ".lambda"));
    if (s.contains("label")) {
      if (!s["label"].is_string()) fail(where + ".label must be a string");
      labels.push_back(s["label"].get<std::string>());
    } else {
      labels.push_back(std::to_string(i));
    }
  }
  const Json& rows = require_field(doc, "Q", "chain file");
  if (!rows.is_array() || rows.size() != states.size()) {
    fail("field 'Q' must have one row per state (" + std::to_string(states.size()) + ")");
  }
  const auto m = static_cast<Eigen::Index>(states.size());
  Matrix q(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    const std::string where = "Q[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != states.size()) {
      fail(where + " must have " + std::to_string(states.size()) + " entries");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      q(i, j) = require_number(row[static_cast<std::size_t>(j)],
                               where + "[" + std::to_string(j) + "]");
    }
  }

  std::optional<ServiceDistribution> service;
  if (doc.contains("service")) service = parse_service(doc["service"]);

  try {
    return ChainFile{Ctmc::from_rates(q, lambda, labels, policy), service, doc};
  } catch (const Error& e) {
    // Generator and argument problems are input errors; reducibility is reported as is.
    if (e.kind() == ErrorKind::NotAGenerator || e.kind() == ErrorKind::InvalidArgument) {
      fail(std::string("Q: ") + e.what());
    }
    throw;
  }
}

ChainFile parse_chain_text(const std::string& text, const NumericPolicy& policy) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(e.what());
  }
  return parse_chain(doc, policy);
}

ChainFile load_chain(const std::filesystem::path& path, const NumericPolicy& policy) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_chain_text(buf.str(), policy);
}

GridDistribution parse_grid_distribution(const Json& doc, const NumericPolicy& policy) {
  const Json& dim = require_field(doc, "dim", "distribution");
  if (!dim.is_number_unsigned()) fail("distribution.dim must be a positive integer");
  try {
    return GridDistribution(number_array(require_field(doc, "levels", "distribution"), "levels"),
                            dim.get<std::size_t>(),
                            number_array(require_field(doc, "pmf", "distribution"), "pmf"), policy);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(std::string("distribution: ") + e.what());
  }
}

Json grid_distribution_to_json(const GridDistribution& law) {
  Json out;
  out["levels"] = law.levels();
  out["dim"] = law.dim();
  out["pmf"] = law.pmf();
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json chain_to_json(const Ctmc& chain) {
  Json out;
  Json states = Json::array();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    states.push_back({{"label", chain.labels()[i]}, {"lambda", chain.lambda()[i]}});
  }
  out["states"] = std::move(states);
  out["Q"] = matrix_to_json(chain.generator());
  return out;
}

Json to_json(const MonotonicityReport& report) {
  Json out;
  out["monotone"] = report.monotone;
  Json v = Json::array();
  for (const auto& x : report.violations) {
    v.push_back({{"rows", {x.row, x.row + 1}}, {"threshold", x.threshold}, {"gap", x.gap}});
  }
  out["violations"] = std::move(v);
  return out;
}

Json to_json(const CcpStructure& ccp) {
  Json out;
  out["ccp"] = ccp.holds;
  out["alpha"] = ccp.holds ? Json(ccp.alpha) : Json(nullptr);
  out["row_spread"] = ccp.row_spread;
  return out;
}

Json to_json(const OrderVerdict& verdict) {
  Json out;
  out["verdict"] = std::string(to_string(verdict.status));
  out["lp_optimum"] = number(verdict.lp_optimum);
  out["marginal_gap"] = verdict.marginal_gap;
  if (verdict.witness) {
    out["witness"] = {{"phi", verdict.witness->phi}, {"objective", verdict.witness->objective}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

Json to_json(const ScanReport& report, const std::vector<TimeGrid>& grids) {
  Json out;
  out["all_ordered"] = report.all_ordered;
  Json cells = Json::array();
  for (const auto& cell : report.cells) {
    Json c;
    c["c_pair"] = {cell.c_low, cell.c_high};
    c["grid"] = grids.at(cell.grid_index).times();
    const Json verdict = to_json(cell.verdict);
    for (const auto& [key, value] : verdict.items()) c[key] = value;
    cells.push_back(std::move(c));
  }
  out["cells"] = std::move(cells);
  return out;
}

Json to_json(const SearchSample& sample, const std::vector<TimeGrid>& grids) {
  Json out;
  out["sample_index"] = sample.sample_index;
  out["chain"] = chain_to_json(sample.chain);
  out["monotonicity"] = to_json(sample.monotonicity);
  out["doubly_monotone"] = {{"Q", to_json(sample.doubly.first)},
                            {"Q_reversed", to_json(sample.doubly.second)}};
  out["ccp"] = sample.ccp;
  out["scan"] = to_json(sample.scan, grids);
  return out;
}

Json to_json(const WorkloadEstimate& estimate) {
  Json out;
  out["value"] = number(estimate.value);
  out["half_width"] = number(estimate.half_width);
  out["method"] = std::string(to_string(estimate.method));
  if (estimate.method == WorkloadMethod::QbdExact) {
    out["iterations"] = estimate.iterations;
  } else {
    out["batches"] = estimate.batches;
    out["arrivals"] = estimate.arrivals;
    out["simulated_time"] = estimate.simulated_time;
    out["waiting_time"] = number(estimate.waiting_time);
    out["waiting_half_width"] = number(estimate.waiting_half_width);
    out["diverging"] = estimate.diverging;
  }
  return out;
}

Json to_json(const RolskiBounds& bounds) {
  Json out;
  out["lower"] = number(bounds.workload_lower);
  out["upper"] = number(bounds.workload_upper);
  out["waiting_lower"] = number(bounds.waiting_lower);
  out["waiting_upper"] = number(bounds.waiting_upper);
  out["lambda_bar"] = bounds.lambda_bar;
  out["rho"] = bounds.rho;
  return out;
}

Json to_json(const NumericPolicy& p) {
  Json out;
  out["row_sum_tol"] = p.row_sum_tol;
  out["input_row_sum_rel_tol"] = p.input_row_sum_rel_tol;
  out["stationary_residual_tol"] = p.stationary_residual_tol;
  out["poisson_tail"] = p.poisson_tail;
  out["dim_cap"] = p.dim_cap;
  out["lattice_cap"] = p.lattice_cap;
  out["sm_epsilon"] = p.sm_epsilon;
  out["witness_tol"] = p.witness_tol;
  out["lp_feasibility_tol"] = p.lp_feasibility_tol;
  out["qbd_tol"] = p.qbd_tol;
  out["qbd_max_iterations"] = p.qbd_max_iterations;
  out["curve_exact_slack"] = p.curve_exact_slack;
  return out;
}

std::uint64_t fingerprint(const Json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace coxlab::io
