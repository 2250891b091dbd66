// coxlab: command-line front end.
//
// Exit codes: 0 success / ordered / decreasing, 10 supermodular-order
// violation found, 11 workload-curve violation suspected, 2 bad input,
// 3 reducible chain, 4 unstable queue without override.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coxlab/ctmc.hpp"
#include "coxlab/io.hpp"
#include "coxlab/order.hpp"
#include "coxlab/queue.hpp"

namespace {

using coxlab::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitReducible = 3;
constexpr int kExitUnstable = 4;
constexpr int kExitSmViolation = 10;
constexpr int kExitCurveViolation = 11;

struct RunConfig {
  std::string chain_path;
  std::vector<double> c_list;
  std::vector<std::string> grids;
  std::size_t dim_cap = 4;
  std::string method = "auto";
  double arrivals = 1e6;
  double sim_time = 0.0;
  std::size_t batches = 32;
  double warmup = 0.1;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  double epsilon = 1e-9;
  std::string out;
  bool allow_unstable = false;
  // sm-check debug path
  std::string pmf_x;
  std::string pmf_y;
  // search
  std::size_t states = 3;
  std::uint64_t budget = 100;
  std::string rate_family = "exponential";
  double rate = 1.0;
  double low = 0.0;
  double high = 1.0;
  double p_high = 0.5;
  double lambda_max = 1.0;
  std::string planted;
};

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t resolve_seed(RunConfig& cfg) {
  if (!cfg.seed) {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << *cfg.seed << "\n";
  }
  return *cfg.seed;
}

coxlab::NumericPolicy policy_of(const RunConfig& cfg) {
  coxlab::NumericPolicy policy;
  policy.dim_cap = cfg.dim_cap;
  policy.sm_epsilon = cfg.epsilon;
  return policy;
}

std::vector<coxlab::TimeGrid> parse_grids(const std::vector<std::string>& specs,
                                          const coxlab::NumericPolicy& policy) {
  std::vector<coxlab::TimeGrid> grids;
  for (const auto& spec : specs) {
    std::vector<double> times;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        times.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw coxlab::Error(coxlab::ErrorKind::Parse, "bad --grid entry '" + item + "'");
      }
    }
    try {
      grids.emplace_back(std::move(times), policy);
    } catch (const coxlab::Error& e) {
      throw coxlab::Error(coxlab::ErrorKind::Parse, std::string("--grid '") + spec + "': " + e.what());
    }
  }
  return grids;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw coxlab::Error(coxlab::ErrorKind::Parse, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw coxlab::Error(coxlab::ErrorKind::Parse, path + ": " + e.what());
  }
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw coxlab::Error(coxlab::ErrorKind::Parse, "cannot write '" + cfg.out + "'");
  out << text;
}

Json metadata(const std::string& command, const RunConfig& cfg, const coxlab::NumericPolicy& policy,
              const Json* source) {
  Json meta;
  meta["tool"] = "coxlab";
  meta["command"] = command;
  meta["seed"] = cfg.seed ? Json(*cfg.seed) : Json(nullptr);
  if (source) meta["spec_hash"] = coxlab::io::hex(coxlab::io::fingerprint(*source));
  meta["policy"] = coxlab::io::to_json(policy);
  return meta;
}

void require_ascending(const std::vector<double>& c_list, std::size_t min_size) {
  if (c_list.size() < min_size) {
    throw coxlab::Error(coxlab::ErrorKind::Parse,
                        "--c-list needs at least " + std::to_string(min_size) + " values");
  }
  for (std::size_t k = 0; k < c_list.size(); ++k) {
    if (!(c_list[k] > 0.0) || (k > 0 && !(c_list[k] > c_list[k - 1]))) {
      throw coxlab::Error(coxlab::ErrorKind::Parse, "--c-list must be positive and strictly ascending");
    }
  }
}

// ---------------------------------------------------------------------------

int cmd_analyze(const RunConfig& cfg) {
  const auto policy = policy_of(cfg);
  const auto file = coxlab::io::load_chain(cfg.chain_path, policy);
  const auto& chain = file.chain;
  const auto reversed = coxlab::time_reverse(chain, policy);
  const auto [mono_q, mono_rev] = coxlab::check_doubly_monotone(chain, policy);
  const auto ccp = coxlab::check_ccp_structure(chain);
  const auto levels = coxlab::intensity_levels(chain);

  Json report;
  report["meta"] = metadata("analyze", cfg, policy, &file.source);
  report["chain"] = coxlab::io::chain_to_json(chain);
  report["input_index"] = chain.input_index();
  std::vector<double> pi(chain.pi().data(), chain.pi().data() + chain.pi().size());
  report["pi"] = pi;
  report["Q_reversed"] = coxlab::io::matrix_to_json(reversed.generator());
  report["reversible"] = coxlab::is_reversible(chain);
  report["monotonicity"] = {{"Q", coxlab::io::to_json(mono_q)},
                            {"Q_reversed", coxlab::io::to_json(mono_rev)}};
  report["monotone"] = mono_q.monotone;
  report["doubly_monotone"] = mono_q.monotone && mono_rev.monotone;
  report["ccp"] = coxlab::io::to_json(ccp);
  report["mean_intensity"] = chain.mean_intensity();

  Json notes = Json::array();
  bool permuted = false;
  for (std::size_t k = 0; k < chain.size(); ++k) permuted |= chain.input_index()[k] != k;
  notes.push_back(permuted ? "states re-sorted by ascending lambda; input_index maps sorted to input order"
                           : "states already in ascending lambda order");
  if (levels.size() < chain.size()) {
    notes.push_back("states with equal lambda are lumped onto " + std::to_string(levels.size()) +
                    " levels in finite-dimensional laws");
  }
  report["notes"] = std::move(notes);
  emit(cfg, report.dump(2) + "\n");
  return kExitOk;
}

int cmd_sm_check(RunConfig cfg) {
  const auto policy = policy_of(cfg);
  if (!cfg.pmf_x.empty() || !cfg.pmf_y.empty()) {
    if (cfg.pmf_x.empty() || cfg.pmf_y.empty()) {
      throw coxlab::Error(coxlab::ErrorKind::Parse, "--pmf-x and --pmf-y must be given together");
    }
    const auto x = coxlab::io::parse_grid_distribution(read_json(cfg.pmf_x), policy);
    const auto y = coxlab::io::parse_grid_distribution(read_json(cfg.pmf_y), policy);
    const auto verdict = coxlab::sm_check(x, y, cfg.epsilon, policy);
    Json report;
    report["meta"] = metadata("sm-check", cfg, policy, nullptr);
    report["result"] = coxlab::io::to_json(verdict);
    emit(cfg, report.dump(2) + "\n");
    return verdict.status == coxlab::OrderStatus::Violated ? kExitSmViolation : kExitOk;
  }

  require_ascending(cfg.c_list, 2);
  const auto file = coxlab::io::load_chain(cfg.chain_path, policy);
  const auto grids = parse_grids(cfg.grids, policy);
  const auto scan = coxlab::sm_decrease_scan(file.chain, cfg.c_list, grids, cfg.epsilon,
                                             cfg.threads, policy);
  Json report;
  report["meta"] = metadata("sm-check", cfg, policy, &file.source);
  report["c_list"] = cfg.c_list;
  report["scan"] = coxlab::io::to_json(scan, grids);
  emit(cfg, report.dump(2) + "\n");
  const bool violated = std::any_of(scan.cells.begin(), scan.cells.end(), [](const auto& c) {
    return c.verdict.status == coxlab::OrderStatus::Violated;
  });
  return violated ? kExitSmViolation : kExitOk;
}

int cmd_sweep(RunConfig cfg) {
  const auto policy = policy_of(cfg);
  require_ascending(cfg.c_list, 1);
  const auto file = coxlab::io::load_chain(cfg.chain_path, policy);
  if (!file.service) throw coxlab::Error(coxlab::ErrorKind::Parse, "chain file has no 'service' field");

  coxlab::CurveMethod method;
  if (cfg.method == "auto") {
    method = coxlab::CurveMethod::Auto;
  } else if (cfg.method == "qbd") {
    method = coxlab::CurveMethod::Qbd;
  } else if (cfg.method == "sim") {
    method = coxlab::CurveMethod::Sim;
  } else {
    throw coxlab::Error(coxlab::ErrorKind::Parse, "--method must be auto, qbd or sim");
  }
  const bool simulated = method == coxlab::CurveMethod::Sim ||
                         (method == coxlab::CurveMethod::Auto &&
                          !std::holds_alternative<coxlab::ExponentialService>(*file.service));
  if (simulated) resolve_seed(cfg);

  const coxlab::QueueSpec probe{file.chain, cfg.c_list.front(), *file.service};
  const auto stab = coxlab::stability_check(probe);
  if (!stab.stable && !(simulated && cfg.allow_unstable)) {
    throw coxlab::Error(coxlab::ErrorKind::UnstableWithoutOverride,
                        "traffic intensity " + format_double(stab.rho) + " >= 1");
  }

  coxlab::SimulationOptions sim;
  if (cfg.sim_time > 0.0) {
    sim.horizon = {coxlab::Horizon::Kind::Time, cfg.sim_time};
  } else {
    sim.horizon = {coxlab::Horizon::Kind::Arrivals, cfg.arrivals};
  }
  sim.batches = cfg.batches;
  sim.warmup = cfg.warmup;
  sim.seed = cfg.seed.value_or(0);
  sim.allow_unstable = cfg.allow_unstable;

  const auto curve = coxlab::w_curve(file.chain, *file.service, cfg.c_list, method, sim,
                                     cfg.threads, policy);
  const auto bounds = coxlab::rolski_bounds(probe);

  std::ostringstream csv;
  Json meta = metadata("sweep", cfg, policy, &file.source);
  csv << "# coxlab sweep\n";
  csv << "# seed: " << (cfg.seed ? std::to_string(*cfg.seed) : std::string("none")) << "\n";
  csv << "# spec_hash: " << meta["spec_hash"].get<std::string>() << "\n";
  csv << "# service: " << coxlab::describe(*file.service) << "\n";
  csv << "# policy: " << meta["policy"].dump() << "\n";
  csv << "# rolski_lower: " << format_double(bounds.workload_lower)
      << ", rolski_upper: " << format_double(bounds.workload_upper) << "\n";
  csv << "# verdict: " << coxlab::to_string(curve.verdict) << "\n";
  csv << "c,value,half_width,method,verdict_pair_flag\n";
  for (const auto& p : curve.points) {
    csv << format_double(p.c) << ',' << format_double(p.estimate.value) << ','
        << format_double(p.estimate.half_width) << ',' << coxlab::to_string(p.estimate.method)
        << ',' << (p.pair_flag ? 1 : 0) << '\n';
  }
  emit(cfg, csv.str());
  std::cerr << "verdict: " << coxlab::to_string(curve.verdict) << "\n";
  return curve.verdict == coxlab::CurveVerdict::Decreasing ? kExitOk : kExitCurveViolation;
}

int cmd_bounds(const RunConfig& cfg) {
  const auto policy = policy_of(cfg);
  const auto file = coxlab::io::load_chain(cfg.chain_path, policy);
  if (!file.service) throw coxlab::Error(coxlab::ErrorKind::Parse, "chain file has no 'service' field");
  const auto bounds = coxlab::rolski_bounds({file.chain, 1.0, *file.service});
  std::ostringstream os;
  os << "lower " << format_double(bounds.workload_lower) << "\n"
     << "upper " << format_double(bounds.workload_upper) << "\n"
     << "waiting_lower " << format_double(bounds.waiting_lower) << "\n"
     << "waiting_upper " << format_double(bounds.waiting_upper) << "\n"
     << "lambda_bar " << format_double(bounds.lambda_bar) << "\n"
     << "rho " << format_double(bounds.rho) << "\n";
  emit(cfg, os.str());
  return kExitOk;
}

int cmd_search(RunConfig cfg) {
  const auto policy = policy_of(cfg);
  require_ascending(cfg.c_list, 2);
  if (cfg.budget < 1) throw coxlab::Error(coxlab::ErrorKind::Parse, "--budget must be >= 1");
  if (cfg.states < 2 || cfg.states > policy.max_states) {
    throw coxlab::Error(coxlab::ErrorKind::Parse, "--states out of range");
  }
  coxlab::SearchConfig search;
  search.states = cfg.states;
  search.c_list = cfg.c_list;
  search.grids = parse_grids(cfg.grids, policy);
  search.budget = cfg.budget;
  search.seed = resolve_seed(cfg);
  search.epsilon = cfg.epsilon;
  if (cfg.rate_family == "exponential") {
    search.sampler.family = coxlab::RateSampler::Family::Exponential;
  } else if (cfg.rate_family == "two-point") {
    search.sampler.family = coxlab::RateSampler::Family::TwoPoint;
  } else {
    throw coxlab::Error(coxlab::ErrorKind::Parse, "--rate-family must be exponential or two-point");
  }
  search.sampler.rate = cfg.rate;
  search.sampler.low = cfg.low;
  search.sampler.high = cfg.high;
  search.sampler.p_high = cfg.p_high;
  search.sampler.lambda_max = cfg.lambda_max;
  if (!(cfg.rate > 0.0) || cfg.low < 0.0 || cfg.high < 0.0 || !(cfg.lambda_max > 0.0) ||
      cfg.p_high < 0.0 || cfg.p_high > 1.0) {
    throw coxlab::Error(coxlab::ErrorKind::Parse, "sampler parameters out of range");
  }
  if (!cfg.planted.empty()) {
    // { "sample_index": k, "chain": { chain file } } or a list of those.
    Json doc = read_json(cfg.planted);
    if (!doc.is_array()) doc = Json::array({doc});
    for (const auto& entry : doc) {
      if (!entry.is_object() || !entry.contains("sample_index") || !entry.contains("chain") ||
          !entry["sample_index"].is_number_unsigned()) {
        throw coxlab::Error(coxlab::ErrorKind::Parse,
                            "planted entries need 'sample_index' and 'chain'");
      }
      search.planted.push_back({entry["sample_index"].get<std::uint64_t>(),
                                coxlab::io::parse_chain(entry["chain"], policy).chain});
    }
  }

  const auto result = coxlab::counterexample_search(search, cfg.threads, policy);

  Json report;
  report["meta"] = metadata("search", cfg, policy, nullptr);
  report["seed"] = search.seed;
  report["c_list"] = cfg.c_list;
  Json grids = Json::array();
  for (const auto& g : search.grids) grids.push_back(g.times());
  report["grids"] = grids;
  report["summary"] = {{"samples_tried", result.samples_tried},
                       {"rejected_reducible", result.rejected_reducible},
                       {"candidates_found", result.candidates.size()},
                       {"violations_found", result.violations.size()}};
  Json candidates = Json::array();
  for (const auto& s : result.candidates) candidates.push_back(coxlab::io::to_json(s, search.grids));
  report["candidates"] = std::move(candidates);
  Json violations = Json::array();
  for (const auto& s : result.violations) violations.push_back(coxlab::io::to_json(s, search.grids));
  report["violations"] = std::move(violations);
  emit(cfg, report.dump(2) + "\n");

  std::cerr << "samples tried: " << result.samples_tried
            << ", candidates found: " << result.candidates.size()
            << ", violations found: " << result.violations.size() << "\n";
  return kExitOk;
}

int exit_code_for(const coxlab::Error& e) {
  switch (e.kind()) {
    case coxlab::ErrorKind::NotIrreducible: return kExitReducible;
    case coxlab::ErrorKind::Unstable:
    case coxlab::ErrorKind::UnstableWithoutOverride: return kExitUnstable;
    default: return kExitParse;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coxlab: modulated Cox/G/1 workload and supermodular-order laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "coxlab 0.1.0");

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Write the report to this file instead of stdout");
    sub->add_option("--threads", cfg.threads, "Worker cap; output does not depend on it")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--epsilon", cfg.epsilon, "Supermodular-order tolerance")->capture_default_str();
    sub->add_option("--dim-cap", cfg.dim_cap, "Largest time-grid dimension")->capture_default_str();
  };
  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("chain", cfg.chain_path, "Chain specification file (JSON)")->required();
  };
  auto add_grids = [&](CLI::App* sub) {
    cfg.grids = {"0,1", "0,0.5,1"};
    sub->add_option("--grid", cfg.grids, "Time grid, comma-separated; repeatable")
        ->default_str("'0,1' '0,0.5,1'");
  };

  auto* analyze = app.add_subcommand("analyze", "Stationary law, time reversal, structural checks");
  add_chain(analyze);
  add_common(analyze);

  auto* sm = app.add_subcommand("sm-check", "Scan law(c_high) <=_sm law(c_low) over c-pairs and grids");
  sm->add_option("chain", cfg.chain_path, "Chain specification file (JSON)");
  add_common(sm);
  add_grids(sm);
  sm->add_option("--c-list", cfg.c_list, "Ascending modulation rates")
      ->delimiter(',')
      ->default_str("0.5,1,2,4");
  sm->add_option("--pmf-x", cfg.pmf_x, "Debug: first distribution file, compared directly");
  sm->add_option("--pmf-y", cfg.pmf_y, "Debug: second distribution file");

  auto* sweep = app.add_subcommand("sweep", "Mean workload curve w(c) as CSV");
  add_chain(sweep);
  add_common(sweep);
  sweep->add_option("--c-list", cfg.c_list, "Ascending modulation rates")
      ->delimiter(',')
      ->default_str("0.05,0.25,1,4,20");
  sweep->add_option("--method", cfg.method, "auto, qbd or sim")->capture_default_str();
  sweep->add_option("--arrivals", cfg.arrivals, "Simulation horizon in arrivals")->capture_default_str();
  sweep->add_option("--sim-time", cfg.sim_time, "Simulation horizon in time units (overrides --arrivals)");
  sweep->add_option("--batches", cfg.batches, "Batch-means batch count")->capture_default_str();
  sweep->add_option("--warmup", cfg.warmup, "Discarded warm-up fraction")->capture_default_str();
  sweep->add_option("--seed", cfg.seed, "Simulation seed (sampled and printed when absent)");
  sweep->add_flag("--allow-unstable", cfg.allow_unstable, "Simulate even when rho >= 1");

  auto* bounds = app.add_subcommand("bounds", "Constant-rate and frozen-environment workload bounds");
  add_chain(bounds);
  add_common(bounds);

  auto* search = app.add_subcommand("search", "Random search for non-monotone chains ordered in c");
  add_common(search);
  add_grids(search);
  search->add_option("--c-list", cfg.c_list, "Ascending modulation rates")
      ->delimiter(',')
      ->default_str("0.5,1,2,4");
  search->add_option("--states", cfg.states, "State count of sampled chains")->capture_default_str();
  search->add_option("--budget", cfg.budget, "Number of samples")->capture_default_str();
  search->add_option("--seed", cfg.seed, "Master seed (sampled and printed when absent)");
  search->add_option("--rate-family", cfg.rate_family, "exponential or two-point")->capture_default_str();
  search->add_option("--rate", cfg.rate, "Exponential off-diagonal rate parameter")->capture_default_str();
  search->add_option("--low", cfg.low, "Two-point low value")->capture_default_str();
  search->add_option("--high", cfg.high, "Two-point high value")->capture_default_str();
  search->add_option("--p-high", cfg.p_high, "Two-point probability of the high value")->capture_default_str();
  search->add_option("--lambda-max", cfg.lambda_max, "Intensities ~ sorted Uniform(0, lambda-max)")
      ->capture_default_str();
  search->add_option("--planted", cfg.planted, "Debug: inject chains at given sample indices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  auto default_c = [&](std::initializer_list<double> values) {
    if (cfg.c_list.empty()) cfg.c_list = values;
  };

  try {
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (sm->parsed()) {
      default_c({0.5, 1.0, 2.0, 4.0});
      if (cfg.chain_path.empty() && cfg.pmf_x.empty()) {
        throw coxlab::Error(coxlab::ErrorKind::Parse, "sm-check needs a chain file or --pmf-x/--pmf-y");
      }
      return cmd_sm_check(cfg);
    }
    if (sweep->parsed()) {
      default_c({0.05, 0.25, 1.0, 4.0, 20.0});
      return cmd_sweep(cfg);
    }
    if (bounds->parsed()) return cmd_bounds(cfg);
    if (search->parsed()) {
      default_c({0.5, 1.0, 2.0, 4.0});
      return cmd_search(cfg);
    }
  } catch (const coxlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}
