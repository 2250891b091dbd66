#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coxlab/io.hpp"
#include "coxlab/order.hpp"
#include "coxlab/queue.hpp"

namespace py = pybind11;
using namespace coxlab;

namespace {

std::vector<TimeGrid> to_grids(const std::vector<std::vector<double>>& grids) {
  std::vector<TimeGrid> out;
  for (const auto& g : grids) out.emplace_back(g);
  return out;
}

py::dict report_dict(const MonotonicityReport& r) {
  py::list violations;
  for (const auto& v : r.violations) {
    violations.append(py::make_tuple(v.row, v.threshold, v.gap));
  }
  py::dict d;
  d["monotone"] = r.monotone;
  d["violations"] = violations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_coxlab, m) {
  m.doc() = "Modulated Cox/G/1 workload and supermodular-order tools";

  static py::exception<Error> error(m, "CoxlabError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object kind = py::str(std::string(to_string(e.kind())));
      PyErr_SetObject(error.ptr(), py::make_tuple(py::str(e.what()), kind).ptr());
    }
  });

  py::class_<Ctmc>(m, "Ctmc")
      .def(py::init([](const Matrix& q, std::vector<double> lambda, std::vector<std::string> labels) {
             return Ctmc::from_rates(q, std::move(lambda), std::move(labels));
           }),
           py::arg("Q"), py::arg("lam"), py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("generator", &Ctmc::generator)
      .def_property_readonly("lam", &Ctmc::lambda)
      .def_property_readonly("pi", &Ctmc::pi)
      .def_property_readonly("labels", &Ctmc::labels)
      .def_property_readonly("input_index", &Ctmc::input_index)
      .def_property_readonly("mean_intensity", &Ctmc::mean_intensity)
      .def_property_readonly("max_exit_rate", &Ctmc::max_exit_rate)
      .def("__len__", &Ctmc::size);

  py::class_<GridDistribution>(m, "GridDistribution")
      .def(py::init<std::vector<double>, std::size_t, std::vector<double>>(), py::arg("levels"),
           py::arg("dim"), py::arg("pmf"))
      .def_property_readonly("levels", &GridDistribution::levels)
      .def_property_readonly("dim", &GridDistribution::dim)
      .def_property_readonly("pmf", &GridDistribution::pmf)
      .def("marginal", &GridDistribution::marginal);

  py::class_<ExponentialService>(m, "Exponential")
      .def(py::init<double>(), py::arg("rate"))
      .def_readonly("rate", &ExponentialService::rate);
  py::class_<DeterministicService>(m, "Deterministic")
      .def(py::init<double>(), py::arg("value"))
      .def_readonly("value", &DeterministicService::value);
  py::class_<ErlangService>(m, "Erlang")
      .def(py::init<int, double>(), py::arg("shape"), py::arg("rate"))
      .def_readonly("shape", &ErlangService::shape)
      .def_readonly("rate", &ErlangService::rate);
  py::class_<HyperexponentialService>(m, "Hyperexponential")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("probs"), py::arg("rates"))
      .def_readonly("probs", &HyperexponentialService::probs)
      .def_readonly("rates", &HyperexponentialService::rates);

  m.def("load_chain", [](const std::string& path) {
    auto file = io::load_chain(path);
    return py::make_tuple(file.chain, file.service ? py::cast(*file.service) : py::none());
  }, py::arg("path"), "Returns (chain, service or None) from a chain file.");

  m.def("modulate", &modulate, py::arg("chain"), py::arg("c"));
  m.def("time_reverse", [](const Ctmc& chain) { return time_reverse(chain); }, py::arg("chain"));
  m.def("transition_probabilities",
        [](const Ctmc& chain, double t) { return transition_probabilities(chain, t).matrix(); },
        py::arg("chain"), py::arg("t"));
  m.def("finite_dimensional_law",
        [](const Ctmc& chain, double c, std::vector<double> times) {
          return finite_dimensional_law(chain, c, TimeGrid(std::move(times)));
        },
        py::arg("chain"), py::arg("c"), py::arg("times"));

  m.def("check_stochastic_monotonicity",
        [](const Matrix& p) { return report_dict(check_stochastic_monotonicity(TransitionMatrix(p))); },
        py::arg("P"));
  m.def("check_generator_monotonicity",
        [](const Ctmc& chain, std::optional<double> eta) {
          return report_dict(check_generator_monotonicity(chain, eta));
        },
        py::arg("chain"), py::arg("eta") = py::none());
  m.def("is_reversible", [](const Ctmc& chain) { return is_reversible(chain); }, py::arg("chain"));
  m.def("check_ccp_structure",
        [](const Ctmc& chain, double tol) {
          const auto ccp = check_ccp_structure(chain, tol);
          return py::make_tuple(ccp.holds, ccp.alpha);
        },
        py::arg("chain"), py::arg("tol") = 1e-12);

  m.def("sm_check",
        [](const GridDistribution& x, const GridDistribution& y, double epsilon) {
          const auto v = sm_check(x, y, epsilon);
          py::dict d;
          d["verdict"] = std::string(to_string(v.status));
          d["lp_optimum"] = v.lp_optimum;
          d["witness"] = v.witness ? py::cast(v.witness->phi) : py::none();
          return d;
        },
        py::arg("x"), py::arg("y"), py::arg("epsilon") = 1e-9);
  m.def("sm_decrease_scan",
        [](const Ctmc& chain, const std::vector<double>& c_list,
           const std::vector<std::vector<double>>& grids, double epsilon, std::size_t threads) {
          const auto tg = to_grids(grids);
          return py::module_::import("json").attr("loads")(
              io::to_json(sm_decrease_scan(chain, c_list, tg, epsilon, threads), tg).dump());
        },
        py::arg("chain"), py::arg("c_list"), py::arg("grids"), py::arg("epsilon") = 1e-9,
        py::arg("threads") = 1);

  m.def("stability_check",
        [](const Ctmc& chain, const ServiceDistribution& service) {
          const auto s = stability_check({chain, 1.0, service});
          return py::make_tuple(s.stable, s.rho, s.lambda_bar);
        },
        py::arg("chain"), py::arg("service"));
  m.def("qbd_mean_workload",
        [](const Ctmc& chain, double c, double mu) {
          return qbd_mean_workload({chain, c, ExponentialService{mu}}).value;
        },
        py::arg("chain"), py::arg("c"), py::arg("mu"));
  m.def("simulate_mean_workload",
        [](const Ctmc& chain, double c, const ServiceDistribution& service, double arrivals,
           std::size_t batches, double warmup, std::uint64_t seed) {
          SimulationOptions opt;
          opt.horizon.amount = arrivals;
          opt.batches = batches;
          opt.warmup = warmup;
          opt.seed = seed;
          const auto e = simulate_mean_workload({chain, c, service}, opt);
          py::dict d;
          d["value"] = e.value;
          d["half_width"] = e.half_width;
          d["waiting_time"] = e.waiting_time;
          d["waiting_half_width"] = e.waiting_half_width;
          return d;
        },
        py::arg("chain"), py::arg("c"), py::arg("service"), py::arg("arrivals") = 1e6,
        py::arg("batches") = 32, py::arg("warmup") = 0.1, py::arg("seed") = 0);
  m.def("rolski_bounds",
        [](const Ctmc& chain, const ServiceDistribution& service) {
          const auto b = rolski_bounds({chain, 1.0, service});
          py::dict d;
          d["lower"] = b.workload_lower;
          d["upper"] = b.workload_upper;
          d["waiting_lower"] = b.waiting_lower;
          d["waiting_upper"] = b.waiting_upper;
          return d;
        },
        py::arg("chain"), py::arg("service"));
  m.def("w_curve",
        [](const Ctmc& chain, const ServiceDistribution& service, const std::vector<double>& c_list,
           const std::string& method, double arrivals, std::uint64_t seed, std::size_t threads) {
          CurveMethod cm = CurveMethod::Auto;
          if (method == "qbd") {
            cm = CurveMethod::Qbd;
          } else if (method == "sim") {
            cm = CurveMethod::Sim;
          } else if (method != "auto") {
            throw Error(ErrorKind::InvalidArgument, "method must be auto, qbd or sim");
          }
          SimulationOptions opt;
          opt.horizon.amount = arrivals;
          opt.seed = seed;
          const auto curve = w_curve(chain, service, c_list, cm, opt, threads);
          py::list points;
          for (const auto& p : curve.points) {
            points.append(py::make_tuple(p.c, p.estimate.value, p.estimate.half_width, p.pair_flag));
          }
          return py::make_tuple(std::string(to_string(curve.verdict)), points);
        },
        py::arg("chain"), py::arg("service"), py::arg("c_list"), py::arg("method") = "auto",
        py::arg("arrivals") = 1e6, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("counterexample_search",
        [](std::size_t states, std::uint64_t budget, std::uint64_t seed,
           const std::vector<double>& c_list, const std::vector<std::vector<double>>& grids,
           std::size_t threads) {
          SearchConfig cfg;
          cfg.states = states;
          cfg.budget = budget;
          cfg.seed = seed;
          cfg.c_list = c_list;
          cfg.grids = to_grids(grids);
          const auto r = counterexample_search(cfg, threads);
          py::dict d;
          py::list candidates;
          for (const auto& s : r.candidates) candidates.append(s.sample_index);
          py::list violations;
          for (const auto& s : r.violations) violations.append(s.sample_index);
          d["samples_tried"] = r.samples_tried;
          d["candidates"] = candidates;
          d["violations"] = violations;
          return d;
        },
        py::arg("states") = 3, py::arg("budget") = 100, py::arg("seed") = 0,
        py::arg("c_list") = std::vector<double>{0.5, 1.0, 2.0, 4.0},
        py::arg("grids") = std::vector<std::vector<double>>{{0.0, 1.0}, {0.0, 0.5, 1.0}},
        py::arg("threads") = 1);
}
