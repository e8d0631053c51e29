// Python bindings for the main operations: aggregation rules, topology
// validation, tasks, attacks and the simulation driver.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "byzsgd/acceptance.hpp"
#include "byzsgd/aggregation.hpp"
#include "byzsgd/config.hpp"
#include "byzsgd/csv.hpp"
#include "byzsgd/simulation.hpp"

namespace py = pybind11;
using namespace byzsgd;

namespace {

Topology make_topology(int n_ps, int f_ps, int q_ps, int n_w, int f_w, int q_w, int d,
                       const std::string& mode, int gather_period) {
    Topology t;
    t.n_ps = n_ps;
    t.f_ps = f_ps;
    t.q_ps = q_ps;
    t.n_w = n_w;
    t.f_w = f_w;
    t.q_w = q_w;
    t.d = d;
    t.mode = mode == "sync" ? Mode::sync : Mode::async;
    t.gather_period = gather_period;
    return validate_topology(t);
}

AttackStrategy strategy_from(const std::string& name) {
    if (name == "reversed") return AttackStrategy::reversed;
    if (name == "partial_drop") return AttackStrategy::partial_drop;
    if (name == "random") return AttackStrategy::random;
    if (name == "lie_model") return AttackStrategy::lie_model;
    if (name == "lie_gradient") return AttackStrategy::lie_gradient;
    if (name == "mute") return AttackStrategy::mute;
    throw std::invalid_argument("unknown attack strategy '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Byzantine-resilient SGD simulator";

    py::class_<Topology>(m, "Topology")
        .def_readonly("n_ps", &Topology::n_ps)
        .def_readonly("f_ps", &Topology::f_ps)
        .def_readonly("q_ps", &Topology::q_ps)
        .def_readonly("n_w", &Topology::n_w)
        .def_readonly("f_w", &Topology::f_w)
        .def_readonly("q_w", &Topology::q_w)
        .def_readonly("d", &Topology::d)
        .def_readonly("gather_period", &Topology::gather_period)
        .def_readonly("warnings", &Topology::warnings)
        .def_property_readonly("mode", [](const Topology& t) {
            return t.mode == Mode::sync ? "sync" : "async";
        });

    m.def("validate_topology", &make_topology, py::arg("n_ps"), py::arg("f_ps"),
          py::arg("q_ps"), py::arg("n_w"), py::arg("f_w"), py::arg("q_w"), py::arg("d"),
          py::arg("mode") = "async", py::arg("gather_period") = 1);

    m.def("learning_rate",
          [](double eta0, double decay, long t) { return learning_rate({eta0, decay}, t); },
          py::arg("eta0"), py::arg("decay"), py::arg("t"));
    m.def("compute_gather_period", &compute_gather_period, py::arg("lipschitz"),
          py::arg("eta0"));

    m.def("average", [](const std::vector<ParamVector>& vs) { return average(vs); });
    m.def("median", [](const std::vector<ParamVector>& vs) { return median(vs); });
    m.def("mda", [](const std::vector<ParamVector>& vs, int f) { return mda(vs, f); },
          py::arg("vectors"), py::arg("f"));
    m.def("mda_indices",
          [](const std::vector<ParamVector>& vs, int f) { return mda_select(vs, f).indices; },
          py::arg("vectors"), py::arg("f"));
    m.def("l2_diameter", [](const std::vector<ParamVector>& vs) { return l2_diameter(vs); });
    m.def("coordwise_diameter_sum",
          [](const std::vector<ParamVector>& vs) { return coordwise_diameter_sum(vs); });
    m.def("quantile", [](std::vector<double> values, double p) {
        return quantile(std::move(values), p);
    });

    py::class_<Task>(m, "Task")
        .def_static("quadratic", &Task::quadratic, py::arg("theta_star"),
                    py::arg("noise_sigma") = 0.0, py::arg("batch_ref") = 16)
        .def_static("logistic", &Task::logistic, py::arg("d"), py::arg("samples"),
                    py::arg("dataset_seed"), py::arg("flip_rate") = 0.05,
                    py::arg("batch_ref") = 16)
        .def("loss", &Task::loss)
        .def("true_gradient", &Task::true_gradient)
        .def("lipschitz_constant", &Task::lipschitz_constant)
        .def("sample_gradient",
             [](const Task& t, const ParamVector& theta, int batch, std::uint64_t seed) {
                 Rng rng(seed);
                 return t.sample_gradient(theta, batch, rng);
             },
             py::arg("theta"), py::arg("batch"), py::arg("seed"))
        .def_property_readonly("d", &Task::dimension);

    m.def("measure_variance_norm_ratio",
          [](const Task& task, const ParamVector& theta, const std::vector<int>& batches,
             int trials, int n_w, int f_w, std::uint64_t seed) {
              Rng rng(seed);
              const AssumptionReport rep =
                  measure_variance_norm_ratio(task, theta, batches, trials, n_w, f_w, rng);
              py::dict out;
              out["kappa_margin"] = rep.kappa_margin;
              out["sigma_prime_est"] = rep.sigma_prime_est;
              out["eq3_holds"] = rep.eq3_holds;
              py::dict ratios;
              for (const auto& [b, r] : rep.ratio_by_batch) ratios[py::int_(b)] = r;
              out["ratio_by_batch"] = ratios;
              return out;
          },
          py::arg("task"), py::arg("theta"), py::arg("batch_sizes"), py::arg("trials"),
          py::arg("n_w"), py::arg("f_w"), py::arg("seed"));

    m.def("forge_model",
          [](const std::string& strategy, const ParamVector& honest, double scale, double z,
             double drop_fraction, std::uint64_t seed) {
              AttackSpec spec;
              spec.target = AttackTarget::server_models;
              spec.strategy = strategy_from(strategy);
              spec.scale = scale;
              spec.z = z;
              spec.drop_fraction = drop_fraction;
              Rng rng(seed);
              return forge_model(spec, honest, rng);
          },
          py::arg("strategy"), py::arg("honest_model"), py::arg("scale") = 1.0,
          py::arg("z") = 1.035, py::arg("drop_fraction") = 0.10, py::arg("seed") = 0);

    m.def("forge_gradients",
          [](const std::string& strategy, const std::vector<ParamVector>& honest, int byz_count,
             int receiver, double z_sigma, std::uint64_t seed) {
              AttackSpec spec;
              spec.target = AttackTarget::worker_gradients;
              spec.strategy = strategy_from(strategy);
              spec.z_sigma = z_sigma;
              Rng rng(seed);
              return forge_gradients(spec, honest, byz_count, receiver, rng);
          },
          py::arg("strategy"), py::arg("honest_gradients"), py::arg("byz_count"),
          py::arg("receiver") = 0, py::arg("z_sigma") = 0.0, py::arg("seed") = 0);

    m.def("run_from_config",
          [](const std::string& config_path, const std::string& csv_path) {
              const LoadedConfig cfg = load_config(config_path);
              const SimResult res = run(cfg.sim);
              if (!csv_path.empty()) emit_csv(res.trace, csv_path);
              const auto& last = res.trace.back();
              py::dict out;
              out["steps"] = cfg.sim.steps;
              out["final_grad_norm"] = last.grad_norm;
              out["final_delta"] = last.delta;
              out["false_negative_ratio"] = res.filters.false_negative_ratio();
              out["warnings"] = res.warnings;
              return out;
          },
          py::arg("config_path"), py::arg("csv_path") = "");

    m.def("run_acceptance",
          [](const std::string& suite) {
              py::list out;
              for (const auto& r : run_acceptance(suite)) {
                  py::dict d;
                  d["name"] = r.name;
                  d["passed"] = r.passed;
                  d["detail"] = r.detail;
                  d["seconds"] = r.seconds;
                  out.append(d);
              }
              return out;
          },
          py::arg("suite"));
    m.def("acceptance_suites", &acceptance_suites);
}
