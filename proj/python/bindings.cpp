#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nqn/commands.hpp"
#include "nqn/diagnostics.hpp"
#include "nqn/errors.hpp"
#include "nqn/hamiltonian.hpp"
#include "nqn/optimizer.hpp"
#include "nqn/propagator.hpp"
#include "nqn/scanner.hpp"
#include "nqn/spectrum.hpp"

namespace py = pybind11;
using namespace nqn;

namespace {

LzConvention convention_from(const std::string& name) {
    if (name == "full-coupling") return LzConvention::FullCoupling;
    if (name == "half-coupling") return LzConvention::HalfCoupling;
    throw py::value_error("convention must be \"full-coupling\" or \"half-coupling\"");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = kToolVersion;
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<ChainConfig>(m, "ChainConfig")
        .def(py::init<>())
        .def_static("with_spacing_ratio", &ChainConfig::with_spacing_ratio, py::arg("n_atoms"), py::arg("order"),
                    py::arg("a_over_rb"), py::arg("omega") = 1.0, py::arg("c6") = kRubidiumC6)
        .def_readwrite("n_atoms", &ChainConfig::n_atoms)
        .def_readwrite("spacing_um", &ChainConfig::spacing_um)
        .def_readwrite("c6", &ChainConfig::c6)
        .def_readwrite("order", &ChainConfig::order)
        .def_readwrite("omega", &ChainConfig::omega)
        .def_property_readonly("blockade_radius", &ChainConfig::blockade_radius)
        .def("validate", &ChainConfig::validate_for_target);

    py::class_<OmegaEnvelope>(m, "OmegaEnvelope")
        .def(py::init<double, double, double>(), py::arg("value") = 1.0, py::arg("rise_us") = 0.0,
             py::arg("fall_us") = 0.0)
        .def_readwrite("value", &OmegaEnvelope::value);

    py::class_<PulseSchedule>(m, "PulseSchedule")
        .def(py::init<std::vector<double>, std::vector<double>, OmegaEnvelope, double, double, double>(),
             py::arg("knot_times"), py::arg("knot_deltas"), py::arg("envelope") = OmegaEnvelope{},
             py::arg("idle_lead_us") = 0.0, py::arg("idle_tail_us") = 0.0,
             py::arg("resolution_us") = kResolutionFloorUs)
        .def_property_readonly("tau", &PulseSchedule::tau)
        .def_property_readonly("total_duration", &PulseSchedule::total_duration)
        .def_property_readonly("knot_times", &PulseSchedule::knot_times)
        .def_property_readonly("knot_deltas", &PulseSchedule::knot_deltas)
        .def("evaluate",
             [](const PulseSchedule& s, double t) {
                 const ControlPoint c = s.evaluate(t);
                 return py::make_tuple(c.omega, c.delta);
             })
        .def("with_idles", &PulseSchedule::with_idles)
        .def("to_json", [](const PulseSchedule& s) { return to_json(s).dump(); });

    py::class_<RampSpec>(m, "RampSpec")
        .def(py::init<>())
        .def_readwrite("tau_us", &RampSpec::tau_us)
        .def_readwrite("n_segments", &RampSpec::n_segments)
        .def_readwrite("idle_us", &RampSpec::idle_us);

    py::enum_<Phase>(m, "Phase")
        .value("Disordered", Phase::Disordered)
        .value("Z2", Phase::Z2)
        .value("Z3", Phase::Z3)
        .value("Z4", Phase::Z4)
        .value("Other", Phase::Other)
        .def("__str__", [](Phase p) { return to_string(p); });

    py::class_<OptimizationProblem>(m, "OptimizationProblem")
        .def(py::init([](const ChainConfig& config, const RampSpec& ramp, int restarts, std::uint64_t seed,
                         int threads, const std::string& init) {
                 OptimizationProblem p;
                 p.config = config;
                 p.ramp = ramp;
                 p.restarts = restarts;
                 p.seed = seed;
                 p.threads = threads;
                 p.init = init_mode_from_string(init);
                 return p;
             }),
             py::arg("config"), py::arg("ramp") = RampSpec{}, py::arg("restarts") = 50, py::arg("seed") = 1,
             py::arg("threads") = 1, py::arg("init") = "uniform")
        .def_readwrite("restarts", &OptimizationProblem::restarts)
        .def_readwrite("seed", &OptimizationProblem::seed);

    py::class_<OptimizationReport>(m, "OptimizationReport")
        .def_readonly("best_fidelity", &OptimizationReport::best_fidelity)
        .def_readonly("best_knots", &OptimizationReport::best_knots)
        .def_readonly("best_interior", &OptimizationReport::best_interior)
        .def_readonly("best_search_loss", &OptimizationReport::best_search_loss)
        .def_property_readonly("nqn_label", [](const OptimizationReport& r) { return r.nqn.label(); });

    m.def("target_state", [](const ChainConfig& c) { return target_state(c).to_string(); });
    m.def("blockade_basis", [](int n, int d) {
        std::vector<std::string> out;
        for (BareIndex b : blockade_basis(n, d)) out.push_back(BareState{b, n}.to_string());
        return out;
    });
    m.def("build_full", [](const ChainConfig& c, double omega, double delta) { return build_full(c, omega, delta); },
          py::arg("config"), py::arg("omega"), py::arg("delta"), "Dense H in rad/us; inputs in (2pi) MHz.");
    m.def(
        "propagate",
        [](const ChainConfig& c, const PulseSchedule& s, const StateVector& psi, double tol) {
            PropagationOptions o;
            o.tol = tol;
            return propagate(c, psi, s, 0.0, s.total_duration(), o).final_state;
        },
        py::arg("config"), py::arg("schedule"), py::arg("psi"), py::arg("tol") = 1e-8);
    m.def("schedule_fidelity", &schedule_fidelity, py::arg("config"), py::arg("schedule"), py::arg("tol") = 1e-8);
    m.def("make_nqn_schedule", [](const ChainConfig& c, const RampSpec& r, const std::vector<double>& interior) {
        return make_nqn_schedule(c, r, interior);
    });
    m.def("linear_ramp", &linear_ramp, py::arg("omega"), py::arg("delta_from"), py::arg("delta_to"),
          py::arg("duration_us"), py::arg("idle_us") = 0.0);
    m.def(
        "classify_nqn",
        [](const PulseSchedule& s) {
            const NqnClassification k = classify_nqn(s);
            py::dict d;
            d["label"] = k.label();
            d["n1"] = py::make_tuple(k.n1_start, k.n1_end);
            d["q"] = py::make_tuple(k.q_start, k.q_end);
            d["n2"] = py::make_tuple(k.n2_start, k.n2_end);
            d["delta_n1_end_over_omega"] = k.delta_n1_end;
            d["delta_q_end_over_omega"] = k.delta_q_end;
            return d;
        });
    m.def("optimize", &optimize, py::arg("problem"), py::call_guard<py::gil_scoped_release>());
    m.def("bare_crossings", py::overload_cast<const ChainConfig&>(&bare_crossings));
    m.def(
        "landau_zener",
        [](double omega, double rate, const std::string& conv) { return landau_zener(omega, rate, convention_from(conv)); },
        py::arg("omega"), py::arg("rate"), py::arg("convention") = "full-coupling");
    m.def(
        "landau_zener_rate",
        [](double omega, double p, const std::string& conv) {
            return landau_zener_rate(omega, p, convention_from(conv));
        },
        py::arg("omega"), py::arg("probability"), py::arg("convention") = "full-coupling");
    m.def("measured_fidelity", &measured_fidelity, py::arg("ideal"), py::arg("n_atoms"),
          py::arg("per_atom_error") = 0.08);
    m.def("ground_state_occupations",
          [](const ChainConfig& c, double delta) { return ground_state(c, delta).occupations; });
    m.def("classify_phase", [](const std::vector<double>& occupations) {
        const PhasePoint p = classify_phase(occupations);
        return py::make_tuple(p.label, p.order_strength);
    });
    m.def(
        "scan",
        [](const ChainConfig& c, const std::string& grid, int threads) {
            std::vector<py::tuple> rows;
            for (const PhasePoint& p : scan(ScanGrid::parse(grid), c, threads))
                rows.push_back(py::make_tuple(p.delta_over_omega, p.rb_over_a, to_string(p.label), p.order_strength));
            return rows;
        },
        py::arg("config"), py::arg("grid"), py::arg("threads") = 1);
}
