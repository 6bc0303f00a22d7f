#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kinmpc/experiment.hpp"

namespace py = pybind11;
using namespace kinmpc;

namespace {

// Trace as an (n, 9) array with the CSV column order.
Eigen::MatrixXd trace_matrix(const std::vector<TraceRow> & trace)
{
  Eigen::MatrixXd m(static_cast<Eigen::Index>(trace.size()), 9);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const TraceRow & r = trace[static_cast<std::size_t>(k)];
    m.row(k) << r.t, r.state.x, r.state.y, r.state.psi, r.state.beta, r.delta_f, r.x_ref,
        r.y_ref, r.u;
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Kinematic bicycle MPC core";
  m.attr("__version__") = KINMPC_VERSION;
  m.attr("TRACE_COLUMNS") =
      py::make_tuple("t", "x", "y", "psi", "beta", "delta_f", "x_ref", "y_ref", "u");

  py::register_exception<QpError>(m, "QpError", PyExc_RuntimeError);
  py::register_exception<ControlError>(m, "ControlError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def(py::init([](double l_f, double l_r, double v) { return VehicleParams{l_f, l_r, v}; }),
           py::arg("l_f") = 1.105, py::arg("l_r") = 1.738, py::arg("v") = 10.0)
      .def_readwrite("l_f", &VehicleParams::l_f)
      .def_readwrite("l_r", &VehicleParams::l_r)
      .def_readwrite("v", &VehicleParams::v);

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init([](double x, double y, double psi, double beta) {
             return VehicleState{x, y, psi, beta};
           }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("psi") = 0.0, py::arg("beta") = 0.0)
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def_readwrite("psi", &VehicleState::psi)
      .def_readwrite("beta", &VehicleState::beta)
      .def("pose", &VehicleState::pose)
      .def("__repr__", [](const VehicleState & s) {
        return "VehicleState(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) +
               ", psi=" + std::to_string(s.psi) + ", beta=" + std::to_string(s.beta) + ")";
      });

  m.def("step_nonlinear", &step_nonlinear, py::arg("state"), py::arg("du"), py::arg("Ts"),
        py::arg("params") = VehicleParams{});
  m.def("slip_from_steer", &slip_from_steer, py::arg("delta_f"),
        py::arg("params") = VehicleParams{});
  m.def("steer_from_slip", &steer_from_slip, py::arg("beta"), py::arg("params") = VehicleParams{});

  py::class_<OperatingPoint>(m, "OperatingPoint")
      .def(py::init([](double psi, double beta) { return OperatingPoint{psi, beta}; }),
           py::arg("psi") = 0.0, py::arg("beta") = 0.0)
      .def_readwrite("psi", &OperatingPoint::psi)
      .def_readwrite("beta", &OperatingPoint::beta);

  py::class_<AffineLtiModel>(m, "AffineLtiModel")
      .def_readonly("A", &AffineLtiModel::A)
      .def_readonly("B", &AffineLtiModel::B)
      .def_readonly("K", &AffineLtiModel::K)
      .def_readonly("Ts", &AffineLtiModel::Ts);
  py::class_<DeltaLtiModel>(m, "DeltaLtiModel")
      .def_readonly("A", &DeltaLtiModel::A)
      .def_readonly("B", &DeltaLtiModel::B)
      .def_readonly("Ts", &DeltaLtiModel::Ts);

  m.def("linearize_initial", &linearize_initial, py::arg("params"), py::arg("Ts"));
  m.def("linearize_position", &linearize_position, py::arg("op"), py::arg("params"),
        py::arg("Ts"));
  m.def("linearize_velocity", &linearize_velocity, py::arg("op"), py::arg("params"),
        py::arg("Ts"));

  m.def(
      "solve_box_qp",
      [](const Eigen::MatrixXd & H, const Eigen::VectorXd & f, const Eigen::VectorXd & lb,
         const Eigen::VectorXd & ub, double tol, int max_iter) {
        const QpSolution sol = solve_box_qp({H, f, lb, ub}, {tol, max_iter});
        py::dict out;
        out["u"] = sol.u;
        out["iterations"] = sol.iterations;
        out["converged"] = sol.status == QpStatus::converged;
        out["kkt_residual"] = sol.kkt_residual;
        return out;
      },
      py::arg("H"), py::arg("f"), py::arg("lb"), py::arg("ub"), py::arg("tol") = 1e-8,
      py::arg("max_iter") = 10'000,
      "Minimise 0.5 u'Hu + f'u subject to lb <= u <= ub.");

  py::enum_<Variant>(m, "Variant")
      .value("baseline", Variant::baseline)
      .value("weight_tuned", Variant::weight_tuned)
      .value("position_sl", Variant::position_sl)
      .value("velocity_sl", Variant::velocity_sl);

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def_static("defaults", &ControllerConfig::defaults, py::arg("variant"))
      .def_readwrite("variant", &ControllerConfig::variant)
      .def_readwrite("Ts", &ControllerConfig::Ts)
      .def_readwrite("N", &ControllerConfig::N)
      .def_readwrite("M", &ControllerConfig::M)
      .def_readwrite("q_psi", &ControllerConfig::q_psi)
      .def_readwrite("rate_limit", &ControllerConfig::rate_limit)
      .def_property(
          "alpha", [](const ControllerConfig & c) { return c.weights.alpha; },
          [](ControllerConfig & c, double a) { c.weights.alpha = a; })
      .def_property(
          "w_y", [](const ControllerConfig & c) { return c.weights.w_y; },
          [](ControllerConfig & c, double w) { c.weights.w_y = w; })
      .def_property(
          "w_u", [](const ControllerConfig & c) { return c.weights.w_u; },
          [](ControllerConfig & c, double w) { c.weights.w_u = w; })
      .def_property(
          "w_du", [](const ControllerConfig & c) { return c.weights.w_du; },
          [](ControllerConfig & c, double w) { c.weights.w_du = w; })
      .def("validate", &ControllerConfig::validate);

  py::class_<ReferencePath>(m, "ReferencePath")
      .def_readonly("Ts", &ReferencePath::Ts)
      .def_readonly("spacing", &ReferencePath::spacing)
      .def("__len__", &ReferencePath::size)
      .def("points", [](const ReferencePath & p) {
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(p.size()), 3);
        for (std::size_t k = 0; k < p.size(); ++k) {
          pts.row(static_cast<Eigen::Index>(k)) << p[k].t, p[k].x, p[k].y;
        }
        return pts;
      });

  m.def("make_straight_path", &make_straight_path, py::arg("duration"), py::arg("Ts"),
        py::arg("v"), py::arg("heading") = 0.0);
  m.def("make_step_path", &make_step_path, py::arg("amplitude"), py::arg("duration"),
        py::arg("Ts"), py::arg("v"));
  m.def(
      "make_sine_path",
      [](double a, double wl, double duration, double Ts, double v, const std::string & sampling) {
        return make_sine_path(a, wl, duration, Ts, v, sampling_from_string(sampling));
      },
      py::arg("amplitude"), py::arg("wavelength"), py::arg("duration"), py::arg("Ts"),
      py::arg("v"), py::arg("sampling") = "x_uniform");

  py::class_<DisturbanceSpec>(m, "DisturbanceSpec")
      .def(py::init([](double amplitude, std::uint64_t seed, bool apply_to_x) {
             DisturbanceSpec d;
             d.kind = amplitude > 0.0 ? DisturbanceKind::gaussian_output : DisturbanceKind::none;
             d.amplitude = amplitude;
             d.seed = seed;
             d.apply_to_x = apply_to_x;
             return d;
           }),
           py::arg("amplitude") = 0.0, py::arg("seed") = 1, py::arg("apply_to_x") = false)
      .def_readonly("amplitude", &DisturbanceSpec::amplitude)
      .def_readonly("seed", &DisturbanceSpec::seed);
  m.def("gaussian_noise", &gaussian_noise, py::arg("spec"), py::arg("k"));

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("ssd", &SimResult::ssd)
      .def_readonly("ok", &SimResult::ok)
      .def_readonly("error", &SimResult::error)
      .def_readonly("total_time", &SimResult::total_time)
      .def_readonly("iter_times", &SimResult::iter_times)
      .def_property_readonly("time_per_iteration", &SimResult::time_per_iteration)
      .def_property_readonly("trace",
                             [](const SimResult & r) { return trace_matrix(r.trace); });

  m.def(
      "run_closed_loop",
      [](const ControllerConfig & cfg, const ReferencePath & path, const DisturbanceSpec & d,
         const VehicleParams & params) { return run_closed_loop(cfg, path, d, params); },
      py::arg("config"), py::arg("path"), py::arg("disturbance") = DisturbanceSpec{},
      py::arg("params") = VehicleParams{}, py::call_guard<py::gil_scoped_release>());

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def_readwrite("variants", &ScenarioConfig::variants)
      .def("controller", py::overload_cast<Variant>(&ScenarioConfig::controller, py::const_))
      .def("make_path", &ScenarioConfig::make_path, py::arg("Ts"))
      .def("to_text", &to_config_text);
  m.def("parse_config", &parse_config, py::arg("text"),
        py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "run_compare",
      [](const ScenarioConfig & cfg) {
        const CompareReport report = run_compare(cfg);
        py::list rows;
        for (const SummaryRow & r : report.summary) {
          rows.append(py::dict(py::arg("model") = r.model, py::arg("ssd") = r.ssd,
                               py::arg("time_per_iteration") = r.time_per_iteration,
                               py::arg("total_time") = r.total_time));
        }
        return py::make_tuple(rows, report.all_ok());
      },
      py::arg("config"), "Returns (summary rows sorted by ssd, all_ok).");

  m.def(
      "sweep_alpha",
      [](const ScenarioConfig & cfg) {
        py::list rows;
        for (const AlphaRow & r : sweep_alpha(cfg)) {
          rows.append(py::dict(py::arg("alpha") = r.alpha, py::arg("rise_time") = r.rise_time,
                               py::arg("ssd") = r.ssd, py::arg("ok") = r.ok));
        }
        return rows;
      },
      py::arg("config"));
}
