#include "kinmpc/controllers.hpp"

#include <cmath>
#include <string>

namespace kinmpc {

namespace {

Eigen::MatrixXd stage_weight(const TrackingWeights & scaled, double q_psi)
{
  const double qy = scaled.w_y * scaled.w_y;
  return Eigen::Vector3d{qy, qy, q_psi}.asDiagonal();
}

HorizonWeights horizon_weights(const ControllerConfig & cfg)
{
  const TrackingWeights scaled = scale_tracking_weights(cfg.weights);
  HorizonWeights w;
  w.Q = stage_weight(scaled, cfg.q_psi);
  w.R = scaled.w_du * scaled.w_du;
  w.N = cfg.N;
  w.M = cfg.M;
  return w;
}

// Absolute pose references for stages cursor+1 .. cursor+N.
Eigen::VectorXd pose_references(const ReferencePath & path, std::size_t cursor, int N)
{
  Eigen::VectorXd ref(3 * N);
  for (int i = 0; i < N; ++i) {
    const PathSample & s = path.clamped(cursor + static_cast<std::size_t>(i) + 1);
    ref.segment<3>(3 * i) << s.x, s.y, 0.0;
  }
  return ref;
}

// Horizon Hessians span many orders of magnitude with the weights and Ts, so
// the problem is normalised to unit largest diagonal; the minimiser is unchanged.
QpSolution solve_or_throw(QpProblem qp, const ControllerConfig & cfg)
{
  const double scale = qp.H.diagonal().maxCoeff();
  if (scale > 0.0) {
    qp.H /= scale;
    qp.f /= scale;
  }
  QpSolution sol = solve_box_qp(qp, cfg.qp);
  if (sol.status != QpStatus::converged) {
    throw ControlError("QP did not converge (residual " + std::to_string(sol.kkt_residual) +
                       " after " + std::to_string(sol.iterations) + " iterations)");
  }
  return sol;
}

void require(const ControllerConfig & cfg, Variant v, const ReferencePath & path)
{
  cfg.validate();
  if (cfg.variant != v) {
    throw std::invalid_argument("controller called with config for variant " +
                                std::string(to_string(cfg.variant)));
  }
  if (path.empty()) {
    throw std::invalid_argument("empty reference path");
  }
}

ControlStep fixed_model_step(const ControllerState & ctrl, const VehicleState & plant,
                             const ReferencePath & path, const ControllerConfig & cfg,
                             const VehicleParams & params)
{
  const AffineLtiModel model = linearize_initial(params, cfg.Ts);
  const PredictionMatrices pred = build_prediction(model, cfg.N, cfg.M);
  const TrackingWeights scaled = scale_tracking_weights(cfg.weights);

  const QpProblem qp = build_move_tracking_qp(
      pred, plant.pose(), pose_references(path, ctrl.ref_cursor, cfg.N), horizon_weights(cfg),
      scaled.w_u * scaled.w_u, ctrl.last_beta, {-cfg.move_bound(), cfg.move_bound()});
  const QpSolution sol = solve_or_throw(qp, cfg);

  ControlStep out;
  out.u = sol.u[0];
  out.qp_iterations = sol.iterations;
  out.next = ctrl;
  out.next.last_beta = ctrl.last_beta + out.u;
  out.next.op = {plant.psi, plant.beta};
  out.next.ref_cursor = ctrl.ref_cursor + 1;
  out.end_of_path = out.next.ref_cursor + 1 >= path.size();
  return out;
}

}  // namespace

std::string_view to_string(Variant v)
{
  switch (v) {
    case Variant::baseline:
      return "baseline";
    case Variant::weight_tuned:
      return "weight_tuned";
    case Variant::position_sl:
      return "position_sl";
    case Variant::velocity_sl:
      return "velocity_sl";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name)
{
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) {
      return v;
    }
  }
  throw std::invalid_argument("unknown controller variant '" + std::string(name) + "'");
}

ControllerConfig ControllerConfig::defaults(Variant v)
{
  ControllerConfig cfg;
  cfg.variant = v;
  switch (v) {
    case Variant::baseline:
      break;
    case Variant::weight_tuned:
      cfg.Ts = 0.05;
      cfg.N = 20;
      cfg.weights.alpha = 2.8;
      break;
    case Variant::position_sl:
    case Variant::velocity_sl:
      cfg.Ts = 0.05;
      cfg.N = 20;
      cfg.M = 20;
      break;
  }
  return cfg;
}

void ControllerConfig::validate() const
{
  if (!(Ts > 0.0) || !std::isfinite(Ts)) {
    throw std::invalid_argument("Ts must be positive");
  }
  if (N < 1 || M < 1 || M > N) {
    throw std::invalid_argument("horizons require 1 <= M <= N");
  }
  if (!(rate_limit > 0.0) || !std::isfinite(rate_limit)) {
    throw std::invalid_argument("rate_limit must be positive");
  }
  if (!(weights.w_y >= 0.0) || !(weights.w_u >= 0.0) || !(weights.w_du >= 0.0)) {
    throw std::invalid_argument("tracking weights must be non-negative");
  }
  if (!(weights.w_du > 0.0)) {
    throw std::invalid_argument("w_du must be positive (it sets the move weight)");
  }
  if (!(weights.alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (!(q_psi >= 0.0)) {
    throw std::invalid_argument("q_psi must be non-negative");
  }
  if (!(qp.tol > 0.0) || qp.max_iter < 1) {
    throw std::invalid_argument("QP tolerance and iteration limit must be positive");
  }
}

ControllerState ControllerState::initial(const VehicleState & plant)
{
  ControllerState s;
  s.last_beta = 0.0;
  s.op = {plant.psi, plant.beta};
  s.ref_cursor = 0;
  return s;
}

ControlStep baseline_step(const ControllerState & ctrl, const VehicleState & plant,
                          const ReferencePath & path, const ControllerConfig & cfg,
                          const VehicleParams & params)
{
  require(cfg, Variant::baseline, path);
  return fixed_model_step(ctrl, plant, path, cfg, params);
}

ControlStep weight_tuned_step(const ControllerState & ctrl, const VehicleState & plant,
                              const ReferencePath & path, const ControllerConfig & cfg,
                              const VehicleParams & params)
{
  require(cfg, Variant::weight_tuned, path);
  return fixed_model_step(ctrl, plant, path, cfg, params);
}

ControlStep position_sl_step(const ControllerState & ctrl, const VehicleState & plant,
                             const ReferencePath & path, const ControllerConfig & cfg,
                             const VehicleParams & params)
{
  require(cfg, Variant::position_sl, path);
  const OperatingPoint op{plant.psi, plant.beta};
  const AffineLtiModel model = linearize_position(op, params, cfg.Ts);
  const PredictionMatrices pred = build_prediction(model, cfg.N, cfg.M);
  // Decision variables are per-stage slip moves; the model input at stage i is
  // their running sum (the slip deviation from the operating point), so the box
  // bounds every predicted slip change, not just the first.
  const QpProblem qp =
      build_move_tracking_qp(pred, plant.pose(), pose_references(path, ctrl.ref_cursor, cfg.N),
                             horizon_weights(cfg), 0.0, 0.0, {-cfg.move_bound(), cfg.move_bound()});
  const QpSolution sol = solve_or_throw(qp, cfg);

  ControlStep out;
  out.u = sol.u[0];
  out.qp_iterations = sol.iterations;
  out.next = ctrl;
  out.next.last_beta = plant.beta + out.u;
  out.next.op = op;
  out.next.ref_cursor = ctrl.ref_cursor + 1;
  out.end_of_path = out.next.ref_cursor + 1 >= path.size();
  return out;
}

ControlStep velocity_sl_step(const ControllerState & ctrl, const VehicleState & plant,
                             const ReferencePath & path, const ControllerConfig & cfg,
                             const VehicleParams & params)
{
  require(cfg, Variant::velocity_sl, path);
  const OperatingPoint op{plant.psi, plant.beta};
  const Eigen::Vector3d pose = plant.pose();

  // One-sample backward difference; before any history exists, assume the
  // plant has been moving with its current slip.
  Eigen::Vector3d delta;
  if (ctrl.prev_pose) {
    delta = pose - *ctrl.prev_pose;
  } else {
    const double course = plant.psi + plant.beta;
    delta << params.v * std::cos(course) * cfg.Ts, params.v * std::sin(course) * cfg.Ts,
        params.v / params.l_r * std::sin(plant.beta) * cfg.Ts;
  }

  const DeltaReference dref = generate_delta_refs(plant, path, ctrl.ref_cursor, params, cfg.Ts);

  ControlStep out;
  out.next = ctrl;
  out.next.prev_pose = pose;
  out.next.op = op;
  if (dref.end_of_path) {
    out.u = 0.0;
    out.next.last_beta = plant.beta;
    out.end_of_path = true;
    return out;
  }

  const DeltaLtiModel model = linearize_velocity(op, params, cfg.Ts);
  const PredictionMatrices pred = build_prediction(model, cfg.N, cfg.M);
  Eigen::VectorXd ref(3 * cfg.N);
  for (int i = 0; i < cfg.N; ++i) {
    ref.segment<3>(3 * i) << dref.dx, dref.dy, 0.0;
  }
  const QpProblem qp = build_tracking_qp(pred, delta, ref, horizon_weights(cfg),
                                         {-cfg.move_bound(), cfg.move_bound()});
  const QpSolution sol = solve_or_throw(qp, cfg);

  out.u = sol.u[0];
  out.qp_iterations = sol.iterations;
  out.next.last_beta = plant.beta + out.u;
  out.next.ref_cursor = dref.cursor;
  out.end_of_path = dref.cursor + 1 >= path.size();
  return out;
}

ControlStep controller_step(const ControllerState & ctrl, const VehicleState & plant,
                            const ReferencePath & path, const ControllerConfig & cfg,
                            const VehicleParams & params)
{
  switch (cfg.variant) {
    case Variant::baseline:
      return baseline_step(ctrl, plant, path, cfg, params);
    case Variant::weight_tuned:
      return weight_tuned_step(ctrl, plant, path, cfg, params);
    case Variant::position_sl:
      return position_sl_step(ctrl, plant, path, cfg, params);
    case Variant::velocity_sl:
      return velocity_sl_step(ctrl, plant, path, cfg, params);
  }
  throw std::invalid_argument("unknown controller variant");
}

DeltaReference generate_delta_refs(const VehicleState & plant, const ReferencePath & path,
                                   std::size_t cursor, const VehicleParams & params, double Ts)
{
  if (path.empty() || cursor >= path.size()) {
    throw std::out_of_range("reference cursor outside path");
  }
  if (!(Ts >= 0.0)) {
    throw std::invalid_argument("Ts must be non-negative");
  }
  DeltaReference out;
  out.cursor = cursor;
  if (cursor + 1 == path.size()) {
    out.end_of_path = true;
    return out;
  }

  const PathSample & here = path[cursor];
  const double course = plant.psi + plant.beta;
  const double step = params.v * Ts;
  const double x_est = here.x + step * std::cos(course);
  const double y_est = here.y + step * std::sin(course);

  // Nearest sample at or after the cursor, searched along the path until the
  // travelled distance can no longer produce a closer candidate.
  const double reach = 3.0 * step + path.spacing;
  double best = std::hypot(here.x - x_est, here.y - y_est);
  double travelled = 0.0;
  for (std::size_t j = cursor + 1; j < path.size(); ++j) {
    travelled += std::hypot(path[j].x - path[j - 1].x, path[j].y - path[j - 1].y);
    if (travelled > reach) {
      break;
    }
    const double d = std::hypot(path[j].x - x_est, path[j].y - y_est);
    if (d < best) {
      best = d;
      out.cursor = j;
    }
  }
  out.dx = path[out.cursor].x - here.x;
  out.dy = path[out.cursor].y - here.y;
  return out;
}

}  // namespace kinmpc
