#include "kinmpc/linearization.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kinmpc {

namespace {

void check(const OperatingPoint & op, double Ts)
{
  if (!std::isfinite(op.psi) || !std::isfinite(op.beta) ||
      std::abs(op.beta) >= std::numbers::pi / 2.0) {
    throw std::domain_error("invalid operating point");
  }
  if (!(Ts >= 0.0) || !std::isfinite(Ts)) {
    throw std::invalid_argument("sampling time must be non-negative");
  }
}

// d(step)/d(beta) at the operating point, scaled by Ts.
Eigen::Vector3d slip_column(const OperatingPoint & op, const VehicleParams & p, double Ts)
{
  const double course = op.psi + op.beta;
  return Ts * Eigen::Vector3d{-p.v * std::sin(course), p.v * std::cos(course),
                              p.v / p.l_r * std::cos(op.beta)};
}

}  // namespace

AffineLtiModel linearize_initial(const VehicleParams & p, double Ts)
{
  check(OperatingPoint{}, Ts);
  AffineLtiModel m;
  m.Ts = Ts;
  m.input_kind = InputKind::slip;
  m.A = Eigen::Matrix3d::Identity();
  m.A(1, 2) = Ts * p.v;
  m.B = {0.0, Ts * p.v, Ts * p.v / p.l_r};
  m.K = {p.v * Ts, 0.0, 0.0};
  return m;
}

AffineLtiModel linearize_position(const OperatingPoint & op, const VehicleParams & p, double Ts)
{
  check(op, Ts);
  AffineLtiModel m;
  m.Ts = Ts;
  m.input_kind = InputKind::slip_increment;
  m.A = Eigen::Matrix3d::Identity();
  m.B = slip_column(op, p, Ts);
  // The plant's own increment, so the zero-input prediction is bit-exact.
  m.K = pose_increment(op.psi, op.beta, Ts, p);
  return m;
}

DeltaLtiModel linearize_velocity(const OperatingPoint & op, const VehicleParams & p, double Ts)
{
  check(op, Ts);
  const double course = op.psi + op.beta;
  DeltaLtiModel m;
  m.Ts = Ts;
  m.A = Eigen::Matrix3d::Identity();
  m.A(0, 2) = -p.v * std::sin(course) * Ts;
  m.A(1, 2) = p.v * std::cos(course) * Ts;
  m.B = slip_column(op, p, Ts);
  return m;
}

}  // namespace kinmpc
