#include "kinmpc/vehicle_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kinmpc {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double rear_ratio(const VehicleParams & p) { return p.l_r / (p.l_f + p.l_r); }

}  // namespace

void VehicleParams::validate() const
{
  auto positive = [](double value) { return std::isfinite(value) && value > 0.0; };
  if (!positive(l_f) || !positive(l_r) || !positive(v)) {
    throw std::invalid_argument("vehicle parameters l_f, l_r, v must be positive and finite");
  }
}

void validate(const VehicleState & s)
{
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.psi) ||
      !std::isfinite(s.beta)) {
    throw std::domain_error("vehicle state has non-finite entries");
  }
  if (std::abs(s.beta) >= kHalfPi) {
    throw std::domain_error("slip angle outside (-pi/2, pi/2): " + std::to_string(s.beta));
  }
}

double slip_from_steer(double delta_f, const VehicleParams & params)
{
  if (!(std::abs(delta_f) < kHalfPi)) {
    throw std::domain_error("steering angle outside (-pi/2, pi/2)");
  }
  return std::atan(rear_ratio(params) * std::tan(delta_f));
}

double steer_from_slip(double beta, const VehicleParams & params)
{
  if (!(std::abs(beta) < kHalfPi)) {
    throw std::domain_error("slip angle outside (-pi/2, pi/2)");
  }
  return std::atan(std::tan(beta) / rear_ratio(params));
}

Eigen::Vector3d ct_derivative(const VehicleState & s, const VehicleParams & p)
{
  validate(s);
  const double course = s.psi + s.beta;
  return {p.v * std::cos(course), p.v * std::sin(course), p.v / p.l_r * std::sin(s.beta)};
}

Eigen::Vector3d pose_increment(double psi, double beta, double Ts, const VehicleParams & p)
{
  const double course = psi + beta;
  return {p.v * std::cos(course) * Ts, p.v * std::sin(course) * Ts,
          p.v / p.l_r * std::sin(beta) * Ts};
}

VehicleState step_nonlinear(const VehicleState & s, double du, double Ts, const VehicleParams & p)
{
  if (!(Ts > 0.0) || !std::isfinite(Ts)) {
    throw std::invalid_argument("sampling time must be positive");
  }
  p.validate();
  VehicleState next = s;
  next.beta = s.beta + du;
  validate(next);

  const Eigen::Vector3d d = pose_increment(s.psi, next.beta, Ts, p);
  next.x = s.x + d[0];
  next.y = s.y + d[1];
  next.psi = s.psi + d[2];
  return next;
}

}  // namespace kinmpc
