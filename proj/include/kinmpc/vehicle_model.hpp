#pragma once

#include <Eigen/Core>

namespace kinmpc {

/// Kinematic bicycle geometry and the (constant) forward speed.
struct VehicleParams
{
  double l_f{1.105};  ///< front axle to centre of mass [m]
  double l_r{1.738};  ///< rear axle to centre of mass [m]
  double v{10.0};     ///< speed [m/s]

  /// Throws std::invalid_argument unless all three are positive and finite.
  void validate() const;
};

/// Pose and slip of the plant.
struct VehicleState
{
  double x{0};
  double y{0};
  double psi{0};   ///< heading [rad]
  double beta{0};  ///< slip angle of the CoM velocity [rad]

  /// Pose (x, y, psi) as a vector.
  Eigen::Vector3d pose() const { return {x, y, psi}; }

  bool operator==(const VehicleState &) const = default;
};

/// Throws std::domain_error for non-finite fields or |beta| >= pi/2.
void validate(const VehicleState & state);

/// Slip angle produced by front steering angle `delta_f`.
/// Throws std::domain_error when |delta_f| >= pi/2.
double slip_from_steer(double delta_f, const VehicleParams & params);

/// Pose change over one step of length Ts at heading psi with slip beta held.
/// Shared by the plant and the position model so both round identically.
Eigen::Vector3d pose_increment(double psi, double beta, double Ts, const VehicleParams & params);

/// Inverse of slip_from_steer.
double steer_from_slip(double beta, const VehicleParams & params);

/// Continuous-time pose rate (xdot, ydot, psidot).
Eigen::Vector3d ct_derivative(const VehicleState & state, const VehicleParams & params);

/**
 * @brief One forward-Euler step of the plant.
 *
 * The slip increment is applied first (beta+ = beta + du) and the pose is then
 * integrated over `Ts` with the new slip held constant. Under this convention
 * the successive linearizations are exact Jacobians of this map.
 *
 * Throws std::domain_error if the resulting slip leaves (-pi/2, pi/2) and
 * std::invalid_argument if Ts <= 0 or the parameters are invalid.
 */
VehicleState step_nonlinear(const VehicleState & state, double du, double Ts,
                            const VehicleParams & params);

}  // namespace kinmpc
