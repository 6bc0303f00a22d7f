#pragma once

#include <Eigen/Core>

#include "kinmpc/vehicle_model.hpp"

namespace kinmpc {

/// What the scalar input of an affine model stands for.
enum class InputKind
{
  slip,            ///< absolute slip angle beta
  slip_increment,  ///< slip change relative to the operating point
};

/// x+ = A x + B u + K over the pose (x, y, psi).
struct AffineLtiModel
{
  Eigen::Matrix3d A{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d B{Eigen::Vector3d::Zero()};
  Eigen::Vector3d K{Eigen::Vector3d::Zero()};
  double Ts{0};
  InputKind input_kind{InputKind::slip};

  Eigen::Vector3d step(const Eigen::Vector3d & x, double u) const { return A * x + B * u + K; }
};

/// d+ = A d + B du over per-sample pose increments (dx, dy, dpsi). No drift term.
struct DeltaLtiModel
{
  Eigen::Matrix3d A{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d B{Eigen::Vector3d::Zero()};
  double Ts{0};

  Eigen::Vector3d step(const Eigen::Vector3d & d, double du) const { return A * d + B * du; }
};

struct OperatingPoint
{
  double psi{0};
  double beta{0};
};

/// Small-angle model about psi = beta = 0 with the slip itself as input.
AffineLtiModel linearize_initial(const VehicleParams & params, double Ts);

/// First-order expansion of step_nonlinear in the slip increment at `op`; A = I.
AffineLtiModel linearize_position(const OperatingPoint & op, const VehicleParams & params,
                                  double Ts);

/// Increment-form model: states are one-sample pose differences, input is the
/// per-sample slip change.
DeltaLtiModel linearize_velocity(const OperatingPoint & op, const VehicleParams & params,
                                 double Ts);

}  // namespace kinmpc
