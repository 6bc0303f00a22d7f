#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "kinmpc/box_qp.hpp"
#include "kinmpc/horizon_qp.hpp"
#include "kinmpc/linearization.hpp"
#include "kinmpc/reference_path.hpp"
#include "kinmpc/vehicle_model.hpp"

namespace kinmpc {

enum class Variant
{
  baseline,      ///< fixed initial-point model, Table-1 style defaults
  weight_tuned,  ///< same law, shorter sampling time and longer horizon
  position_sl,   ///< successive linearization of the absolute pose model
  velocity_sl,   ///< successive linearization of the increment model
};

std::string_view to_string(Variant v);
/// Throws std::invalid_argument for unknown names.
Variant variant_from_string(std::string_view name);

inline constexpr Variant kAllVariants[] = {Variant::baseline, Variant::weight_tuned,
                                           Variant::position_sl, Variant::velocity_sl};

struct ControllerConfig
{
  Variant variant{Variant::baseline};
  double Ts{0.2};
  int N{10};
  int M{5};
  TrackingWeights weights{};
  double q_psi{0.0};       ///< heading weight; references are positional
  double rate_limit{0.5};  ///< slip rate bound [rad/s]
  QpOptions qp{};

  /// Documented per-variant defaults.
  static ControllerConfig defaults(Variant v);

  double move_bound() const { return rate_limit * Ts; }
  void validate() const;
};

/// Raised when a controller cannot produce a move (e.g. the QP did not converge).
class ControlError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ControllerState
{
  double last_beta{0};
  OperatingPoint op{};
  std::size_t ref_cursor{0};
  /// Previous measured pose, used for the increment model.
  std::optional<Eigen::Vector3d> prev_pose{};

  /// Initial state for a plant starting at `plant`.
  static ControllerState initial(const VehicleState & plant);
};

struct ControlStep
{
  double u{0};  ///< slip increment applied over the coming interval [rad]
  ControllerState next{};
  int qp_iterations{0};
  bool end_of_path{false};
};

/// Baseline law: tracking QP on the fixed small-angle model, optimised over slip moves.
ControlStep baseline_step(const ControllerState & ctrl, const VehicleState & plant,
                          const ReferencePath & path, const ControllerConfig & cfg,
                          const VehicleParams & params);

/// Same pipeline as baseline_step; the difference lives entirely in cfg.
ControlStep weight_tuned_step(const ControllerState & ctrl, const VehicleState & plant,
                              const ReferencePath & path, const ControllerConfig & cfg,
                              const VehicleParams & params);

/// Re-linearizes the pose model at the measured (psi, beta) every call.
ControlStep position_sl_step(const ControllerState & ctrl, const VehicleState & plant,
                             const ReferencePath & path, const ControllerConfig & cfg,
                             const VehicleParams & params);

/// Tracks one-sample increments generated by generate_delta_refs.
ControlStep velocity_sl_step(const ControllerState & ctrl, const VehicleState & plant,
                             const ReferencePath & path, const ControllerConfig & cfg,
                             const VehicleParams & params);

/// Dispatches on cfg.variant.
ControlStep controller_step(const ControllerState & ctrl, const VehicleState & plant,
                            const ReferencePath & path, const ControllerConfig & cfg,
                            const VehicleParams & params);

struct DeltaReference
{
  double dx{0};
  double dy{0};
  std::size_t cursor{0};
  bool end_of_path{false};
};

/**
 * @brief Increment reference for the velocity model.
 *
 * Projects the current reference sample one interval ahead along the plant's
 * course angle, picks the nearest path sample at or after `cursor`, and returns
 * its offset from the current reference sample. When `cursor` is already the
 * last sample the result is zero with end_of_path set.
 */
DeltaReference generate_delta_refs(const VehicleState & plant, const ReferencePath & path,
                                   std::size_t cursor, const VehicleParams & params, double Ts);

}  // namespace kinmpc
