#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kinmpc/controllers.hpp"
#include "kinmpc/reference_path.hpp"
#include "kinmpc/vehicle_model.hpp"

namespace kinmpc {

// ---------------------------------------------------------------------------
// Reference generators

/// Placement of samples along a curve y(x).
enum class Sampling
{
  x_uniform,   ///< x advances by exactly v*Ts per sample
  arc_length,  ///< consecutive samples are v*Ts apart along the curve
  chord,       ///< consecutive samples are v*Ts apart in a straight line
};

std::string_view to_string(Sampling s);
/// Throws std::invalid_argument for unknown names.
Sampling sampling_from_string(std::string_view name);

ReferencePath make_straight_path(double duration, double Ts, double v, double heading = 0.0);

/// x advances v*Ts per sample; y is 0 at the first sample and `amplitude` afterwards.
ReferencePath make_step_path(double amplitude, double duration, double Ts, double v);

/// y = amplitude * sin(2 pi x / wavelength).
ReferencePath make_sine_path(double amplitude, double wavelength, double duration, double Ts,
                             double v, Sampling sampling = Sampling::x_uniform);

struct CompletePathConfig
{
  double lead_length{50.0};
  double amplitude{4.0};
  double wavelength{50.0};
  double periods{2.0};
  double trail_length{50.0};
  Sampling sampling{Sampling::chord};
};

/// Straight lead, sine periods starting at phase 0, straight trail. Continuous
/// in position only: the heading jumps where the sine meets the straights.
ReferencePath make_complete_path(const CompletePathConfig & cfg, double Ts, double v);

/// Counter-clockwise circle starting at the origin heading +x.
ReferencePath make_circle_path(double radius, double duration, double Ts, double v);

// ---------------------------------------------------------------------------
// Disturbance

enum class DisturbanceKind
{
  none,
  gaussian_output,
};

struct DisturbanceSpec
{
  DisturbanceKind kind{DisturbanceKind::none};
  double amplitude{0.05};  ///< standard deviation on the measured output [m]
  std::uint64_t seed{1};
  bool apply_to_x{false};  ///< also perturb measured x (independent stream)
};

/**
 * @brief Zero-mean Gaussian sample for step k.
 *
 * Box-Muller over two uniforms drawn from a SplitMix64 hash of (seed, k), so
 * the value depends on nothing but (seed, k, amplitude). Returns 0 when the
 * kind is none or the amplitude is 0.
 */
double gaussian_noise(const DisturbanceSpec & spec, std::uint64_t k);

// ---------------------------------------------------------------------------
// Closed loop

/// One sample of a closed-loop run. `u` is the move applied at the start of
/// this interval (0 on the final row).
struct TraceRow
{
  double t{0};
  VehicleState state{};
  double delta_f{0};
  double measured_x{0};
  double measured_y{0};
  double x_ref{0};
  double y_ref{0};
  double u{0};
};

struct SimResult
{
  std::vector<TraceRow> trace;
  double ssd{0};
  std::vector<double> iter_times;  ///< controller wall time per step [s]
  double total_time{0};
  bool ok{true};
  std::string error;

  double time_per_iteration() const;
};

/// Sum over rows of squared position error against the reference.
double sum_squared_difference(std::span<const TraceRow> rows);

/// Plant at the first path sample, heading along the path, zero slip.
VehicleState initial_state_for(const ReferencePath & path);

/**
 * @brief Receding-horizon simulation of one controller against the nonlinear plant.
 *
 * Each step the controller sees the measured output (true pose plus optional
 * disturbance), its move is checked against the rate bound, and the true state
 * advances through step_nonlinear. A controller failure or a rate violation
 * ends the run with ok = false and the trace recorded so far.
 */
SimResult run_closed_loop(const ControllerConfig & cfg, const ReferencePath & path,
                          const DisturbanceSpec & disturbance, const VehicleParams & params,
                          std::optional<VehicleState> initial = std::nullopt);

}  // namespace kinmpc
