#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kinmpc/controllers.hpp"
#include "kinmpc/reference_path.hpp"
#include "kinmpc/simulator.hpp"
#include "kinmpc/vehicle_model.hpp"

namespace kinmpc {

/// Validation failure in a scenario document. `where()` is "line N" for the
/// document or "override 'section.key=value'" for command-line overrides.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string where, const std::string & message)
      : std::runtime_error(where.empty() ? message : where + ": " + message),
        where_(std::move(where))
  {
  }

  const std::string & where() const noexcept { return where_; }

private:
  std::string where_;
};

enum class PathKind
{
  straight,
  step,
  sine,
  complete,
  circle,
};

std::string_view to_string(PathKind k);
PathKind path_kind_from_string(std::string_view name);

struct PathConfig
{
  PathKind kind{PathKind::step};
  double duration{10.0};  ///< [s]
  double amplitude{1.0};  ///< step height / sine amplitude [m]
  double wavelength{40.0};
  double heading{0.0};  ///< straight path direction [rad]
  double radius{30.0};  ///< circle radius [m]
  double lead_length{50.0};
  double periods{2.0};
  double trail_length{50.0};
  Sampling sampling{Sampling::x_uniform};
  /// When set, every selected controller must use this sampling interval.
  std::optional<double> Ts{};
};

struct ScenarioConfig
{
  std::string name{"scenario"};
  PathConfig path{};
  std::vector<Variant> variants{Variant::baseline};
  std::array<ControllerConfig, 4> controllers{
      ControllerConfig::defaults(Variant::baseline),
      ControllerConfig::defaults(Variant::weight_tuned),
      ControllerConfig::defaults(Variant::position_sl),
      ControllerConfig::defaults(Variant::velocity_sl)};
  DisturbanceSpec disturbance{};
  VehicleParams vehicle{};
  std::string output_dir{"out"};
  Variant sweep_variant{Variant::weight_tuned};
  std::vector<double> sweep_alphas{0.7, 2.8, 11.2};

  ControllerConfig & controller(Variant v) { return controllers[static_cast<std::size_t>(v)]; }
  const ControllerConfig & controller(Variant v) const
  {
    return controllers[static_cast<std::size_t>(v)];
  }

  /// The scenario path sampled at `Ts` (each controller runs on its own grid).
  ReferencePath make_path(double Ts) const;
};

/**
 * @brief Parse a key=value scenario document.
 *
 * Sections: [scenario], [path], [vehicle], [disturbance], [controller]
 * (applied to every variant), one section per variant name (applied after
 * [controller]) and [sweep]. `#` and `;` start comments. Overrides have the
 * form "section.key=value" and are applied after the document, in order.
 * Unset path keys take defaults that depend on the path kind.
 *
 * Throws ConfigError, anchored to the offending line or override.
 */
ScenarioConfig parse_config(std::string_view text, const std::vector<std::string> & overrides = {});

/// Fully explicit document that parses back to an equal configuration.
std::string to_config_text(const ScenarioConfig & cfg);

}  // namespace kinmpc
