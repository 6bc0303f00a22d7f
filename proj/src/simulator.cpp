#include "kinmpc/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kinmpc {

namespace {

using CurveFn = std::function<double(double)>;

std::size_t sample_count(double duration, double Ts)
{
  if (!(duration > 0.0) || !(Ts > 0.0) || !std::isfinite(duration) || !std::isfinite(Ts)) {
    throw std::invalid_argument("duration and Ts must be positive");
  }
  return static_cast<std::size_t>(std::ceil(duration / Ts - 1e-9)) + 1;
}

void check_speed(double v)
{
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("speed must be positive");
  }
}

ReferencePath timed(std::vector<std::pair<double, double>> points, double Ts, double spacing,
                    double heading)
{
  ReferencePath path;
  path.Ts = Ts;
  path.spacing = spacing;
  path.initial_heading = heading;
  path.samples.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    path.samples.push_back({static_cast<double>(k) * Ts, points[k].first, points[k].second});
  }
  return path;
}

/**
 * Walks y(x) from x = 0 and emits points whose arc-length separation is
 * `spacing`. Integration uses Simpson's rule on substeps that never straddle a
 * breakpoint (where y' may jump); each crossing is refined by Newton on s(x).
 */
std::vector<std::pair<double, double>> arc_length_samples(const CurveFn & y, const CurveFn & dy,
                                                          double x_end, double spacing,
                                                          std::size_t max_count,
                                                          std::vector<double> breakpoints)
{
  auto speed = [&](double x) { return std::sqrt(1.0 + dy(x) * dy(x)); };
  auto arc = [&](double a, double b) {
    return (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
  };
  std::sort(breakpoints.begin(), breakpoints.end());

  std::vector<std::pair<double, double>> out;
  out.emplace_back(0.0, y(0.0));
  const double h = spacing / 64.0;
  double x = 0.0;
  double s = 0.0;
  double target = spacing;
  while (out.size() < max_count && x < x_end) {
    double x_next = std::min(x + h, x_end);
    for (double bp : breakpoints) {
      if (bp > x && bp < x_next) {
        x_next = bp;
        break;
      }
    }
    const double ds = arc(x, x_next);
    while (s + ds >= target && out.size() < max_count) {
      double xt = x + (target - s) / ds * (x_next - x);
      for (int it = 0; it < 4; ++it) {
        xt -= (s + arc(x, xt) - target) / speed(xt);
      }
      out.emplace_back(xt, y(xt));
      target += spacing;
    }
    s += ds;
    x = x_next;
  }
  return out;
}

/**
 * Walks y(x) from x = 0 and emits points whose straight-line distance from
 * the previous point is exactly `spacing`. A plant that moves `spacing` per
 * step in a straight line can visit every sample.
 */
std::vector<std::pair<double, double>> chord_samples(const CurveFn & y, double x_end,
                                                     double spacing, std::size_t max_count)
{
  std::vector<std::pair<double, double>> out;
  out.emplace_back(0.0, y(0.0));
  const double h = spacing / 64.0;
  while (out.size() < max_count) {
    const auto [px, py] = out.back();
    auto dist = [&](double x) { return std::hypot(x - px, y(x) - py); };
    // Bracket the first crossing of the circle of radius `spacing`.
    double lo = px;
    double hi = px + h;
    while (hi <= x_end && dist(hi) < spacing) {
      lo = hi;
      hi += h;
    }
    if (hi > x_end) {
      if (!(x_end > lo) || dist(x_end) < spacing) {
        break;
      }
      hi = x_end;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (dist(mid) < spacing ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    out.emplace_back(x, y(x));
  }
  return out;
}

std::vector<std::pair<double, double>> curve_samples(Sampling sampling, const CurveFn & y,
                                                     const CurveFn & dy, double x_end,
                                                     double spacing, std::size_t max_count,
                                                     std::vector<double> breakpoints = {})
{
  switch (sampling) {
    case Sampling::x_uniform: {
      std::vector<std::pair<double, double>> out;
      for (std::size_t k = 0; k < max_count; ++k) {
        const double x = spacing * static_cast<double>(k);
        if (x > x_end + 1e-9 * spacing) {
          break;
        }
        out.emplace_back(x, y(x));
      }
      return out;
    }
    case Sampling::arc_length:
      return arc_length_samples(y, dy, x_end, spacing, max_count, std::move(breakpoints));
    case Sampling::chord:
      return chord_samples(y, x_end, spacing, max_count);
  }
  throw std::invalid_argument("unknown sampling");
}

std::uint64_t splitmix64(std::uint64_t z)
{
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kXStreamOffset = 0xD1B54A32D192ED03ULL;

}  // namespace

std::string_view to_string(Sampling s)
{
  switch (s) {
    case Sampling::x_uniform:
      return "x_uniform";
    case Sampling::arc_length:
      return "arc_length";
    case Sampling::chord:
      return "chord";
  }
  return "unknown";
}

Sampling sampling_from_string(std::string_view name)
{
  for (Sampling s : {Sampling::x_uniform, Sampling::arc_length, Sampling::chord}) {
    if (to_string(s) == name) {
      return s;
    }
  }
  throw std::invalid_argument("unknown sampling '" + std::string(name) + "'");
}

void ReferencePath::validate() const
{
  if (samples.empty()) {
    throw std::invalid_argument("reference path is empty");
  }
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const PathSample & s = samples[k];
    if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
      throw std::invalid_argument("reference path has non-finite samples");
    }
    if (k > 0 && !(s.t > samples[k - 1].t)) {
      throw std::invalid_argument("reference path times must be strictly increasing");
    }
  }
}

ReferencePath make_straight_path(double duration, double Ts, double v, double heading)
{
  check_speed(v);
  const std::size_t n = sample_count(duration, Ts);
  std::vector<std::pair<double, double>> pts(n);
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = v * Ts * static_cast<double>(k);
    pts[k] = {d * c, d * s};
  }
  return timed(std::move(pts), Ts, v * Ts, heading);
}

ReferencePath make_step_path(double amplitude, double duration, double Ts, double v)
{
  check_speed(v);
  const std::size_t n = sample_count(duration, Ts);
  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t k = 0; k < n; ++k) {
    pts[k] = {v * Ts * static_cast<double>(k), k == 0 ? 0.0 : amplitude};
  }
  return timed(std::move(pts), Ts, v * Ts, 0.0);
}

ReferencePath make_sine_path(double amplitude, double wavelength, double duration, double Ts,
                             double v, Sampling sampling)
{
  check_speed(v);
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  const std::size_t n = sample_count(duration, Ts);
  const double k_wave = 2.0 * std::numbers::pi / wavelength;
  const CurveFn y = [=](double x) { return amplitude * std::sin(k_wave * x); };
  const CurveFn dy = [=](double x) { return amplitude * k_wave * std::cos(k_wave * x); };

  auto pts = curve_samples(sampling, y, dy, std::numeric_limits<double>::infinity(), v * Ts, n);
  return timed(std::move(pts), Ts, v * Ts, std::atan(dy(0.0)));
}

ReferencePath make_complete_path(const CompletePathConfig & cfg, double Ts, double v)
{
  check_speed(v);
  if (!(Ts > 0.0) || !(cfg.lead_length >= 0.0) || !(cfg.trail_length >= 0.0) ||
      !(cfg.wavelength > 0.0) || !(cfg.periods >= 0.0)) {
    throw std::invalid_argument("invalid complete path configuration");
  }
  const double sine_start = cfg.lead_length;
  const double sine_end = sine_start + cfg.periods * cfg.wavelength;
  const double x_end = sine_end + cfg.trail_length;
  if (!(x_end > 0.0)) {
    throw std::invalid_argument("complete path has zero length");
  }
  const double k_wave = 2.0 * std::numbers::pi / cfg.wavelength;
  const CurveFn y = [=](double x) {
    return (x > sine_start && x < sine_end) ? cfg.amplitude * std::sin(k_wave * (x - sine_start))
                                            : 0.0;
  };
  const CurveFn dy = [=](double x) {
    return (x >= sine_start && x < sine_end)
               ? cfg.amplitude * k_wave * std::cos(k_wave * (x - sine_start))
               : 0.0;
  };
  auto pts = curve_samples(cfg.sampling, y, dy, x_end, v * Ts,
                           std::numeric_limits<std::size_t>::max(), {sine_start, sine_end});
  return timed(std::move(pts), Ts, v * Ts, std::atan(dy(0.0)));
}

ReferencePath make_circle_path(double radius, double duration, double Ts, double v)
{
  check_speed(v);
  if (!(radius > 0.0)) {
    throw std::invalid_argument("radius must be positive");
  }
  const std::size_t n = sample_count(duration, Ts);
  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = v * Ts * static_cast<double>(k) / radius;
    pts[k] = {radius * std::sin(theta), radius * (1.0 - std::cos(theta))};
  }
  return timed(std::move(pts), Ts, v * Ts, 0.0);
}

double gaussian_noise(const DisturbanceSpec & spec, std::uint64_t k)
{
  if (spec.kind == DisturbanceKind::none || spec.amplitude == 0.0) {
    return 0.0;
  }
  if (!(spec.amplitude > 0.0)) {
    throw std::invalid_argument("disturbance amplitude must be non-negative");
  }
  const std::uint64_t key = splitmix64(spec.seed);
  const std::uint64_t a = splitmix64(key + 2 * k);
  const std::uint64_t b = splitmix64(key + 2 * k + 1);
  constexpr double kUnit = 0x1.0p-53;
  const double u1 = static_cast<double>((a >> 11) + 1) * kUnit;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * kUnit;        // [0, 1)
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return spec.amplitude * z;
}

double SimResult::time_per_iteration() const
{
  return iter_times.empty() ? 0.0 : total_time / static_cast<double>(iter_times.size());
}

double sum_squared_difference(std::span<const TraceRow> rows)
{
  double total = 0.0;
  for (const TraceRow & r : rows) {
    const double ex = r.state.x - r.x_ref;
    const double ey = r.state.y - r.y_ref;
    total += ex * ex + ey * ey;
  }
  return total;
}

VehicleState initial_state_for(const ReferencePath & path)
{
  path.validate();
  return {path[0].x, path[0].y, path.initial_heading, 0.0};
}

SimResult run_closed_loop(const ControllerConfig & cfg, const ReferencePath & path,
                          const DisturbanceSpec & disturbance, const VehicleParams & params,
                          std::optional<VehicleState> initial)
{
  params.validate();
  cfg.validate();
  path.validate();
  if (std::abs(path.Ts - cfg.Ts) > 1e-12 * std::max(1.0, cfg.Ts)) {
    throw std::invalid_argument("path sampling interval does not match controller Ts");
  }
  if (!(disturbance.amplitude >= 0.0)) {
    throw std::invalid_argument("disturbance amplitude must be non-negative");
  }

  DisturbanceSpec x_channel = disturbance;
  x_channel.seed = disturbance.seed + kXStreamOffset;

  VehicleState state = initial ? *initial : initial_state_for(path);
  validate(state);
  ControllerState ctrl = ControllerState::initial(state);

  SimResult result;
  result.trace.reserve(path.size());
  const double bound = cfg.move_bound() + 1e-9;

  auto make_row = [&](std::size_t k, const VehicleState & s) {
    TraceRow row;
    row.t = static_cast<double>(k) * cfg.Ts;
    row.state = s;
    row.delta_f = steer_from_slip(s.beta, params);
    const PathSample & ref = path.clamped(k);
    row.x_ref = ref.x;
    row.y_ref = ref.y;
    row.measured_x = s.x + (disturbance.apply_to_x ? gaussian_noise(x_channel, k) : 0.0);
    row.measured_y = s.y + gaussian_noise(disturbance, k);
    return row;
  };

  for (std::size_t k = 0;; ++k) {
    TraceRow row = make_row(k, state);
    if (k + 1 >= path.size()) {
      result.trace.push_back(row);
      break;
    }
    VehicleState measured = state;
    measured.x = row.measured_x;
    measured.y = row.measured_y;

    ControlStep step;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      step = controller_step(ctrl, measured, path, cfg, params);
      const auto t1 = std::chrono::steady_clock::now();
      const double dt = std::chrono::duration<double>(t1 - t0).count();
      result.iter_times.push_back(dt);
      result.total_time += dt;

      if (!(std::abs(step.u) <= bound)) {
        throw ControlError("rate limit violated at step " + std::to_string(k));
      }
      row.u = step.u;
      state = step_nonlinear(state, step.u, cfg.Ts, params);
    } catch (const std::exception & e) {
      result.ok = false;
      result.error = e.what();
      row.u = 0.0;
      result.trace.push_back(row);
      break;
    }
    result.trace.push_back(row);
    ctrl = step.next;

    if (step.end_of_path) {
      result.trace.push_back(make_row(k + 1, state));
      break;
    }
  }

  result.ssd = sum_squared_difference(result.trace);
  return result;
}

}  // namespace kinmpc
