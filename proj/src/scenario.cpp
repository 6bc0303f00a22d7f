#include "kinmpc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace kinmpc {

namespace {

struct Entry
{
  std::string section;
  std::string key;
  std::string value;
  std::string where;
};

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s)
{
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    if (!item.empty()) {
      out.emplace_back(item);
    }
    if (comma == std::string_view::npos) {
      break;
    }
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<Entry> tokenize(std::string_view text)
{
  std::vector<Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);

    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(where, "unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) {
        throw ConfigError(where, "empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where, "expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(where, "key outside of any section");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(where, "missing key");
    }
    entries.push_back({section, std::string(key), std::string(trim(line.substr(eq + 1))), where});
  }
  return entries;
}

Entry parse_override(const std::string & text)
{
  const std::string where = "override '" + text + "'";
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError(where, "expected section.key=value");
  }
  Entry e{std::string(trim(std::string_view(text).substr(0, dot))),
          std::string(trim(std::string_view(text).substr(dot + 1, eq - dot - 1))),
          std::string(trim(std::string_view(text).substr(eq + 1))), where};
  if (e.section.empty() || e.key.empty()) {
    throw ConfigError(where, "expected section.key=value");
  }
  return e;
}

double to_double(const Entry & e)
{
  double v = 0.0;
  const char * end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(e.where, "'" + e.key + "' expects a number, got '" + e.value + "'");
  }
  return v;
}

template <typename Int>
Int to_integer(const Entry & e)
{
  Int v = 0;
  const char * end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(e.where, "'" + e.key + "' expects an integer, got '" + e.value + "'");
  }
  return v;
}

bool to_bool(const Entry & e)
{
  if (e.value == "true" || e.value == "1" || e.value == "yes") {
    return true;
  }
  if (e.value == "false" || e.value == "0" || e.value == "no") {
    return false;
  }
  throw ConfigError(e.where, "'" + e.key + "' expects true or false, got '" + e.value + "'");
}

double positive(const Entry & e)
{
  const double v = to_double(e);
  if (!(v > 0.0)) {
    throw ConfigError(e.where, "'" + e.key + "' must be positive");
  }
  return v;
}

double non_negative(const Entry & e)
{
  const double v = to_double(e);
  if (!(v >= 0.0)) {
    throw ConfigError(e.where, "'" + e.key + "' must be non-negative");
  }
  return v;
}

int positive_int(const Entry & e)
{
  const int v = to_integer<int>(e);
  if (v < 1) {
    throw ConfigError(e.where, "'" + e.key + "' must be at least 1");
  }
  return v;
}

template <typename Fn>
auto named(const Entry & e, Fn && from_string)
{
  try {
    return from_string(e.value);
  } catch (const std::invalid_argument & ex) {
    throw ConfigError(e.where, ex.what());
  }
}

std::string fmt(double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_variant_section(const std::string & s)
{
  return std::any_of(std::begin(kAllVariants), std::end(kAllVariants),
                     [&](Variant v) { return to_string(v) == s; });
}

void apply_controller_key(ControllerConfig & c, const Entry & e)
{
  if (e.key == "Ts") {
    c.Ts = positive(e);
  } else if (e.key == "N") {
    c.N = positive_int(e);
  } else if (e.key == "M") {
    c.M = positive_int(e);
  } else if (e.key == "w_y") {
    c.weights.w_y = non_negative(e);
  } else if (e.key == "w_u") {
    c.weights.w_u = non_negative(e);
  } else if (e.key == "w_du") {
    c.weights.w_du = positive(e);
  } else if (e.key == "alpha") {
    c.weights.alpha = positive(e);
  } else if (e.key == "q_psi") {
    c.q_psi = non_negative(e);
  } else if (e.key == "rate_limit") {
    c.rate_limit = positive(e);
  } else if (e.key == "qp_tol") {
    c.qp.tol = positive(e);
  } else if (e.key == "qp_max_iter") {
    c.qp.max_iter = positive_int(e);
  } else {
    throw ConfigError(e.where, "unknown key '" + e.key + "' in section [" + e.section + "]");
  }
}

void apply_path_defaults(PathConfig & p)
{
  const PathKind kind = p.kind;
  p = PathConfig{};
  p.kind = kind;
  switch (kind) {
    case PathKind::straight:
      p.duration = 30.0;
      p.amplitude = 0.0;
      break;
    case PathKind::step:
      break;
    case PathKind::sine:
      p.duration = 30.0;
      break;
    case PathKind::complete:
      p.amplitude = 4.0;
      p.wavelength = 50.0;
      p.sampling = Sampling::chord;
      break;
    case PathKind::circle:
      p.duration = 20.0;
      p.amplitude = 0.0;
      break;
  }
}

void apply_path_key(PathConfig & p, const Entry & e)
{
  if (e.key == "kind") {
    // Resolved before the other keys.
  } else if (e.key == "duration") {
    p.duration = positive(e);
  } else if (e.key == "amplitude") {
    p.amplitude = to_double(e);
  } else if (e.key == "wavelength") {
    p.wavelength = positive(e);
  } else if (e.key == "heading") {
    p.heading = to_double(e);
  } else if (e.key == "radius") {
    p.radius = positive(e);
  } else if (e.key == "lead_length") {
    p.lead_length = non_negative(e);
  } else if (e.key == "periods") {
    p.periods = non_negative(e);
  } else if (e.key == "trail_length") {
    p.trail_length = non_negative(e);
  } else if (e.key == "sampling") {
    p.sampling = named(e, sampling_from_string);
  } else if (e.key == "Ts") {
    p.Ts = positive(e);
  } else {
    throw ConfigError(e.where, "unknown key '" + e.key + "' in section [path]");
  }
}

void apply_entry(ScenarioConfig & cfg, const Entry & e)
{
  if (e.section == "scenario") {
    if (e.key == "name") {
      cfg.name = e.value;
    } else if (e.key == "variants") {
      cfg.variants.clear();
      for (const std::string & name : split_list(e.value)) {
        cfg.variants.push_back(named(Entry{e.section, e.key, name, e.where}, variant_from_string));
      }
      if (cfg.variants.empty()) {
        throw ConfigError(e.where, "at least one controller variant is required");
      }
    } else if (e.key == "output_dir") {
      if (e.value.empty()) {
        throw ConfigError(e.where, "output_dir must not be empty");
      }
      cfg.output_dir = e.value;
    } else {
      throw ConfigError(e.where, "unknown key '" + e.key + "' in section [scenario]");
    }
  } else if (e.section == "path") {
    apply_path_key(cfg.path, e);
  } else if (e.section == "vehicle") {
    if (e.key == "l_f") {
      cfg.vehicle.l_f = positive(e);
    } else if (e.key == "l_r") {
      cfg.vehicle.l_r = positive(e);
    } else if (e.key == "v") {
      cfg.vehicle.v = positive(e);
    } else {
      throw ConfigError(e.where, "unknown key '" + e.key + "' in section [vehicle]");
    }
  } else if (e.section == "disturbance") {
    if (e.key == "kind") {
      if (e.value == "none") {
        cfg.disturbance.kind = DisturbanceKind::none;
      } else if (e.value == "gaussian_output") {
        cfg.disturbance.kind = DisturbanceKind::gaussian_output;
      } else {
        throw ConfigError(e.where, "unknown disturbance kind '" + e.value + "'");
      }
    } else if (e.key == "amplitude") {
      cfg.disturbance.amplitude = non_negative(e);
    } else if (e.key == "seed") {
      cfg.disturbance.seed = to_integer<std::uint64_t>(e);
    } else if (e.key == "apply_to_x") {
      cfg.disturbance.apply_to_x = to_bool(e);
    } else {
      throw ConfigError(e.where, "unknown key '" + e.key + "' in section [disturbance]");
    }
  } else if (e.section == "controller") {
    for (ControllerConfig & c : cfg.controllers) {
      apply_controller_key(c, e);
    }
  } else if (is_variant_section(e.section)) {
    apply_controller_key(cfg.controller(variant_from_string(e.section)), e);
  } else if (e.section == "sweep") {
    if (e.key == "variant") {
      cfg.sweep_variant = named(e, variant_from_string);
      if (cfg.sweep_variant != Variant::baseline && cfg.sweep_variant != Variant::weight_tuned) {
        throw ConfigError(e.where, "alpha sweeps apply to baseline or weight_tuned");
      }
    } else if (e.key == "alphas") {
      cfg.sweep_alphas.clear();
      for (const std::string & item : split_list(e.value)) {
        cfg.sweep_alphas.push_back(positive(Entry{e.section, e.key, item, e.where}));
      }
      if (cfg.sweep_alphas.empty()) {
        throw ConfigError(e.where, "alphas must list at least one value");
      }
    } else {
      throw ConfigError(e.where, "unknown key '" + e.key + "' in section [sweep]");
    }
  } else {
    throw ConfigError(e.where, "unknown section [" + e.section + "]");
  }
}

// Where a controller key was last set for variant v, if anywhere.
std::string last_where(const std::vector<Entry> & entries, Variant v, const std::string & key)
{
  std::string out;
  for (const Entry & e : entries) {
    if (e.key == key && (e.section == "controller" || e.section == to_string(v))) {
      out = e.where;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(PathKind k)
{
  switch (k) {
    case PathKind::straight:
      return "straight";
    case PathKind::step:
      return "step";
    case PathKind::sine:
      return "sine";
    case PathKind::complete:
      return "complete";
    case PathKind::circle:
      return "circle";
  }
  return "unknown";
}

PathKind path_kind_from_string(std::string_view name)
{
  for (PathKind k : {PathKind::straight, PathKind::step, PathKind::sine, PathKind::complete,
                     PathKind::circle}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw std::invalid_argument("unknown path kind '" + std::string(name) + "'");
}

ReferencePath ScenarioConfig::make_path(double Ts) const
{
  const double v = vehicle.v;
  switch (path.kind) {
    case PathKind::straight:
      return make_straight_path(path.duration, Ts, v, path.heading);
    case PathKind::step:
      return make_step_path(path.amplitude, path.duration, Ts, v);
    case PathKind::sine:
      return make_sine_path(path.amplitude, path.wavelength, path.duration, Ts, v, path.sampling);
    case PathKind::complete: {
      CompletePathConfig c;
      c.lead_length = path.lead_length;
      c.amplitude = path.amplitude;
      c.wavelength = path.wavelength;
      c.periods = path.periods;
      c.trail_length = path.trail_length;
      c.sampling = path.sampling;
      return make_complete_path(c, Ts, v);
    }
    case PathKind::circle:
      return make_circle_path(path.radius, path.duration, Ts, v);
  }
  throw std::invalid_argument("unknown path kind");
}

ScenarioConfig parse_config(std::string_view text, const std::vector<std::string> & overrides)
{
  std::vector<Entry> entries = tokenize(text);
  for (const std::string & o : overrides) {
    entries.push_back(parse_override(o));
  }

  ScenarioConfig cfg;
  // The path kind selects defaults for the remaining path keys, so it is
  // resolved first; [controller] applies to all variants before the
  // per-variant sections refine it.
  for (const Entry & e : entries) {
    if (e.section == "path" && e.key == "kind") {
      cfg.path.kind = named(e, path_kind_from_string);
    }
  }
  apply_path_defaults(cfg.path);
  for (const Entry & e : entries) {
    if (!is_variant_section(e.section)) {
      apply_entry(cfg, e);
    }
  }
  for (const Entry & e : entries) {
    if (is_variant_section(e.section)) {
      apply_entry(cfg, e);
    }
  }

  std::string path_ts_where;
  std::string path_duration_where;
  for (const Entry & e : entries) {
    if (e.section == "path" && e.key == "Ts") {
      path_ts_where = e.where;
    }
    if (e.section == "path" && e.key == "duration") {
      path_duration_where = e.where;
    }
  }

  for (Variant v : kAllVariants) {
    const ControllerConfig & c = cfg.controller(v);
    if (c.M > c.N) {
      const std::string w = last_where(entries, v, "M");
      throw ConfigError(w.empty() ? last_where(entries, v, "N") : w,
                        std::string(to_string(v)) + ": control horizon M exceeds horizon N");
    }
  }
  for (Variant v : cfg.variants) {
    const ControllerConfig & c = cfg.controller(v);
    if (cfg.path.Ts && std::abs(*cfg.path.Ts - c.Ts) > 1e-12 * std::max(1.0, c.Ts)) {
      const std::string w = last_where(entries, v, "Ts");
      throw ConfigError(w.empty() ? path_ts_where : w,
                        "inconsistent Ts: path is sampled at " + fmt(*cfg.path.Ts) + " s but " +
                            std::string(to_string(v)) + " uses " + fmt(c.Ts) + " s");
    }
    // The complete path ends where its geometry ends, so duration does not apply.
    if (cfg.path.kind != PathKind::complete && c.Ts * c.N > cfg.path.duration) {
      std::string w = last_where(entries, v, "Ts");
      if (w.empty()) {
        w = last_where(entries, v, "N");
      }
      throw ConfigError(w.empty() ? path_duration_where : w,
                        "inconsistent Ts: " + std::string(to_string(v)) + " horizon Ts*N = " +
                            fmt(c.Ts * c.N) + " s exceeds the " + fmt(cfg.path.duration) +
                            " s scenario");
    }
  }
  return cfg;
}

std::string to_config_text(const ScenarioConfig & cfg)
{
  std::ostringstream out;
  out << "[scenario]\n";
  out << "name = " << cfg.name << '\n';
  out << "variants = ";
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    out << (i ? ", " : "") << to_string(cfg.variants[i]);
  }
  out << '\n';
  out << "output_dir = " << cfg.output_dir << "\n\n";

  const PathConfig & p = cfg.path;
  out << "[path]\n";
  out << "kind = " << to_string(p.kind) << '\n';
  out << "duration = " << fmt(p.duration) << '\n';
  out << "amplitude = " << fmt(p.amplitude) << '\n';
  out << "wavelength = " << fmt(p.wavelength) << '\n';
  out << "heading = " << fmt(p.heading) << '\n';
  out << "radius = " << fmt(p.radius) << '\n';
  out << "lead_length = " << fmt(p.lead_length) << '\n';
  out << "periods = " << fmt(p.periods) << '\n';
  out << "trail_length = " << fmt(p.trail_length) << '\n';
  out << "sampling = " << to_string(p.sampling) << '\n';
  if (p.Ts) {
    out << "Ts = " << fmt(*p.Ts) << '\n';
  }
  out << '\n';

  out << "[vehicle]\n";
  out << "l_f = " << fmt(cfg.vehicle.l_f) << '\n';
  out << "l_r = " << fmt(cfg.vehicle.l_r) << '\n';
  out << "v = " << fmt(cfg.vehicle.v) << "\n\n";

  out << "[disturbance]\n";
  out << "kind = "
      << (cfg.disturbance.kind == DisturbanceKind::none ? "none" : "gaussian_output") << '\n';
  out << "amplitude = " << fmt(cfg.disturbance.amplitude) << '\n';
  out << "seed = " << cfg.disturbance.seed << '\n';
  out << "apply_to_x = " << (cfg.disturbance.apply_to_x ? "true" : "false") << "\n\n";

  for (Variant v : kAllVariants) {
    const ControllerConfig & c = cfg.controller(v);
    out << '[' << to_string(v) << "]\n";
    out << "Ts = " << fmt(c.Ts) << '\n';
    out << "N = " << c.N << '\n';
    out << "M = " << c.M << '\n';
    out << "w_y = " << fmt(c.weights.w_y) << '\n';
    out << "w_u = " << fmt(c.weights.w_u) << '\n';
    out << "w_du = " << fmt(c.weights.w_du) << '\n';
    out << "alpha = " << fmt(c.weights.alpha) << '\n';
    out << "q_psi = " << fmt(c.q_psi) << '\n';
    out << "rate_limit = " << fmt(c.rate_limit) << '\n';
    out << "qp_tol = " << fmt(c.qp.tol) << '\n';
    out << "qp_max_iter = " << c.qp.max_iter << "\n\n";
  }

  out << "[sweep]\n";
  out << "variant = " << to_string(cfg.sweep_variant) << '\n';
  out << "alphas = ";
  for (std::size_t i = 0; i < cfg.sweep_alphas.size(); ++i) {
    out << (i ? ", " : "") << fmt(cfg.sweep_alphas[i]);
  }
  out << '\n';
  return out.str();
}

}  // namespace kinmpc
