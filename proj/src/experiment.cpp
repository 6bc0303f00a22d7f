#include "kinmpc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>

#include "json.hpp"

namespace kinmpc {

namespace fs = std::filesystem;

namespace {

constexpr const char * kTraceHeader = "t,x,y,psi,beta,delta_f,x_ref,y_ref,u";
constexpr const char * kSummaryHeader = "model,ssd,time_per_iteration,total_time";

std::string g17(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string & line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_number(const std::string & s, std::size_t line_no)
{
  if (s == "nan" || s == "-nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::string strip_cr(std::string line)
{
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return line;
}

void expect_header(std::istream & is, const char * header)
{
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != header) {
    throw std::runtime_error(std::string("CSV header mismatch, expected '") + header + "'");
  }
}

std::ofstream open_out(const fs::path & file)
{
  std::ofstream os(file, std::ios::binary);
  if (!os) {
    throw std::runtime_error("cannot write " + file.string());
  }
  return os;
}

void close_checked(std::ofstream & os, const fs::path & file)
{
  os.close();
  if (!os) {
    throw std::runtime_error("error writing " + file.string());
  }
}

nlohmann::json manifest_base(const ScenarioConfig & cfg, const std::string & command)
{
  nlohmann::json m;
  m["tool"] = "kinmpc";
  m["version"] = KINMPC_VERSION;
  m["command"] = command;
  m["scenario"] = cfg.name;
  m["path_kind"] = std::string(to_string(cfg.path.kind));
  m["seed"] = cfg.disturbance.seed;
  m["config"] = to_config_text(cfg);
  m["versions"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
      {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
      {"compiler", "gcc " __VERSION__},
#else
      {"compiler", "unknown"},
#endif
  };
  return m;
}

void write_manifest(const fs::path & dir, const nlohmann::json & m,
                    const std::string & name = "manifest.json")
{
  const fs::path file = dir / name;
  std::ofstream os = open_out(file);
  os << m.dump(2) << '\n';
  close_checked(os, file);
}

}  // namespace

bool CompareReport::all_ok() const
{
  return std::all_of(runs.begin(), runs.end(), [](const VariantRun & r) { return r.result.ok; });
}

VariantRun run_variant(const ScenarioConfig & cfg, Variant v)
{
  VariantRun run;
  run.variant = v;
  run.config = cfg.controller(v);
  run.config.variant = v;
  const ReferencePath path = cfg.make_path(run.config.Ts);
  run.result = run_closed_loop(run.config, path, cfg.disturbance, cfg.vehicle);
  return run;
}

CompareReport run_compare(const ScenarioConfig & cfg)
{
  if (cfg.variants.empty()) {
    throw std::invalid_argument("no controller variants to compare");
  }
  CompareReport report;
  for (Variant v : cfg.variants) {
    report.runs.push_back(run_variant(cfg, v));
  }
  for (const VariantRun & r : report.runs) {
    if (r.result.ok) {
      report.summary.push_back({std::string(to_string(r.variant)), r.result.ssd,
                                r.result.time_per_iteration(), r.result.total_time});
    }
  }
  std::stable_sort(report.summary.begin(), report.summary.end(),
                   [](const SummaryRow & a, const SummaryRow & b) { return a.ssd < b.ssd; });
  return report;
}

double rise_time(const std::vector<TraceRow> & trace, double target)
{
  if (trace.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double y0 = trace.front().state.y;
  const double threshold = y0 + 0.9 * (target - y0);
  const double sign = target >= y0 ? 1.0 : -1.0;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double a = sign * (trace[k - 1].state.y - threshold);
    const double b = sign * (trace[k].state.y - threshold);
    if (a < 0.0 && b >= 0.0) {
      const double s = a / (a - b);
      return trace[k - 1].t + s * (trace[k].t - trace[k - 1].t);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<AlphaRow> sweep_alpha(const ScenarioConfig & cfg)
{
  if (cfg.path.kind != PathKind::step) {
    throw std::invalid_argument("alpha sweeps measure a step response; set [path] kind = step");
  }
  if (cfg.sweep_variant != Variant::baseline && cfg.sweep_variant != Variant::weight_tuned) {
    throw std::invalid_argument("alpha sweeps apply to baseline or weight_tuned");
  }
  std::vector<AlphaRow> rows;
  for (double alpha : cfg.sweep_alphas) {
    ScenarioConfig c = cfg;
    c.controller(cfg.sweep_variant).weights.alpha = alpha;
    const VariantRun run = run_variant(c, cfg.sweep_variant);
    AlphaRow row;
    row.alpha = alpha;
    row.ok = run.result.ok;
    row.error = run.result.error;
    row.ssd = run.result.ssd;
    row.rise_time = rise_time(run.result.trace, cfg.path.amplitude);
    rows.push_back(row);
  }
  return rows;
}

void write_trace_csv(std::ostream & os, const std::vector<TraceRow> & trace)
{
  os << kTraceHeader << '\n';
  for (const TraceRow & r : trace) {
    os << g17(r.t) << ',' << g17(r.state.x) << ',' << g17(r.state.y) << ',' << g17(r.state.psi)
       << ',' << g17(r.state.beta) << ',' << g17(r.delta_f) << ',' << g17(r.x_ref) << ','
       << g17(r.y_ref) << ',' << g17(r.u) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream & is)
{
  expect_header(is, kTraceHeader);
  std::vector<TraceRow> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected 9 columns");
    }
    double v[9];
    for (std::size_t i = 0; i < 9; ++i) {
      v[i] = parse_number(cells[i], line_no);
    }
    TraceRow r;
    r.t = v[0];
    r.state = {v[1], v[2], v[3], v[4]};
    r.delta_f = v[5];
    r.x_ref = v[6];
    r.y_ref = v[7];
    r.u = v[8];
    r.measured_x = r.state.x;
    r.measured_y = r.state.y;
    out.push_back(r);
  }
  return out;
}

void write_summary_csv(std::ostream & os, const std::vector<SummaryRow> & rows)
{
  os << kSummaryHeader << '\n';
  for (const SummaryRow & r : rows) {
    os << r.model << ',' << g17(r.ssd) << ',' << g17(r.time_per_iteration) << ','
       << g17(r.total_time) << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(std::istream & is)
{
  expect_header(is, kSummaryHeader);
  std::vector<SummaryRow> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected 4 columns");
    }
    out.push_back({cells[0], parse_number(cells[1], line_no), parse_number(cells[2], line_no),
                   parse_number(cells[3], line_no)});
  }
  return out;
}

void write_alpha_csv(std::ostream & os, const std::vector<AlphaRow> & rows)
{
  os << "alpha,rise_time,ssd\n";
  for (const AlphaRow & r : rows) {
    os << g17(r.alpha) << ',' << g17(r.rise_time) << ',' << g17(r.ssd) << '\n';
  }
}

std::string trace_file_name(Variant v)
{
  return "trace_" + std::string(to_string(v)) + ".csv";
}

void write_compare_outputs(const fs::path & dir, const ScenarioConfig & cfg,
                           const CompareReport & report, const std::string & command)
{
  fs::create_directories(dir);
  nlohmann::json runs = nlohmann::json::array();
  for (const VariantRun & r : report.runs) {
    const fs::path file = dir / trace_file_name(r.variant);
    std::ofstream os = open_out(file);
    write_trace_csv(os, r.result.trace);
    close_checked(os, file);

    nlohmann::json j;
    j["model"] = std::string(to_string(r.variant));
    j["ok"] = r.result.ok;
    if (!r.result.ok) {
      j["error"] = r.result.error;
    }
    j["trace"] = trace_file_name(r.variant);
    j["rows"] = r.result.trace.size();
    j["Ts"] = r.config.Ts;
    j["N"] = r.config.N;
    j["M"] = r.config.M;
    j["alpha"] = r.config.weights.alpha;
    j["ssd"] = r.result.ssd;
    j["time_per_iteration"] = r.result.time_per_iteration();
    j["total_time"] = r.result.total_time;
    runs.push_back(std::move(j));
  }

  const fs::path summary = dir / "summary.csv";
  std::ofstream os = open_out(summary);
  write_summary_csv(os, report.summary);
  close_checked(os, summary);

  nlohmann::json m = manifest_base(cfg, command);
  m["runs"] = std::move(runs);
  m["summary"] = "summary.csv";
  m["all_ok"] = report.all_ok();
  write_manifest(dir, m);
}

void write_sweep_outputs(const fs::path & dir, const ScenarioConfig & cfg,
                         const std::vector<AlphaRow> & rows, const std::string & command)
{
  fs::create_directories(dir);
  const fs::path file = dir / "alpha_sweep.csv";
  std::ofstream os = open_out(file);
  write_alpha_csv(os, rows);
  close_checked(os, file);

  nlohmann::json m = manifest_base(cfg, command);
  m["sweep_variant"] = std::string(to_string(cfg.sweep_variant));
  nlohmann::json jr = nlohmann::json::array();
  for (const AlphaRow & r : rows) {
    nlohmann::json j{{"alpha", r.alpha}, {"ssd", r.ssd}, {"ok", r.ok}};
    j["rise_time"] = std::isfinite(r.rise_time) ? nlohmann::json(r.rise_time) : nlohmann::json();
    if (!r.ok) {
      j["error"] = r.error;
    }
    jr.push_back(std::move(j));
  }
  m["runs"] = std::move(jr);
  m["table"] = "alpha_sweep.csv";
  write_manifest(dir, m, "sweep_manifest.json");
}

}  // namespace kinmpc
