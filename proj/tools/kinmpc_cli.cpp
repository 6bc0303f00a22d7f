// kinmpc: run controller comparisons and alpha sweeps from scenario files.
//
// Exit codes: 0 success, 1 validation error, 2 run failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kinmpc/experiment.hpp"
#include "kinmpc/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRunFailure = 2;

struct CommonOptions
{
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variants;
  std::optional<double> duration;
  std::optional<double> noise;
};

void add_common(CLI::App * cmd, CommonOptions & o)
{
  cmd->add_option("config", o.config_file, "Scenario file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "Override a config key: section.key=value (repeatable)");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Disturbance seed");
  cmd->add_option("--variants", o.variants, "Comma-separated controller variants");
  cmd->add_option("--duration", o.duration, "Scenario duration [s]");
  cmd->add_option("--noise", o.noise, "Gaussian output noise std-dev [m]; 0 disables");
}

std::string read_file(const std::string & name)
{
  std::ifstream in(name, std::ios::binary);
  if (!in) {
    throw kinmpc::ConfigError("", "cannot read " + name);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Dedicated flags are applied after --set so they win on conflict.
kinmpc::ScenarioConfig load(const CommonOptions & o)
{
  std::vector<std::string> overrides = o.sets;
  if (o.out) {
    overrides.push_back("scenario.output_dir=" + *o.out);
  }
  if (o.seed) {
    overrides.push_back("disturbance.seed=" + std::to_string(*o.seed));
  }
  if (o.variants) {
    overrides.push_back("scenario.variants=" + *o.variants);
  }
  if (o.duration) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "path.duration=" << *o.duration;
    overrides.push_back(ss.str());
  }
  if (o.noise) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "disturbance.amplitude=" << *o.noise;
    overrides.push_back(ss.str());
    overrides.push_back(*o.noise > 0.0 ? "disturbance.kind=gaussian_output"
                                       : "disturbance.kind=none");
  }
  const std::string text = o.config_file.empty() ? std::string() : read_file(o.config_file);
  return kinmpc::parse_config(text, overrides);
}

void print_summary(const kinmpc::CompareReport & report)
{
  std::printf("%-14s %16s %20s %14s\n", "model", "ssd [m^2]", "time/iteration [s]",
              "total [s]");
  for (const auto & row : report.summary) {
    std::printf("%-14s %16.6g %20.6g %14.6g\n", row.model.c_str(), row.ssd,
                row.time_per_iteration, row.total_time);
  }
  for (const auto & run : report.runs) {
    if (!run.result.ok) {
      std::fprintf(stderr, "%s failed: %s\n", std::string(kinmpc::to_string(run.variant)).c_str(),
                   run.result.error.c_str());
    }
  }
}

int do_compare(kinmpc::ScenarioConfig cfg, const std::string & command,
               std::optional<std::string> single)
{
  if (single) {
    cfg.variants = {kinmpc::variant_from_string(*single)};
  }
  const kinmpc::CompareReport report = kinmpc::run_compare(cfg);
  kinmpc::write_compare_outputs(cfg.output_dir, cfg, report, command);
  print_summary(report);
  std::printf("wrote %s\n", cfg.output_dir.c_str());
  return report.all_ok() ? kOk : kRunFailure;
}

int do_sweep(const kinmpc::ScenarioConfig & cfg, const std::string & command)
{
  const auto rows = kinmpc::sweep_alpha(cfg);
  kinmpc::write_sweep_outputs(cfg.output_dir, cfg, rows, command);
  std::printf("%-10s %14s %16s\n", "alpha", "rise_time [s]", "ssd [m^2]");
  bool ok = true;
  for (const auto & r : rows) {
    std::printf("%-10g %14.6g %16.6g\n", r.alpha, r.rise_time, r.ssd);
    if (!r.ok) {
      std::fprintf(stderr, "alpha %g failed: %s\n", r.alpha, r.error.c_str());
      ok = false;
    }
  }
  std::printf("wrote %s\n", cfg.output_dir.c_str());
  return ok ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Kinematic bicycle MPC experiments"};
  app.set_version_flag("--version", std::string(KINMPC_VERSION));
  app.require_subcommand(1);

  CommonOptions run_opts;
  CommonOptions compare_opts;
  CommonOptions sweep_opts;
  CommonOptions validate_opts;
  std::optional<std::string> run_variant;
  std::optional<std::string> sweep_alphas;

  CLI::App * run = app.add_subcommand("run", "Run a single controller variant");
  add_common(run, run_opts);
  run->add_option("--variant", run_variant, "Variant to run (default: first configured)");

  CLI::App * compare = app.add_subcommand("compare", "Run every configured variant");
  add_common(compare, compare_opts);

  CLI::App * sweep = app.add_subcommand("sweep-alpha", "Step response for a list of alphas");
  add_common(sweep, sweep_opts);
  sweep->add_option("--alphas", sweep_alphas, "Comma-separated alpha values");

  CLI::App * validate = app.add_subcommand("validate-config", "Parse and print a scenario");
  add_common(validate, validate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationError;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) {
    command += (i ? " " : "") + std::string(argv[i]);
  }

  kinmpc::ScenarioConfig cfg;
  try {
    if (*run) {
      cfg = load(run_opts);
      if (run_variant) {
        kinmpc::variant_from_string(*run_variant);
      } else {
        run_variant = std::string(kinmpc::to_string(cfg.variants.front()));
      }
    } else if (*compare) {
      cfg = load(compare_opts);
    } else if (*sweep) {
      if (sweep_alphas) {
        sweep_opts.sets.push_back("sweep.alphas=" + *sweep_alphas);
      }
      cfg = load(sweep_opts);
      if (cfg.path.kind != kinmpc::PathKind::step) {
        throw kinmpc::ConfigError("", "sweep-alpha requires [path] kind = step");
      }
    } else {
      cfg = load(validate_opts);
      std::cout << kinmpc::to_config_text(cfg);
      return kOk;
    }
  } catch (const std::exception & e) {
    std::fprintf(stderr, "kinmpc: invalid configuration: %s\n", e.what());
    return kValidationError;
  }

  try {
    if (*sweep) {
      return do_sweep(cfg, command);
    }
    return do_compare(cfg, command, *run ? run_variant : std::nullopt);
  } catch (const std::exception & e) {
    std::fprintf(stderr, "kinmpc: run failed: %s\n", e.what());
    return kRunFailure;
  }
}
