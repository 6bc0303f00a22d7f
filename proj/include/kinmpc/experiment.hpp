#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinmpc/scenario.hpp"
#include "kinmpc/simulator.hpp"

namespace kinmpc {

struct VariantRun
{
  Variant variant{};
  ControllerConfig config{};
  SimResult result{};
};

/// One row of the comparison table.
struct SummaryRow
{
  std::string model;
  double ssd{0};
  double time_per_iteration{0};
  double total_time{0};
};

struct CompareReport
{
  std::vector<VariantRun> runs;     ///< in configuration order
  std::vector<SummaryRow> summary;  ///< completed runs only, ssd ascending

  bool all_ok() const;
};

/// Runs one variant of the scenario on the path sampled at its own Ts.
VariantRun run_variant(const ScenarioConfig & cfg, Variant v);

/// Runs every configured variant on the same path geometry and noise seed.
CompareReport run_compare(const ScenarioConfig & cfg);

struct AlphaRow
{
  double alpha{0};
  double rise_time{0};  ///< NaN when the output never reaches 90% of the step
  double ssd{0};
  bool ok{true};
  std::string error;
};

/**
 * @brief Time at which y first reaches 90% of the way from y(0) to `target`.
 *
 * Linear interpolation between samples; NaN if the threshold is never crossed.
 */
double rise_time(const std::vector<TraceRow> & trace, double target);

/// One step-response run per configured alpha, duplicates included.
std::vector<AlphaRow> sweep_alpha(const ScenarioConfig & cfg);

// ---------------------------------------------------------------------------
// Files

/// Header: t,x,y,psi,beta,delta_f,x_ref,y_ref,u. Values use 17 significant digits.
void write_trace_csv(std::ostream & os, const std::vector<TraceRow> & trace);

/// Reads a trace written by write_trace_csv. Measured outputs are not stored
/// in the file and are left equal to the true position.
std::vector<TraceRow> read_trace_csv(std::istream & is);

/// Header: model,ssd,time_per_iteration,total_time.
void write_summary_csv(std::ostream & os, const std::vector<SummaryRow> & rows);
std::vector<SummaryRow> read_summary_csv(std::istream & is);

/// Header: alpha,rise_time,ssd.
void write_alpha_csv(std::ostream & os, const std::vector<AlphaRow> & rows);

/// File name used for a variant's trace inside the output directory.
std::string trace_file_name(Variant v);

/**
 * @brief Write trace CSVs, summary.csv and manifest.json for a comparison.
 *
 * `command` is echoed into the manifest. Throws std::runtime_error on I/O
 * failure.
 */
void write_compare_outputs(const std::filesystem::path & dir, const ScenarioConfig & cfg,
                           const CompareReport & report, const std::string & command);

/// Write alpha_sweep.csv and sweep_manifest.json for an alpha sweep.
void write_sweep_outputs(const std::filesystem::path & dir, const ScenarioConfig & cfg,
                         const std::vector<AlphaRow> & rows, const std::string & command);

}  // namespace kinmpc
