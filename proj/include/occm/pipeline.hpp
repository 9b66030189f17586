#pragma once

// End-to-end runs driven by a RunConfig, and their artifacts: a structured
// text summary, measure and curve CSV files and an SVG overlay.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occm/config.hpp"
#include "occm/curve.hpp"
#include "occm/measure.hpp"
#include "occm/ratio.hpp"

namespace occm {

/// Ordered `key: value` lines plus free-form warnings.
class RunSummary {
 public:
  void set(const std::string& key, double value);
  void set(const std::string& key, const std::string& value);
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  std::optional<std::string> get(const std::string& key) const;
  /// Throws std::out_of_range when absent.
  double number(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// One `key: value` line per entry, then one `warning: ...` line each.
  std::string text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> warnings_;
};

/// Reference geometry drawn dashed in the SVG.
struct OracleOverlay {
  bool circle = false;
  Vec2 center;
  double radius = 0.0;
  std::vector<Vec2> polyline;  // closed, when not a circle
};

struct RunResult {
  RunConfig config;
  RunSummary summary;
  std::optional<MeasureLP> lp;
  std::optional<OptimalMeasure> measure;
  std::vector<DinkelbachStep> trace;
  std::vector<PeriodicCurve> pieces;
  std::vector<double> lambda;
  std::optional<AlternatingSchedule> schedule;
  std::optional<OracleOverlay> oracle;
  double wall_time = 0.0;
};

/// Runs the configured mode. Library errors propagate (see exit_code).
RunResult run_pipeline(const RunConfig& config);

struct MeasureAtom {
  std::size_t cell = 0;
  std::size_t control = 0;
  Vec2 x;
  Vec2 u;
  double weight = 0.0;
};

/// Columns i, j, x1, x2, u1, u2, weight; one row per nonzero weight, with
/// round-trip precision.
void write_measure_csv(std::ostream& out, const MeasureLP& lp, const OptimalMeasure& m);
/// Throws Error("io") on a malformed file.
std::vector<MeasureAtom> read_measure_csv(std::istream& in);
double integrate_atoms(std::span<const MeasureAtom> atoms, const Integrand& g);

/// Columns t, x1, x2, u1, u2, piece_index. Pieces are listed one period
/// each; schedules list the sampled rounds of the itinerary with steering
/// rows marked piece_index -1.
void write_curve_csv(std::ostream& out, const RunResult& r);

/// Dinkelbach iterates: columns t, v_t, r_t.
void write_trace_csv(std::ostream& out, const RunResult& r);

/// Domain outline, support cells (opacity proportional to weight), curves
/// and the dashed oracle; byte-identical for identical results.
std::string render_svg(const RunResult& r);

struct CliOptions {
  std::string svg_path;  // overrides output.svg
  std::string csv_dir;   // overrides output.dir
  bool quiet = false;
  std::optional<Mode> require_mode;  // subcommands that imply a mode
};

/// 0 success, 1 configuration, precondition or IO error, 2 infeasible,
/// 3 no convergence.
int exit_code(const std::exception& e);
/// Short machine-parsable reason for the diagnostic line.
std::string error_reason(const std::exception& e);

/// Loads the config, runs it and writes the artifacts (summary.txt,
/// measure.csv, curve.csv and trace.csv into the CSV directory). The summary goes to
/// `out` unless quiet; failures print one `error: <reason>: <message>` line
/// to `err`. Returns the exit code.
int run(const std::string& config_path, const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace occm
