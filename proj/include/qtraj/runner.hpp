#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/config.hpp"
#include "qtraj/observables.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

struct SnapshotRow {
  double time = 0.0;
  Moments moments;
  Estimate transmission;
};

struct MomentumRecord {
  double time = 0.0;
  std::string region;  // "all" or "transmitted"
  Histogram histogram;
  // Moments of p over the region; unset when the region is empty.
  std::optional<RegionMomentum> stats;
};

enum class Source { kMonteCarlo, kOracle };

// Everything one simulation produces, in natural units.
struct ScenarioResult {
  ScenarioConfig config;
  Source source = Source::kMonteCarlo;
  std::vector<double> times;
  // Detector series, one per configured detector (bandwidth-smoothed).
  std::vector<TimeSeriesObservable> density;
  std::vector<TimeSeriesObservable> flux;
  // Monte Carlo: density at half the bandwidth. Oracle: exact point values.
  std::vector<TimeSeriesObservable> density_fine;
  // Oracle only: exact point flux.
  std::vector<TimeSeriesObservable> flux_point;
  std::vector<SnapshotRow> snapshots;
  std::vector<MomentumRecord> momentum;
  RunDiagnostics diagnostics;
  double wall_seconds = 0.0;
};

[[nodiscard]] ScenarioResult simulate(const ScenarioConfig& config);
[[nodiscard]] ScenarioResult simulate_oracle(const ScenarioConfig& config);

// A named scalar of times.csv.
struct TimedValue {
  std::string name;
  Estimate value;
  std::string status = "ok";  // or the name of the error that prevented it
};

// Mean presence and arrival times at every detector, transit times between
// every detector pair and, given the free reference, arrival-time delays.
// `point` selects the oracle's exact series instead of the smoothed ones.
[[nodiscard]] std::vector<TimedValue> timing_table(const ScenarioResult& run,
                                                   const ScenarioResult* free_run,
                                                   bool point = false);
[[nodiscard]] const TimedValue* find_timed(const std::vector<TimedValue>& table,
                                           const std::string& name);
[[nodiscard]] std::string detector_label(double x);

// Largest deviation of density at half bandwidth, as a fraction of the peak.
[[nodiscard]] double bandwidth_sensitivity(const ScenarioResult& run);

// Writes snapshots.csv, detectors.csv, momentum.csv, times.csv and
// manifest.json (plus detectors_point.csv and times_point.csv for the oracle).
void write_result(const std::filesystem::path& dir, const ScenarioResult& run,
                  const ScenarioResult* free_run);

// Runs the scenario and, when the barrier is on, its free reference.
struct RunReport {
  ScenarioResult run;
  std::optional<ScenarioResult> free_run;
};
[[nodiscard]] RunReport run_scenario(const ScenarioConfig& config, Source source,
                                     const std::filesystem::path& out_dir);

struct SeriesComparison {
  std::string name;
  double max_sigma = 0.0;  // max |a - b| / combined error
  double max_peak = 0.0;   // max |a - b| / peak |b|
  bool pass = true;
};

struct ComparisonReport {
  std::vector<SeriesComparison> series;
  [[nodiscard]] bool pass() const;
};

// Point-wise test |a - b| <= max(sigmas * combined error, peak_fraction * peak |b|).
[[nodiscard]] ComparisonReport compare_series(const std::string& name,
                                              const TimeSeriesObservable& a,
                                              const TimeSeriesObservable& b, double sigmas,
                                              double peak_fraction);
[[nodiscard]] ComparisonReport compare_results(const ScenarioResult& a, const ScenarioResult& b,
                                               double sigmas = 3.0, double peak_fraction = 0.05);
// Same test on two output directories. Throws GridMismatch or IoError.
[[nodiscard]] ComparisonReport compare_dirs(const std::filesystem::path& a,
                                            const std::filesystem::path& b, double sigmas = 3.0,
                                            double peak_fraction = 0.05);
[[nodiscard]] std::string format_report(const ComparisonReport& report);

// The runs behind one preset's summary table.
struct PresetBundle {
  ScenarioResult quantum;
  ScenarioResult classical;
  ScenarioResult free;
  ScenarioResult oracle;
  ScenarioResult oracle_free;
};
// Writes each run under out_dir (quantum/, classical/, free/, oracle/,
// oracle-free/) when a directory is given.
[[nodiscard]] PresetBundle run_bundle(const ScenarioConfig& config,
                                      const std::optional<std::filesystem::path>& out_dir);
// Transit times, delays, presence/arrival gaps, transmissions and transmitted
// momentum moments, Monte Carlo next to the oracle, times in fs.
[[nodiscard]] std::string summary_table(const std::string& name, const PresetBundle& bundle);

// Writes text to path through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace qtraj
