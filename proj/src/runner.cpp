#include "qtraj/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <utility>

#include "qtraj/config_io.hpp"
#include "qtraj/error.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/presets.hpp"
#include "qtraj/units.hpp"

namespace qtraj {

namespace {

constexpr const char* kVersion = "qtraj 1.0.0";
constexpr double kUnderResolved = 0.02;
constexpr double kTailLimit = 0.005;

std::string num(double v) { return fmt::format("{:.17g}", v); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Indices of the snapshots nearest to each requested time.
std::vector<std::size_t> nearest_indices(const std::vector<double>& grid,
                                         const std::vector<double>& wanted) {
  std::vector<std::size_t> out;
  for (double t : wanted) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (std::abs(grid[i] - t) < std::abs(grid[best] - t)) best = i;
    }
    out.push_back(best);
  }
  return out;
}

bool contains(const std::vector<std::size_t>& v, std::size_t i) {
  return std::find(v.begin(), v.end(), i) != v.end();
}

std::vector<double> momentum_edges(const ScenarioConfig& c) {
  std::vector<double> edges(static_cast<std::size_t>(c.momentum_bins) + 1);
  const double width = (c.momentum_max - c.momentum_min) / c.momentum_bins;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    edges[k] = c.momentum_min + width * static_cast<double>(k);
  }
  return edges;
}

void push_exact(TimeSeriesObservable& series, double t, double value) {
  series.times.push_back(t);
  series.values.push_back(value);
  series.std_errors.push_back(0.0);
}

}  // namespace

ScenarioResult simulate(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.config = config;
  result.source = Source::kMonteCarlo;
  result.times = config.snapshot_times();
  const auto momentum_at = nearest_indices(result.times, config.momentum_times);

  DetectorRecorder recorder(config.detectors, config.bandwidth);
  DetectorRecorder fine(config.detectors, 0.5 * config.bandwidth);
  std::size_t index = 0;
  result.diagnostics = run_ensemble(config, [&](const EnsembleSnapshot& s) {
    recorder.record(s);
    fine.record(s);
    result.snapshots.push_back(
        {s.time, moments(s), transmission_probability(s, config.transmission_boundary)});
    if (contains(momentum_at, index)) {
      result.momentum.push_back({s.time, "all",
                                 momentum_distribution(s, std::nullopt, config.momentum_bins,
                                                       config.momentum_min, config.momentum_max),
                                 std::nullopt});
      try {
        MomentumRecord record{s.time, "transmitted",
                              momentum_distribution(s, config.transmission_boundary,
                                                    config.momentum_bins, config.momentum_min,
                                                    config.momentum_max),
                              region_momentum(s, config.transmission_boundary)};
        result.momentum.push_back(std::move(record));
      } catch (const EmptyRegion&) {
        // Nothing has been transmitted at this time.
      }
    }
    ++index;
  });
  for (std::size_t d = 0; d < config.detectors.size(); ++d) {
    result.density.push_back(recorder.density(d));
    result.flux.push_back(recorder.flux(d));
    result.density_fine.push_back(fine.density(d));
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

ScenarioResult simulate_oracle(const ScenarioConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result;
  result.config = config;
  result.source = Source::kOracle;
  result.times = config.snapshot_times();
  const auto momentum_at = nearest_indices(result.times, config.momentum_times);
  const auto edges = momentum_edges(config);
  const std::size_t n_det = config.detectors.size();
  result.density.resize(n_det);
  result.flux.resize(n_det);
  result.density_fine.resize(n_det);
  result.flux_point.resize(n_det);

  std::size_t index = 0;
  run_oracle(config, [&](const GridWavefunction& psi) {
    const double t = result.times[index];
    const auto flux = grid_flux(psi);
    std::vector<double> density(psi.n_points());
    for (std::size_t i = 0; i < density.size(); ++i) density[i] = std::norm(psi.values[i]);
    for (std::size_t d = 0; d < n_det; ++d) {
      const double x = config.detectors[d];
      push_exact(result.density[d], t, oracle_smoothed_density(psi, x, config.bandwidth));
      push_exact(result.flux[d], t, oracle_smoothed_flux(psi, flux, x, config.bandwidth));
      push_exact(result.density_fine[d], t, interpolate_cubic(psi, density, x));
      push_exact(result.flux_point[d], t, interpolate_cubic(psi, flux, x));
    }
    const OracleMoments m = oracle_moments(psi);
    result.snapshots.push_back({t,
                                {{m.mean_q, 0.0}, {m.mean_p, 0.0}, {m.var_q, 0.0}, {m.var_p, 0.0}},
                                {oracle_transmission(psi, config.transmission_boundary), 0.0}});
    if (contains(momentum_at, index)) {
      const auto record = [&](std::optional<double> boundary, const char* region) {
        const MomentumSpectrum spectrum = oracle_momentum_spectrum(psi, boundary);
        Histogram h;
        h.edges = edges;
        h.masses = bin_spectrum(spectrum, edges);
        h.std_errors.assign(h.masses.size(), 0.0);
        h.region_weight = {spectrum.region_mass, 0.0};
        double m1 = 0.0;
        double m2 = 0.0;
        const double dk = spectrum.k[1] - spectrum.k[0];
        for (std::size_t j = 0; j < spectrum.k.size(); ++j) {
          m1 += spectrum.k[j] * spectrum.density[j] * dk;
          m2 += spectrum.k[j] * spectrum.k[j] * spectrum.density[j] * dk;
        }
        RegionMomentum stats{{spectrum.region_mass, 0.0}, {m1, 0.0}, {m2 - m1 * m1, 0.0}};
        result.momentum.push_back({t, region, std::move(h), stats});
      };
      record(std::nullopt, "all");
      try {
        record(config.transmission_boundary, "transmitted");
      } catch (const EmptyRegion&) {
        // Nothing has been transmitted at this time.
      }
    }
    ++index;
  });
  result.wall_seconds = seconds_since(start);
  return result;
}

std::string detector_label(double x) { return fmt::format("{:g}", x); }

std::vector<TimedValue> timing_table(const ScenarioResult& run, const ScenarioResult* free_run,
                                     bool point) {
  if (point && run.source != Source::kOracle) {
    throw GridMismatch("point series exist only for oracle runs");
  }
  const auto& density = [&](const ScenarioResult& r) -> const std::vector<TimeSeriesObservable>& {
    return point ? r.density_fine : r.density;
  };
  const auto& flux = [&](const ScenarioResult& r) -> const std::vector<TimeSeriesObservable>& {
    return point ? r.flux_point : r.flux;
  };
  std::vector<TimedValue> table;
  const auto add = [&](std::string name, auto compute) {
    TimedValue v{std::move(name), {std::numeric_limits<double>::quiet_NaN(), 0.0}, "ok"};
    try {
      v.value = compute();
    } catch (const ZeroMass&) {
      v.status = "ZeroMass";
    } catch (const BackflowDominant&) {
      v.status = "BackflowDominant";
    } catch (const ComputeError&) {
      v.status = "ComputeError";
    }
    table.push_back(std::move(v));
  };

  const auto& detectors = run.config.detectors;
  const auto block = [&](const ScenarioResult& r, const std::string& prefix) {
    for (std::size_t d = 0; d < detectors.size(); ++d) {
      const std::string label = detector_label(detectors[d]);
      add(prefix + "mean_presence@" + label, [&] { return mean_presence_time(density(r)[d]); });
      add(prefix + "mean_arrival@" + label, [&] { return mean_arrival_time(flux(r)[d]); });
    }
    for (std::size_t i = 0; i < detectors.size(); ++i) {
      for (std::size_t j = i + 1; j < detectors.size(); ++j) {
        add(prefix + "transit@" + detector_label(detectors[i]) + ":" +
                detector_label(detectors[j]),
            [&] { return transit_time(density(r)[i], density(r)[j]); });
      }
    }
  };
  block(run, "");
  if (free_run != nullptr) {
    if (free_run->config.detectors != detectors) {
      throw GridMismatch("free reference uses different detectors");
    }
    block(*free_run, "free_");
    for (std::size_t d = 0; d < detectors.size(); ++d) {
      add("delay@" + detector_label(detectors[d]),
          [&] { return time_delay(flux(run)[d], flux(*free_run)[d]); });
    }
  }
  return table;
}

const TimedValue* find_timed(const std::vector<TimedValue>& table, const std::string& name) {
  for (const auto& v : table) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

double bandwidth_sensitivity(const ScenarioResult& run) {
  double worst = 0.0;
  for (std::size_t d = 0; d < run.density.size(); ++d) {
    const auto& a = run.density[d].values;
    const auto& b = run.density_fine[d].values;
    double peak = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      peak = std::max(peak, std::abs(a[i]));
      diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    if (peak > 0.0) worst = std::max(worst, diff / peak);
  }
  return worst;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

namespace {

std::string detectors_csv(const ScenarioResult& run,
                          const std::vector<TimeSeriesObservable>& density,
                          const std::vector<TimeSeriesObservable>& flux, const UnitSystem& units) {
  std::string out = "time_natural,time_fs,detector_x,density,density_err,flux,flux_err\n";
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    for (std::size_t d = 0; d < density.size(); ++d) {
      out += fmt::format("{},{},{},{},{},{},{}\n", num(t),
                         num(convert(t, QuantityKind::kTime, units)), num(run.config.detectors[d]),
                         num(density[d].values[i]), num(density[d].std_errors[i]),
                         num(flux[d].values[i]), num(flux[d].std_errors[i]));
    }
  }
  return out;
}

std::string times_csv(const std::vector<TimedValue>& table, const UnitSystem& units) {
  std::string out = "name,value_natural,value_fs,err_natural,err_fs,status\n";
  for (const auto& v : table) {
    out += fmt::format("{},{},{},{},{},{}\n", v.name, num(v.value.value),
                       num(convert(v.value.value, QuantityKind::kTime, units)),
                       num(v.value.std_error),
                       num(convert(v.value.std_error, QuantityKind::kTime, units)), v.status);
  }
  return out;
}

nlohmann::json estimate_json(const Estimate& e) { return {{"value", e.value}, {"err", e.std_error}}; }

}  // namespace

void write_result(const std::filesystem::path& dir, const ScenarioResult& run,
                  const ScenarioResult* free_run) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const UnitSystem units;

  std::string snapshots =
      "time_natural,time_fs,mean_q,mean_q_err,mean_p,mean_p_err,var_q,var_q_err,var_p,var_p_err,"
      "trans_prob,trans_prob_err\n";
  for (const auto& row : run.snapshots) {
    const Moments& m = row.moments;
    snapshots += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", num(row.time),
                             num(convert(row.time, QuantityKind::kTime, units)),
                             num(m.mean_q.value), num(m.mean_q.std_error), num(m.mean_p.value),
                             num(m.mean_p.std_error), num(m.var_q.value), num(m.var_q.std_error),
                             num(m.var_p.value), num(m.var_p.std_error),
                             num(row.transmission.value), num(row.transmission.std_error));
  }
  write_file_atomic(dir / "snapshots.csv", snapshots);
  write_file_atomic(dir / "detectors.csv", detectors_csv(run, run.density, run.flux, units));

  std::string momentum = "time_natural,time_fs,region,p_low,p_high,mass,mass_err\n";
  for (const auto& record : run.momentum) {
    const Histogram& h = record.histogram;
    for (std::size_t k = 0; k < h.masses.size(); ++k) {
      momentum += fmt::format("{},{},{},{},{},{},{}\n", num(record.time),
                              num(convert(record.time, QuantityKind::kTime, units)), record.region,
                              num(h.edges[k]), num(h.edges[k + 1]), num(h.masses[k]),
                              num(h.std_errors[k]));
    }
  }
  write_file_atomic(dir / "momentum.csv", momentum);
  write_file_atomic(dir / "times.csv", times_csv(timing_table(run, free_run), units));
  if (run.source == Source::kOracle) {
    write_file_atomic(dir / "detectors_point.csv",
                      detectors_csv(run, run.density_fine, run.flux_point, units));
    write_file_atomic(dir / "times_point.csv",
                      times_csv(timing_table(run, free_run, true), units));
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["source"] = run.source == Source::kOracle ? "oracle" : "monte-carlo";
  manifest["config"] = emit_config(run.config);
  manifest["seed"] = run.config.seed;
  manifest["wall_seconds"] = run.wall_seconds;
  if (free_run != nullptr) manifest["free_reference_wall_seconds"] = free_run->wall_seconds;
  manifest["diagnostics"] = {{"jumps", run.diagnostics.jumps},
                             {"attempts", run.diagnostics.attempts},
                             {"cap_hits", run.diagnostics.cap_hits},
                             {"peak_particles", run.diagnostics.peak_particles},
                             {"annihilated", run.diagnostics.annihilated},
                             {"roulette_rounds", run.diagnostics.roulette_rounds}};
  if (run.source == Source::kMonteCarlo) {
    const double sensitivity = bandwidth_sensitivity(run);
    manifest["bandwidth_sensitivity"] = sensitivity;
    manifest["under_resolved"] = sensitivity > kUnderResolved;
  }
  nlohmann::json tails = nlohmann::json::object();
  for (std::size_t d = 0; d < run.density.size(); ++d) {
    const double tail = tail_fraction(run.density[d]);
    tails[detector_label(run.config.detectors[d])] = {{"fraction", tail},
                                                      {"exceeds_limit", tail > kTailLimit}};
  }
  manifest["density_tail_mass"] = tails;
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& record : run.momentum) {
    if (!record.stats) continue;
    stats.push_back({{"time", record.time},
                     {"region", record.region},
                     {"weight", estimate_json(record.stats->weight)},
                     {"mean", estimate_json(record.stats->mean)},
                     {"variance", estimate_json(record.stats->variance)}});
  }
  manifest["momentum_moments"] = stats;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

RunReport run_scenario(const ScenarioConfig& config, Source source,
                       const std::filesystem::path& out_dir) {
  const auto simulate_with = [&](const ScenarioConfig& c) {
    return source == Source::kOracle ? simulate_oracle(c) : simulate(c);
  };
  RunReport report{simulate_with(config), std::nullopt};
  if (config.barrier.v0 > 0.0) {
    report.free_run = simulate_with(free_variant(config));
    write_result(out_dir / "free", *report.free_run, nullptr);
  }
  write_result(out_dir, report.run, report.free_run ? &*report.free_run : nullptr);
  return report;
}

bool ComparisonReport::pass() const {
  return std::all_of(series.begin(), series.end(), [](const auto& s) { return s.pass; });
}

ComparisonReport compare_series(const std::string& name, const TimeSeriesObservable& a,
                                const TimeSeriesObservable& b, double sigmas,
                                double peak_fraction) {
  if (a.times.size() != b.times.size()) throw GridMismatch(name + ": time grids differ in length");
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    if (std::abs(a.times[i] - b.times[i]) > 1e-9 * std::max(1.0, std::abs(b.times[i]))) {
      throw GridMismatch(name + ": time grids differ");
    }
  }
  double peak = 0.0;
  for (double v : b.values) peak = std::max(peak, std::abs(v));
  SeriesComparison c{name, 0.0, 0.0, true};
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double diff = std::abs(a.values[i] - b.values[i]);
    const double combined = std::hypot(a.std_errors[i], b.std_errors[i]);
    // Points without an error bar count only when they leave the peak band.
    const double sigma_units =
        combined > 0.0 ? diff / combined
                       : (diff > peak_fraction * peak ? std::numeric_limits<double>::infinity() : 0.0);
    c.max_sigma = std::max(c.max_sigma, sigma_units);
    if (peak > 0.0) c.max_peak = std::max(c.max_peak, diff / peak);
    if (diff > std::max(sigmas * combined, peak_fraction * peak)) c.pass = false;
  }
  return {{c}};
}

namespace {

void append(ComparisonReport& into, const ComparisonReport& from) {
  into.series.insert(into.series.end(), from.series.begin(), from.series.end());
}

TimeSeriesObservable transmission_series(const ScenarioResult& r) {
  TimeSeriesObservable s;
  for (const auto& row : r.snapshots) {
    s.times.push_back(row.time);
    s.values.push_back(row.transmission.value);
    s.std_errors.push_back(row.transmission.std_error);
  }
  return s;
}

}  // namespace

ComparisonReport compare_results(const ScenarioResult& a, const ScenarioResult& b, double sigmas,
                                 double peak_fraction) {
  if (a.config.detectors != b.config.detectors) throw GridMismatch("detector sets differ");
  ComparisonReport report;
  for (std::size_t d = 0; d < a.config.detectors.size(); ++d) {
    const std::string label = detector_label(a.config.detectors[d]);
    append(report, compare_series("density@" + label, a.density[d], b.density[d], sigmas,
                                  peak_fraction));
    append(report,
           compare_series("flux@" + label, a.flux[d], b.flux[d], sigmas, peak_fraction));
  }
  append(report, compare_series("trans_prob", transmission_series(a), transmission_series(b),
                                sigmas, peak_fraction));
  return report;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (first) {
      header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != header.size()) throw IoError(path.string() + ": ragged row");
      rows.push_back(std::move(cells));
    }
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError(path.string() + ": missing column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("malformed number '" + s + "'");
  }
}

// Detector series keyed by detector position, plus the transmission series.
struct DirSeries {
  std::map<double, std::pair<TimeSeriesObservable, TimeSeriesObservable>> detectors;
  TimeSeriesObservable transmission;
};

DirSeries load_dir(const std::filesystem::path& dir) {
  DirSeries out;
  std::vector<std::string> header;
  const auto det_path = dir / "detectors.csv";
  const auto rows = read_csv(det_path, header);
  const std::size_t ct = column(header, "time_natural", det_path);
  const std::size_t cx = column(header, "detector_x", det_path);
  const std::size_t cd = column(header, "density", det_path);
  const std::size_t cde = column(header, "density_err", det_path);
  const std::size_t cf = column(header, "flux", det_path);
  const std::size_t cfe = column(header, "flux_err", det_path);
  for (const auto& r : rows) {
    auto& [density, flux] = out.detectors[to_double(r[cx])];
    const double t = to_double(r[ct]);
    density.times.push_back(t);
    density.values.push_back(to_double(r[cd]));
    density.std_errors.push_back(to_double(r[cde]));
    flux.times.push_back(t);
    flux.values.push_back(to_double(r[cf]));
    flux.std_errors.push_back(to_double(r[cfe]));
  }
  const auto snap_path = dir / "snapshots.csv";
  const auto snaps = read_csv(snap_path, header);
  const std::size_t st = column(header, "time_natural", snap_path);
  const std::size_t sv = column(header, "trans_prob", snap_path);
  const std::size_t se = column(header, "trans_prob_err", snap_path);
  for (const auto& r : snaps) {
    out.transmission.times.push_back(to_double(r[st]));
    out.transmission.values.push_back(to_double(r[sv]));
    out.transmission.std_errors.push_back(to_double(r[se]));
  }
  return out;
}

}  // namespace

ComparisonReport compare_dirs(const std::filesystem::path& a, const std::filesystem::path& b,
                              double sigmas, double peak_fraction) {
  const DirSeries sa = load_dir(a);
  const DirSeries sb = load_dir(b);
  if (sa.detectors.size() != sb.detectors.size()) throw GridMismatch("detector sets differ");
  ComparisonReport report;
  for (const auto& [x, series] : sa.detectors) {
    const auto it = sb.detectors.find(x);
    if (it == sb.detectors.end()) throw GridMismatch("detector sets differ");
    const std::string label = detector_label(x);
    append(report, compare_series("density@" + label, series.first, it->second.first, sigmas,
                                  peak_fraction));
    append(report, compare_series("flux@" + label, series.second, it->second.second, sigmas,
                                  peak_fraction));
  }
  append(report,
         compare_series("trans_prob", sa.transmission, sb.transmission, sigmas, peak_fraction));
  return report;
}

std::string format_report(const ComparisonReport& report) {
  std::string out = fmt::format("{:<16} {:>12} {:>12}  {}\n", "series", "max_sigma", "max_peak",
                                "result");
  for (const auto& s : report.series) {
    out += fmt::format("{:<16} {:>12.4g} {:>12.4g}  {}\n", s.name, s.max_sigma, s.max_peak,
                       s.pass ? "PASS" : "FAIL");
  }
  out += fmt::format("overall: {}\n", report.pass() ? "PASS" : "FAIL");
  return out;
}

}  // namespace qtraj

namespace qtraj {

PresetBundle run_bundle(const ScenarioConfig& config,
                        const std::optional<std::filesystem::path>& out_dir) {
  ScenarioConfig classical = config;
  classical.mode = Mode::kClassical;
  const ScenarioConfig free = free_variant(config);
  PresetBundle b{simulate(config), simulate(classical), simulate(free), simulate_oracle(config),
                 simulate_oracle(free)};
  if (out_dir) {
    write_result(*out_dir / "quantum", b.quantum, &b.free);
    write_result(*out_dir / "classical", b.classical, &b.free);
    write_result(*out_dir / "free", b.free, nullptr);
    write_result(*out_dir / "oracle", b.oracle, &b.oracle_free);
    write_result(*out_dir / "oracle-free", b.oracle_free, nullptr);
  }
  return b;
}

namespace {

std::string fs_cell(const TimedValue* v, const UnitSystem& units) {
  if (v == nullptr) return "n/a";
  if (v->status != "ok") return v->status;
  return fmt::format("{:.3f} +- {:.3f}", convert(v->value.value, QuantityKind::kTime, units),
                     convert(v->value.std_error, QuantityKind::kTime, units));
}

std::string gap_cell(const std::vector<TimedValue>& table, const std::string& label,
                     const UnitSystem& units) {
  const TimedValue* presence = find_timed(table, "mean_presence@" + label);
  const TimedValue* arrival = find_timed(table, "mean_arrival@" + label);
  if (presence == nullptr || arrival == nullptr) return "n/a";
  if (presence->status != "ok") return presence->status;
  if (arrival->status != "ok") return arrival->status;
  return fmt::format("{:.3f} +- {:.3f}",
                     convert(presence->value.value - arrival->value.value, QuantityKind::kTime, units),
                     convert(std::hypot(presence->value.std_error, arrival->value.std_error),
                             QuantityKind::kTime, units));
}

const MomentumRecord* transmitted_record(const ScenarioResult& r) {
  for (const auto& m : r.momentum) {
    if (m.region == "transmitted" && m.stats) return &m;
  }
  return nullptr;
}

}  // namespace

std::string summary_table(const std::string& name, const PresetBundle& b) {
  const UnitSystem units;
  const auto mc = timing_table(b.quantum, &b.free);
  const auto exact = timing_table(b.oracle, &b.oracle_free, true);
  const auto& c = b.quantum.config;
  const std::string lo = detector_label(detector_position(c, -0.67));
  const std::string hi = detector_label(detector_position(c, 0.67));
  const std::string far = detector_label(detector_position(c, 5.0));
  const std::string probe = detector_label(detector_position(c, 15.0));

  std::string out = fmt::format("== {} ==\n{:<34} {:>24} {:>24}\n", name, "quantity (fs)",
                                "monte carlo", "oracle");
  const auto row = [&](const std::string& label, const std::string& a, const std::string& e) {
    out += fmt::format("{:<34} {:>24} {:>24}\n", label, a, e);
  };
  const std::string transit = "transit@" + lo + ":" + hi;
  row("transit -0.67s..+0.67s", fs_cell(find_timed(mc, transit), units),
      fs_cell(find_timed(exact, transit), units));
  row("free transit -0.67s..+0.67s", fs_cell(find_timed(mc, "free_" + transit), units),
      fs_cell(find_timed(exact, "free_" + transit), units));
  for (const auto& [tag, label] :
       {std::pair{"+0.67s", hi}, std::pair{"+5s", far}, std::pair{"+15s", probe}}) {
    row(std::string("arrival delay ") + tag, fs_cell(find_timed(mc, "delay@" + label), units),
        fs_cell(find_timed(exact, "delay@" + label), units));
  }
  for (const auto& [tag, label] : {std::pair{"+0.67s", hi}, std::pair{"+5s", far}}) {
    row(std::string("presence - arrival ") + tag, gap_cell(mc, label, units),
        gap_cell(exact, label, units));
  }
  const auto last = [](const ScenarioResult& r) { return r.snapshots.back().transmission; };
  out += fmt::format("{:<34} {:>24} {:>24}\n", "transmission (quantum)",
                     fmt::format("{:.4g} +- {:.2g}", last(b.quantum).value, last(b.quantum).std_error),
                     fmt::format("{:.4g}", last(b.oracle).value));
  out += fmt::format("{:<34} {:>24}\n", "transmission (classical)",
                     fmt::format("{:.4g} +- {:.2g}", last(b.classical).value,
                                 last(b.classical).std_error));
  const MomentumRecord* m = transmitted_record(b.quantum);
  const MomentumRecord* e = transmitted_record(b.oracle);
  const auto stat = [](const MomentumRecord* r, bool mean) {
    if (r == nullptr) return std::string("EmptyRegion");
    const Estimate& v = mean ? r->stats->mean : r->stats->variance;
    return fmt::format("{:.5g} +- {:.2g}", v.value, v.std_error);
  };
  row("transmitted mean p (natural)", stat(m, true), stat(e, true));
  row("transmitted var p (natural)", stat(m, false), stat(e, false));
  return out;
}

}  // namespace qtraj
