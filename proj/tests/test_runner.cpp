#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qtraj/config_io.hpp"
#include "qtraj/error.hpp"
#include "qtraj/presets.hpp"
#include "qtraj/runner.hpp"

using namespace qtraj;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qtraj_test_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

ScenarioConfig quick_classical() {
  ScenarioConfig c = preset("narrow");
  c.mode = Mode::kClassical;
  c.ensemble_size = 4000;
  c.n_snapshots = 111;
  return c;
}

double peak(const TimeSeriesObservable& s) {
  double m = 0.0;
  for (double v : s.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("config parsing") {
  CHECK(parse_config("[scenario]\npreset = wide\n") == preset("wide"));
  CHECK(parse_config("", preset("wide")) == preset("wide"));
  CHECK(parse_config("# comment\n\n[scenario]\npreset = narrow\n") == preset("narrow"));

  CHECK_THROWS_AS((void)parse_config("[scenario]\npreset = wide\n[numerics]\nensemble_size = 0\n"),
                  ValidationError);
  try {
    (void)parse_config("[scenario]\npreset = wide\n\n[packet]\nwidth = 3\n");
    FAIL("unknown key accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS((void)parse_config("[nowhere]\n"), ParseError);
  CHECK_THROWS_AS((void)parse_config("[packet]\nx0 = abc\n"), ParseError);
  CHECK_THROWS_AS((void)parse_config("[scenario]\npreset = tall\n"), ParseError);

  for (const auto& name : preset_names()) {
    ScenarioConfig c = preset(name);
    c.seed = 0xfedcba9876543210ULL;
    c.bandwidth = 0.1 + 1.0 / 3.0;
    c.detectors.push_back(-1.0 / 7.0);
    CHECK(parse_config(emit_config(c)) == c);
  }
}

TEST_CASE("presets") {
  const ScenarioConfig wide = preset("wide");
  CHECK(wide.barrier.sigma == 5.0);
  CHECK(wide.packet.delta_k == 0.04);
  CHECK(wide.packet.sigma_x == doctest::Approx(12.5));
  CHECK(wide.packet.x0 == -92.5);
  const ScenarioConfig narrow = preset("narrow");
  CHECK(narrow.barrier.sigma == 1.0);
  CHECK(narrow.packet.sigma_x == doctest::Approx(4.0));
  CHECK(narrow.packet.x0 == -43.0);
  CHECK(preset("wide-free").barrier.v0 == 0.0);
  CHECK(detector_position(wide, -0.67) == doctest::Approx(-3.35));
  for (double offset : {-5.0, -0.67, 0.0, 0.67, 5.0}) {
    CHECK(std::count(wide.detectors.begin(), wide.detectors.end(), offset * 5.0) == 1);
  }
}

TEST_CASE("run_scenario writes deterministic outputs") {
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  const ScenarioConfig c = quick_classical();
  const RunReport first = run_scenario(c, Source::kMonteCarlo, a);
  (void)run_scenario(c, Source::kMonteCarlo, b);
  REQUIRE(first.free_run.has_value());
  for (const char* file : {"snapshots.csv", "detectors.csv", "momentum.csv", "times.csv"}) {
    REQUIRE(fs::exists(a / file));
    CHECK(slurp(a / file) == slurp(b / file));
  }
  CHECK(fs::exists(a / "manifest.json"));
  const std::string header = slurp(a / "detectors.csv").substr(0, 80);
  CHECK(header.rfind("time_natural,time_fs,detector_x,density,density_err,flux,flux_err\n", 0) == 0);
  CHECK(slurp(a / "snapshots.csv").rfind(
            "time_natural,time_fs,mean_q,mean_q_err,mean_p,mean_p_err,var_q,var_q_err,var_p,"
            "var_p_err,trans_prob,trans_prob_err\n",
            0) == 0);

  const ComparisonReport self = compare_dirs(a, b);
  CHECK(self.pass());
  for (const auto& s : self.series) {
    CHECK(s.max_sigma == 0.0);
    CHECK(s.max_peak == 0.0);
  }
  CHECK(compare_results(first.run, first.run).pass());

  ScenarioConfig other = c;
  other.detectors.pop_back();
  const fs::path d = scratch("d");
  (void)run_scenario(other, Source::kMonteCarlo, d);
  CHECK_THROWS_AS((void)compare_dirs(a, d), GridMismatch);
  other = c;
  other.n_snapshots = 56;
  const ScenarioResult coarse = simulate(other);
  CHECK_THROWS_AS((void)compare_results(first.run, coarse), GridMismatch);
  CHECK_THROWS_AS((void)compare_dirs(a, scratch("missing")), IoError);
  for (const fs::path& dir : {a, b, d}) fs::remove_all(dir);
}

TEST_CASE("narrow barrier: classical differs from quantum") {
  ScenarioConfig q = preset("narrow");
  q.ensemble_size = 40000;
  q.replicas = 4;
  q.n_snapshots = 111;
  ScenarioConfig c = q;
  c.mode = Mode::kClassical;
  const ScenarioResult quantum = simulate(q);
  const ScenarioResult classical = simulate(c);
  const ComparisonReport report = compare_results(classical, quantum);
  CHECK_FALSE(report.pass());
  const auto beyond = std::find(q.detectors.begin(), q.detectors.end(), 5.0) - q.detectors.begin();
  const double ratio = peak(quantum.density[beyond]) / peak(classical.density[beyond]);
  MESSAGE("transmitted density ratio ", ratio);
  CHECK(ratio > 10.0);
}
