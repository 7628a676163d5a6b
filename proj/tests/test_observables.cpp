#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qtraj/observables.hpp"
#include "qtraj/presets.hpp"
#include "qtraj/runner.hpp"
#include "qtraj/trajectory.hpp"
#include "support.hpp"

using namespace qtraj;

namespace {

TimeSeriesObservable series(double t_final, int n, double (*f)(double)) {
  TimeSeriesObservable s;
  for (int i = 0; i < n; ++i) {
    const double t = t_final * i / (n - 1);
    s.times.push_back(t);
    s.values.push_back(f(t));
    s.std_errors.push_back(0.0);
  }
  return s;
}

// Jackknife error of the time integral of a recorded series.
Estimate integral(const TimeSeriesObservable& s) {
  const double value = trapezoid(s.times, s.values);
  const double b = static_cast<double>(s.n_blocks());
  double mean = 0.0;
  std::vector<double> loo;
  for (std::size_t k = 0; k < s.n_blocks(); ++k) {
    loo.push_back(trapezoid(s.times, s.leave_out(k)));
    mean += loo.back() / b;
  }
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return {value, std::sqrt((b - 1.0) / b * ss)};
}

bool within(const Estimate& e, double expected, double sigmas = 3.0) {
  return std::abs(e.value - expected) <= sigmas * e.std_error;
}

// Free narrow packet recorded at detectors x0 + 20 and x0 + 40.
struct FreeRun {
  ScenarioConfig config;
  DetectorRecorder recorder{{-23.0, -3.0}, 0.5};
  std::vector<EnsembleSnapshot> first_and_last;
};

const FreeRun& free_run() {
  static const FreeRun run = [] {
    FreeRun r;
    r.config = testing::small_config(1.0, 0.125, -43.0, 110.0, 100000);
    r.config.barrier.v0 = 0.0;
    r.config.n_snapshots = 441;
    run_ensemble(r.config, [&](const EnsembleSnapshot& s) {
      r.recorder.record(s);
      if (s.time == 0.0 || s.time == r.config.t_final) r.first_and_last.push_back(s);
    });
    return r;
  }();
  return run;
}

std::size_t detector_index(const ScenarioConfig& config, double offset) {
  for (std::size_t d = 0; d < config.detectors.size(); ++d) {
    if (config.detectors[d] == detector_position(config, offset)) return d;
  }
  throw std::out_of_range("no detector at this offset");
}

}  // namespace

TEST_CASE("density and flux at t = 0") {
  ScenarioConfig c = testing::small_config(5.0, 0.04, -92.5, 1.0, 100000);
  c.mode = Mode::kClassical;
  c.n_snapshots = 2;
  const auto snapshot = run_ensemble(c).front();
  const double h = 0.5;
  const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi * c.packet.sigma_x * c.packet.sigma_x);
  CHECK(peak == doctest::Approx(0.031915).epsilon(1e-4));
  // Smoothing by the detector kernel widens the Gaussian by h in quadrature.
  const double smoothed = testing::free_density(c.packet, c.packet.x0, 0.0, h);
  CHECK(std::abs(smoothed - peak) < peak * h * h / (2.0 * c.packet.sigma_x * c.packet.sigma_x) * 1.01);
  const Estimate d = density_at(c.packet.x0, snapshot, h);
  CHECK(within(d, smoothed));
  const Estimate j = flux_at(c.packet.x0, snapshot, h);
  CHECK(within(j, c.packet.k0 * smoothed));
  const Estimate tail = density_at(c.packet.x0 - 20.0 * c.packet.sigma_x, snapshot, h);
  CHECK(tail.value == 0.0);
}

TEST_CASE("presence distribution") {
  const auto constant = series(10.0, 101, [](double) { return 3.0; });
  const auto p = presence_distribution(constant);
  for (double v : p.values) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(std::abs(trapezoid(p.times, p.values) - 1.0) < 1e-12);

  const auto bump = series(40.0, 401, [](double t) { return std::exp(-(t - 17.0) * (t - 17.0) / 8.0); });
  CHECK(mean_presence_time(bump).value == doctest::Approx(17.0).epsilon(1e-10));
  CHECK(mean_arrival_time(bump).value == doctest::Approx(17.0).epsilon(1e-10));
  CHECK(transit_time(bump, bump).value == 0.0);

  const auto zero = series(10.0, 11, [](double) { return 0.0; });
  CHECK_THROWS_AS((void)presence_distribution(zero), ZeroMass);
  CHECK_THROWS_AS((void)mean_presence_time(zero), ZeroMass);

  const auto two = series(100.0, 1001, [](double t) {
    return std::exp(-(t - 30.0) * (t - 30.0) / 20.0) + 0.6 * std::exp(-(t - 70.0) * (t - 70.0) / 20.0);
  });
  CHECK(count_lobes(two) == 2);
  CHECK(count_lobes(bump) == 1);
  CHECK(tail_fraction(bump) < 1e-10);
}

TEST_CASE("arrival distribution rejects reverse flux") {
  const auto signed_flux = series(100.0, 1001, [](double t) {
    return std::exp(-(t - 30.0) * (t - 30.0) / 20.0) - 0.6 * std::exp(-(t - 70.0) * (t - 70.0) / 20.0);
  });
  CHECK(backflow_fraction(signed_flux) == doctest::Approx(0.6 / 1.6).epsilon(1e-6));
  CHECK_THROWS_AS((void)arrival_distribution(signed_flux), BackflowDominant);
  CHECK_THROWS_AS((void)time_delay(signed_flux, signed_flux), BackflowDominant);
  const auto shorter = series(50.0, 1001, [](double t) { return std::exp(-(t - 20.0) * (t - 20.0)); });
  const auto longer = series(100.0, 1001, [](double t) { return std::exp(-(t - 20.0) * (t - 20.0)); });
  CHECK_THROWS_AS((void)time_delay(shorter, longer), GridMismatch);
  auto broken = shorter;
  broken.values.pop_back();
  CHECK_THROWS_AS(broken.validate(), GridMismatch);
}

TEST_CASE("free packet passes each detector once") {
  const FreeRun& run = free_run();
  const PacketSpec& packet = run.config.packet;
  std::vector<double> expected_presence;
  for (std::size_t d = 0; d < 2; ++d) {
    const double x = run.recorder.detectors()[d];
    const auto& density = run.recorder.density(d);
    const auto& flux = run.recorder.flux(d);
    CHECK(within(integral(flux), 1.0));

    // Mean presence and arrival times against quadrature of the smoothed
    // analytic density and flux. For the free packet q and p are jointly
    // Gaussian with cov(q, p) = delta_k^2 t, so the smoothed flux is
    // rho_h (k0 + cov (X - <q>) / (var_q + h^2)).
    const double h = 0.5;
    std::vector<double> t;
    std::vector<double> rho;
    std::vector<double> j;
    for (int i = 0; i <= 44000; ++i) {
      const double ti = run.config.t_final * i / 44000.0;
      const double r = testing::free_density(packet, x, ti, h);
      const double v = packet.k0 + packet.delta_k * packet.delta_k * ti *
                                       (x - packet.x0 - packet.k0 * ti) /
                                       (testing::free_var_q(packet, ti) + h * h);
      t.push_back(ti);
      rho.push_back(r);
      j.push_back(r * v);
    }
    const auto first_moment = [&](const std::vector<double>& f) {
      std::vector<double> tf(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) tf[i] = t[i] * f[i];
      return trapezoid(t, tf) / trapezoid(t, f);
    };
    const Estimate presence = mean_presence_time(density);
    const Estimate arrival = mean_arrival_time(flux);
    CHECK(within(presence, first_moment(rho)));
    CHECK(within(arrival, first_moment(j)));
    CHECK(backflow_fraction(flux) == 0.0);
    // Slow components dwell longer at the detector: presence lags the ballistic
    // time L / k0 by about 2 delta_k^2 of it, arrival by about delta_k^2.
    const double ballistic = (x - packet.x0) / packet.k0;
    const double spread = packet.delta_k * packet.delta_k * ballistic;
    CHECK(std::abs(presence.value - ballistic) < 3.0 * spread);
    CHECK(std::abs(arrival.value - ballistic) < 2.0 * spread);
    CHECK(std::abs(arrival.value - presence.value) < 2.0 * spread);
    expected_presence.push_back(first_moment(rho));
  }
  const Estimate transit = transit_time(run.recorder.density(0), run.recorder.density(1));
  CHECK(within(transit, expected_presence[1] - expected_presence[0]));
}

TEST_CASE("moments, momentum histogram and transmission of the free packet") {
  const FreeRun& run = free_run();
  const PacketSpec& packet = run.config.packet;
  const auto& first = run.first_and_last.front();
  const auto& last = run.first_and_last.back();

  const Moments m0 = moments(first);
  CHECK(within(m0.mean_q, packet.x0));
  CHECK(within(m0.mean_p, packet.k0));
  CHECK(within(m0.var_q, packet.sigma_x * packet.sigma_x));
  CHECK(within(m0.var_p, packet.delta_k * packet.delta_k));
  const Moments m1 = moments(last);
  CHECK(within(m1.var_q, testing::free_var_q(packet, run.config.t_final)));
  CHECK(within(m1.var_p, packet.delta_k * packet.delta_k));

  const Histogram h = momentum_distribution(first, std::nullopt, 201, -3.0, 3.0);
  double mass = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < h.masses.size(); ++k) {
    const double c = 0.5 * (h.edges[k] + h.edges[k + 1]);
    mass += h.masses[k];
    mean += c * h.masses[k];
    second += c * c * h.masses[k];
  }
  const double width = h.edges[1] - h.edges[0];
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(packet.k0).epsilon(0.01));
  CHECK(second - mean * mean - width * width / 12.0 ==
        doctest::Approx(packet.delta_k * packet.delta_k).epsilon(0.05));
  const Histogram observed = momentum_distribution(first, std::nullopt, 101);
  CHECK(observed.masses.front() == 0.0);
  CHECK(observed.masses.back() == 0.0);
  CHECK_THROWS_AS((void)momentum_distribution(first, 1e6, 101), EmptyRegion);

  const Estimate t = transmission_probability(last, 0.0);
  CHECK(within(t, 1.0));
}

TEST_CASE("detector series of the exact wide-barrier solution") {
  ScenarioConfig c = preset("wide");
  c.n_snapshots = 481;
  const ScenarioResult r = simulate_oracle(c);
  // Incident and reflected passes at the front detector.
  const auto& front = r.density[detector_index(c, -5.0)];
  CHECK(count_lobes(front) == 2);
  CHECK_THROWS_AS((void)arrival_distribution(r.flux[detector_index(c, -5.0)]), BackflowDominant);
  const auto arrival = arrival_distribution(r.flux[detector_index(c, 5.0)]);
  CHECK(trapezoid(arrival.times, arrival.values) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tail_fraction(r.density[detector_index(c, 5.0)]) < 0.005);
  CHECK(tail_fraction(front) < 0.005);
}

TEST_CASE("narrow-barrier quantum run") {
  ScenarioConfig c = preset("narrow");
  c.ensemble_size = 100000;
  c.n_snapshots = 111;
  const ScenarioResult r = simulate(c);
  // Transient maximum of the momentum variance during the interaction.
  double peak = 0.0;
  for (const auto& row : r.snapshots) peak = std::max(peak, row.moments.var_p.value);
  const double initial = r.snapshots.front().moments.var_p.value;
  const double final = r.snapshots.back().moments.var_p.value;
  MESSAGE("var_p initial ", initial, ", peak ", peak, ", final ", final);
  CHECK(peak > initial);
  CHECK(peak > final);
  // Mostly reflected.
  const auto& last = r.snapshots.back();
  CHECK(last.transmission.value > 0.0);
  CHECK(last.moments.mean_p.value < 0.0);
  CHECK(r.diagnostics.cap_hits == 0);
}
