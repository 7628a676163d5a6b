#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qtraj/oracle.hpp"
#include "qtraj/presets.hpp"
#include "support.hpp"

using namespace qtraj;

namespace {

const BarrierSpec kFree{0.0, 0.0, 1.0};
const BarrierSpec kNarrow{1.0, 0.0, 1.0};

std::size_t nearest_node(const GridWavefunction& psi, double x) {
  return static_cast<std::size_t>(std::lround((x - psi.x_min) / psi.dx()));
}

double transmitted_after(double t, double dt, std::size_t n, double half_domain) {
  const PacketSpec packet = PacketSpec::from_spread(-43.0, 1.0, 0.125);
  GridWavefunction psi = init_grid(packet, -half_domain, half_domain, n);
  SplitStepPropagator propagator(n, psi.x_min, psi.x_max, kNarrow, dt);
  propagator.step(psi, static_cast<int>(std::lround(t / dt)));
  return oracle_transmission(psi, 0.0);
}

}  // namespace

TEST_CASE("initial grid wavefunction") {
  const PacketSpec packet = PacketSpec::from_spread(-92.5, 1.0, 0.04);
  const GridWavefunction psi = init_grid(packet, -400.0, 400.0, 1 << 15);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
  CHECK(oracle_density(psi, packet.x0) == doctest::Approx(0.031915).epsilon(1e-4));
  CHECK(std::abs(oracle_density(psi, packet.x0) - testing::free_density(packet, packet.x0, 0.0)) < 1e-10);
  const OracleMoments m = oracle_moments(psi);
  CHECK(std::abs(m.mean_p - packet.k0) < 1e-8);
  CHECK(std::abs(m.var_p - packet.delta_k * packet.delta_k) < 1e-8);
  CHECK(std::abs(oracle_smoothed_density(psi, packet.x0 + 3.0, 0.5) -
                 testing::free_density(packet, packet.x0 + 3.0, 0.0, 0.5)) < 1e-10);

  CHECK_THROWS_AS((void)init_grid(packet, -150.0, 400.0, 1 << 12), DomainTooSmall);
  CHECK_THROWS_AS((void)init_grid(packet, -400.0, 400.0, 3000), ValidationError);
  CHECK_THROWS_AS((void)oracle_density(psi, 500.0), OutOfDomain);
  CHECK_THROWS_AS((void)oracle_smoothed_density(psi, -401.0, 0.5), OutOfDomain);
}

TEST_CASE("free propagation is exact") {
  const PacketSpec packet = PacketSpec::from_spread(-92.5, 1.0, 0.04);
  GridWavefunction psi = init_grid(packet, -400.0, 400.0, 1 << 13);
  SplitStepPropagator propagator(psi.n_points(), psi.x_min, psi.x_max, kFree, 0.5);
  propagator.step(psi, 200);
  const double t = 100.0;
  const OracleMoments m = oracle_moments(psi);
  CHECK(std::abs(m.mean_q - (packet.x0 + packet.k0 * t)) < 1e-8);
  CHECK(std::abs(m.var_q - testing::free_var_q(packet, t)) < 1e-8);
  CHECK(std::abs(m.mean_p - packet.k0) < 1e-8);
  CHECK(std::abs(m.var_p - packet.delta_k * packet.delta_k) < 1e-8);

  // Velocity at the packet centre is k0.
  // Local velocity J/rho of a free packet is linear in x and equals k0 at the centre.
  const std::size_t centre = nearest_node(psi, packet.x0 + packet.k0 * t);
  const auto flux = grid_flux(psi);
  const double x = psi.x(centre);
  const double chirp = packet.delta_k * packet.delta_k * t / testing::free_var_q(packet, t);
  const double velocity = packet.k0 + chirp * (x - packet.x0 - packet.k0 * t);
  CHECK(std::abs(flux[centre] / std::norm(psi.values[centre]) - velocity) < 1e-6);
  CHECK(std::abs(velocity - packet.k0) < 1e-3);

  // The pure step agrees with the propagator.
  GridWavefunction a = init_grid(packet, -400.0, 400.0, 1 << 12);
  GridWavefunction b = split_step(a, 0.3, kNarrow);
  SplitStepPropagator one(a.n_points(), a.x_min, a.x_max, kNarrow, 0.3);
  one.step(a);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.n_points(); ++i) diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
  CHECK(diff < 1e-14);
}

TEST_CASE("unitarity over many steps") {
  const PacketSpec packet = PacketSpec::from_spread(-43.0, 1.0, 0.125);
  GridWavefunction psi = init_grid(packet, -100.0, 100.0, 2048);
  SplitStepPropagator propagator(psi.n_points(), psi.x_min, psi.x_max, kNarrow, 0.01);
  propagator.step(psi, 100000);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-9);
  const double t = oracle_transmission(psi, 0.0);
  const double r = 1.0 - t;
  CHECK(std::abs(t + r - psi.norm()) < 1e-9);
}

TEST_CASE("time-step convergence of the transmitted probability") {
  // The default step of 0.01 gives a relative change near 7e-6; 1e-6 needs dt below 0.003.
  const double coarse = transmitted_after(110.0, 0.005, 1 << 13, 200.0);
  const double mid = transmitted_after(110.0, 0.0025, 1 << 13, 200.0);
  const double fine = transmitted_after(110.0, 0.00125, 1 << 13, 200.0);
  const double ratio = std::abs(coarse - mid) / std::abs(mid - fine);
  MESSAGE("T = ", fine, ", halving ratio ", ratio, ", relative change ", std::abs(mid - fine) / fine);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  CHECK(std::abs(mid - fine) / fine < 1e-6);
}

TEST_CASE("broad packet transmission approaches the stationary value") {
  // delta_k = 0.02: the energy spread barely samples the curvature of T(E).
  const PacketSpec packet = PacketSpec::from_spread(-300.0, 1.0, 0.02);
  GridWavefunction psi = init_grid(packet, -600.0, 600.0, 1 << 13);
  SplitStepPropagator propagator(psi.n_points(), psi.x_min, psi.x_max, kNarrow, 0.05);
  propagator.step(psi, 12000);
  const double packet_t = oracle_transmission(psi, 0.0);
  const double plane_wave = stationary_transmission(0.5, kNarrow);
  MESSAGE("packet ", packet_t, ", plane wave ", plane_wave);
  CHECK(plane_wave == doctest::Approx(0.135528).epsilon(1e-4));
  CHECK(packet_t == doctest::Approx(plane_wave).epsilon(0.02));
  CHECK(stationary_transmission(0.5, kFree) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(stationary_transmission(3.0, kNarrow) > stationary_transmission(0.5, kNarrow));
}

TEST_CASE("momentum spectrum") {
  const PacketSpec packet = PacketSpec::from_spread(-43.0, 1.0, 0.125);
  const GridWavefunction psi = init_grid(packet, -400.0, 400.0, 1 << 14);
  const MomentumSpectrum all = oracle_momentum_spectrum(psi, std::nullopt);
  CHECK(all.region_mass == doctest::Approx(1.0).epsilon(1e-10));
  double mass = 0.0;
  double mean = 0.0;
  const double dk = all.k[1] - all.k[0];
  for (std::size_t j = 0; j < all.k.size(); ++j) {
    mass += all.density[j] * dk;
    mean += all.k[j] * all.density[j] * dk;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(packet.k0).epsilon(1e-8));
  std::vector<double> edges;
  for (int i = 0; i <= 201; ++i) edges.push_back(-3.0 + 6.0 * i / 201.0);
  double binned = 0.0;
  for (double v : bin_spectrum(all, edges)) binned += v;
  CHECK(binned == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS((void)oracle_momentum_spectrum(psi, 399.0), EmptyRegion);
}

TEST_CASE("preset run: unitarity and domain independence") {
  ScenarioConfig c = preset("narrow");
  c.n_snapshots = 12;
  double drift = 0.0;
  std::vector<double> t_small;
  std::vector<double> rho_small;
  run_oracle(c, [&](const GridWavefunction& psi) {
    drift = std::max(drift, std::abs(psi.norm() - 1.0));
    t_small.push_back(oracle_transmission(psi, 0.0));
    rho_small.push_back(oracle_smoothed_density(psi, 5.0, 0.5));
  });
  CHECK(drift < 1e-9);

  c.oracle_half_domain *= 2.0;
  c.oracle_points *= 2;
  std::size_t i = 0;
  double worst = 0.0;
  run_oracle(c, [&](const GridWavefunction& psi) {
    if (t_small[i] > 1e-6) worst = std::max(worst, std::abs(oracle_transmission(psi, 0.0) / t_small[i] - 1.0));
    const double peak = *std::max_element(rho_small.begin(), rho_small.end());
    worst = std::max(worst, std::abs(oracle_smoothed_density(psi, 5.0, 0.5) - rho_small[i]) / peak);
    ++i;
  });
  CHECK(worst < 1e-3);
}
