#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "qtraj/config.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

// Periodic grid: node i sits at x_min + i * dx with dx = (x_max - x_min) / n.
struct GridWavefunction {
  double x_min = 0.0;
  double x_max = 0.0;
  std::vector<std::complex<double>> values;
  double time = 0.0;

  [[nodiscard]] std::size_t n_points() const noexcept { return values.size(); }
  [[nodiscard]] double dx() const noexcept {
    return (x_max - x_min) / static_cast<double>(values.size());
  }
  [[nodiscard]] double x(std::size_t i) const noexcept {
    return x_min + dx() * static_cast<double>(i);
  }
  [[nodiscard]] double norm() const noexcept;
};

// Throws DomainTooSmall unless [x0 - 10 sigma_x, x0 + 10 sigma_x] fits.
[[nodiscard]] GridWavefunction init_grid(const PacketSpec& packet, double x_min, double x_max,
                                         std::size_t n_points);

// Strang split-step Fourier propagator with a fixed step.
class SplitStepPropagator {
 public:
  SplitStepPropagator(std::size_t n_points, double x_min, double x_max, const BarrierSpec& barrier,
                      double dt);
  ~SplitStepPropagator();
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  void step(GridWavefunction& psi, int steps = 1);

 private:
  struct Plans;
  std::size_t n_;
  double dt_;
  std::vector<std::complex<double>> half_potential_;
  std::vector<std::complex<double>> kinetic_;
  Plans* plans_;
};

// One Strang step as a pure function.
[[nodiscard]] GridWavefunction split_step(GridWavefunction psi, double dt,
                                          const BarrierSpec& barrier);

// Angular wavenumber of FFT bin j.
[[nodiscard]] std::vector<double> grid_wavenumbers(std::size_t n_points, double dx);

// J(x_i) = Im(psi* d psi / dx), spectral derivative.
[[nodiscard]] std::vector<double> grid_flux(const GridWavefunction& psi);

// Cubic interpolation of node values at X. Throws OutOfDomain.
[[nodiscard]] double interpolate_cubic(const GridWavefunction& grid,
                                       const std::vector<double>& nodes, double x);
[[nodiscard]] double oracle_density(const GridWavefunction& psi, double x);
[[nodiscard]] double oracle_flux(const GridWavefunction& psi, double x);

// Expectations of the detector symbols K_h(q - X) and p K_h(q - X).
[[nodiscard]] double oracle_smoothed_density(const GridWavefunction& psi, double x, double h);
[[nodiscard]] double oracle_smoothed_flux(const GridWavefunction& psi, const std::vector<double>& flux,
                                          double x, double h);

[[nodiscard]] double oracle_transmission(const GridWavefunction& psi, double boundary);

struct OracleMoments {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
};
[[nodiscard]] OracleMoments oracle_moments(const GridWavefunction& psi);

// Momentum density of psi restricted to x > boundary (whole grid when unset),
// normalized to unit integral over k. Returns (k, density) sorted by k.
struct MomentumSpectrum {
  std::vector<double> k;
  std::vector<double> density;
  double region_mass = 0.0;
};
[[nodiscard]] MomentumSpectrum oracle_momentum_spectrum(const GridWavefunction& psi,
                                                        std::optional<double> boundary);
// Spectrum mass per bin for the given edges.
[[nodiscard]] std::vector<double> bin_spectrum(const MomentumSpectrum& spectrum,
                                               const std::vector<double>& edges);

// Propagates the configured packet, calling sink at each snapshot time.
void run_oracle(const ScenarioConfig& config,
                const std::function<void(const GridWavefunction&)>& sink);

// Plane-wave transmission |T|^2 through the barrier at energy e, from the
// stationary equation integrated across [d - reach, d + reach].
[[nodiscard]] double stationary_transmission(double energy, const BarrierSpec& barrier,
                                             double reach_sigmas = 10.0);

}  // namespace qtraj
