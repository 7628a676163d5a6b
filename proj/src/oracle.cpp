#include "qtraj/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <mutex>
#include <numbers>

#include "qtraj/error.hpp"
#include "qtraj/observables.hpp"

namespace qtraj {

namespace {

using Complex = std::complex<double>;

// The FFTW planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Owns an aligned buffer with forward and backward in-place plans.
class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n) : n_(n) {
    data_ = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * n));
    auto* raw = reinterpret_cast<fftw_complex*>(data_);
    const std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    const std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(data_);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  [[nodiscard]] Complex* data() noexcept { return data_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  void forward() noexcept { fftw_execute(forward_); }
  // Unnormalized: the caller divides by n.
  void backward() noexcept { fftw_execute(backward_); }

 private:
  std::size_t n_;
  Complex* data_;
  fftw_plan forward_;
  fftw_plan backward_;
};

void require_power_of_two(std::size_t n) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw ValidationError("oracle.points", "grid size must be a power of two");
  }
}

}  // namespace

struct SplitStepPropagator::Plans {
  explicit Plans(std::size_t n) : buffer(n) {}
  FftBuffer buffer;
};

double GridWavefunction::norm() const noexcept {
  double sum = 0.0;
  for (const auto& v : values) sum += std::norm(v);
  return sum * dx();
}

GridWavefunction init_grid(const PacketSpec& packet, double x_min, double x_max,
                           std::size_t n_points) {
  packet.validate();
  require_power_of_two(n_points);
  if (!(x_min < packet.x0 - 10.0 * packet.sigma_x && x_max > packet.x0 + 10.0 * packet.sigma_x)) {
    throw DomainTooSmall("grid must contain x0 +- 10 sigma_x");
  }
  GridWavefunction psi{x_min, x_max, std::vector<Complex>(n_points), 0.0};
  const double amplitude = std::pow(2.0 * std::numbers::pi * packet.sigma_x * packet.sigma_x, -0.25);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = psi.x(i);
    const double u = (x - packet.x0) / packet.sigma_x;
    psi.values[i] = amplitude * std::exp(-0.25 * u * u) * std::polar(1.0, packet.k0 * x);
  }
  const double scale = 1.0 / std::sqrt(psi.norm());
  for (auto& v : psi.values) v *= scale;
  return psi;
}

std::vector<double> grid_wavenumbers(std::size_t n_points, double dx) {
  std::vector<double> k(n_points);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n_points) * dx);
  const auto n = static_cast<std::ptrdiff_t>(n_points);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    k[static_cast<std::size_t>(j)] = dk * static_cast<double>(j < n / 2 ? j : j - n);
  }
  return k;
}

SplitStepPropagator::SplitStepPropagator(std::size_t n_points, double x_min, double x_max,
                                         const BarrierSpec& barrier, double dt)
    : n_(n_points), dt_(dt), half_potential_(n_points), kinetic_(n_points) {
  require_power_of_two(n_points);
  const double dx = (x_max - x_min) / static_cast<double>(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = x_min + dx * static_cast<double>(i);
    half_potential_[i] = std::polar(1.0, -0.5 * dt * potential(x, barrier));
  }
  const auto k = grid_wavenumbers(n_points, dx);
  for (std::size_t j = 0; j < n_points; ++j) kinetic_[j] = std::polar(1.0, -0.5 * k[j] * k[j] * dt);
  plans_ = new Plans(n_points);
}

SplitStepPropagator::~SplitStepPropagator() { delete plans_; }

void SplitStepPropagator::step(GridWavefunction& psi, int steps) {
  if (psi.n_points() != n_) throw GridMismatch("wavefunction and propagator grids differ");
  if (steps <= 0) return;
  Complex* a = plans_->buffer.data();
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) a[i] = psi.values[i] * half_potential_[i];
  for (int s = 0; s < steps; ++s) {
    plans_->buffer.forward();
    for (std::size_t j = 0; j < n_; ++j) a[j] *= kinetic_[j] * inv_n;
    plans_->buffer.backward();
    // Adjacent potential half steps merge into one full step.
    const bool last = s + 1 == steps;
    for (std::size_t i = 0; i < n_; ++i) {
      a[i] *= last ? half_potential_[i] : half_potential_[i] * half_potential_[i];
    }
  }
  for (std::size_t i = 0; i < n_; ++i) psi.values[i] = a[i];
  psi.time += dt_ * steps;
}

GridWavefunction split_step(GridWavefunction psi, double dt, const BarrierSpec& barrier) {
  SplitStepPropagator propagator(psi.n_points(), psi.x_min, psi.x_max, barrier, dt);
  propagator.step(psi);
  return psi;
}

std::vector<double> grid_flux(const GridWavefunction& psi) {
  const std::size_t n = psi.n_points();
  FftBuffer buffer(n);
  Complex* a = buffer.data();
  std::copy(psi.values.begin(), psi.values.end(), a);
  buffer.forward();
  const auto k = grid_wavenumbers(n, psi.dx());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) a[j] *= Complex(0.0, k[j] * inv_n);
  buffer.backward();
  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i) flux[i] = std::imag(std::conj(psi.values[i]) * a[i]);
  return flux;
}

double interpolate_cubic(const GridWavefunction& grid, const std::vector<double>& nodes, double x) {
  const double u = (x - grid.x_min) / grid.dx();
  const auto i = static_cast<std::ptrdiff_t>(std::floor(u));
  if (!std::isfinite(u) || i < 1 || i + 2 >= static_cast<std::ptrdiff_t>(nodes.size())) {
    throw OutOfDomain("position lies outside the oracle grid");
  }
  const double t = u - static_cast<double>(i);
  const auto at = [&](std::ptrdiff_t j) { return nodes[static_cast<std::size_t>(i + j)]; };
  // Four-point Lagrange weights on nodes i - 1 .. i + 2.
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * at(-1) + w1 * at(0) + w2 * at(1) + w3 * at(2);
}

double oracle_density(const GridWavefunction& psi, double x) {
  std::vector<double> density(psi.n_points());
  for (std::size_t i = 0; i < density.size(); ++i) density[i] = std::norm(psi.values[i]);
  return interpolate_cubic(psi, density, x);
}

double oracle_flux(const GridWavefunction& psi, double x) {
  return interpolate_cubic(psi, grid_flux(psi), x);
}

namespace {

template <typename Node>
double smoothed(const GridWavefunction& psi, double x, double h, Node node) {
  if (!(x > psi.x_min && x < psi.x_max)) throw OutOfDomain("detector lies outside the oracle grid");
  const double dx = psi.dx();
  const double reach = 8.0 * h;
  const auto lo = static_cast<std::ptrdiff_t>(std::max(0.0, std::floor((x - reach - psi.x_min) / dx)));
  const auto hi = std::min(static_cast<std::ptrdiff_t>(psi.n_points()) - 1,
                           static_cast<std::ptrdiff_t>(std::ceil((x + reach - psi.x_min) / dx)));
  double sum = 0.0;
  for (std::ptrdiff_t i = lo; i <= hi; ++i) {
    const auto j = static_cast<std::size_t>(i);
    sum += node(j) * detector_kernel(psi.x(j) - x, h);
  }
  return sum * dx;
}

}  // namespace

double oracle_smoothed_density(const GridWavefunction& psi, double x, double h) {
  return smoothed(psi, x, h, [&](std::size_t i) { return std::norm(psi.values[i]); });
}

double oracle_smoothed_flux(const GridWavefunction& psi, const std::vector<double>& flux, double x,
                            double h) {
  return smoothed(psi, x, h, [&](std::size_t i) { return flux[i]; });
}

double oracle_transmission(const GridWavefunction& psi, double boundary) {
  double sum = 0.0;
  for (std::size_t i = 0; i < psi.n_points(); ++i) {
    if (psi.x(i) > boundary) sum += std::norm(psi.values[i]);
  }
  return sum * psi.dx();
}

OracleMoments oracle_moments(const GridWavefunction& psi) {
  OracleMoments m;
  double mass = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  for (std::size_t i = 0; i < psi.n_points(); ++i) {
    const double rho = std::norm(psi.values[i]);
    const double x = psi.x(i);
    mass += rho;
    q1 += rho * x;
    q2 += rho * x * x;
  }
  m.mean_q = q1 / mass;
  m.var_q = q2 / mass - m.mean_q * m.mean_q;

  FftBuffer buffer(psi.n_points());
  std::copy(psi.values.begin(), psi.values.end(), buffer.data());
  buffer.forward();
  const auto k = grid_wavenumbers(psi.n_points(), psi.dx());
  double kmass = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  for (std::size_t j = 0; j < psi.n_points(); ++j) {
    const double a = std::norm(buffer.data()[j]);
    kmass += a;
    k1 += a * k[j];
    k2 += a * k[j] * k[j];
  }
  m.mean_p = k1 / kmass;
  m.var_p = k2 / kmass - m.mean_p * m.mean_p;
  return m;
}

MomentumSpectrum oracle_momentum_spectrum(const GridWavefunction& psi,
                                          std::optional<double> boundary) {
  const std::size_t n = psi.n_points();
  FftBuffer buffer(n);
  MomentumSpectrum spectrum;
  for (std::size_t i = 0; i < n; ++i) {
    const bool inside = !boundary || psi.x(i) > *boundary;
    buffer.data()[i] = inside ? psi.values[i] : Complex(0.0, 0.0);
    if (inside) spectrum.region_mass += std::norm(psi.values[i]);
  }
  spectrum.region_mass *= psi.dx();
  if (!(spectrum.region_mass > 0.0)) throw EmptyRegion("oracle region carries no probability");
  buffer.forward();
  const auto k = grid_wavenumbers(n, psi.dx());
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * psi.dx());
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += std::norm(buffer.data()[j]);
  spectrum.k.resize(n);
  spectrum.density.resize(n);
  // Reorder from FFT layout to increasing k.
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = (j + n / 2) % n;
    spectrum.k[j] = k[src];
    spectrum.density[j] = std::norm(buffer.data()[src]) / (total * dk);
  }
  return spectrum;
}

std::vector<double> bin_spectrum(const MomentumSpectrum& spectrum, const std::vector<double>& edges) {
  std::vector<double> masses(edges.size() > 0 ? edges.size() - 1 : 0, 0.0);
  if (spectrum.k.size() < 2) return masses;
  const double dk = spectrum.k[1] - spectrum.k[0];
  // Each spectral sample spreads its mass uniformly over its own cell.
  for (std::size_t j = 0; j < spectrum.k.size(); ++j) {
    const double lo = spectrum.k[j] - 0.5 * dk;
    const double hi = spectrum.k[j] + 0.5 * dk;
    if (hi <= edges.front() || lo >= edges.back()) continue;
    auto b = static_cast<std::size_t>(
        std::max<std::ptrdiff_t>(0, std::upper_bound(edges.begin(), edges.end(), lo) - edges.begin() - 1));
    for (; b < masses.size() && edges[b] < hi; ++b) {
      const double overlap = std::min(hi, edges[b + 1]) - std::max(lo, edges[b]);
      if (overlap > 0.0) masses[b] += spectrum.density[j] * overlap;
    }
  }
  return masses;
}

void run_oracle(const ScenarioConfig& config,
                const std::function<void(const GridWavefunction&)>& sink) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.oracle_points);
  GridWavefunction psi =
      init_grid(config.packet, -config.oracle_half_domain, config.oracle_half_domain, n);
  const auto times = config.snapshot_times();
  sink(psi);
  if (times.size() < 2) return;
  const double interval = times[1] - times[0];
  const int substeps = std::max(1, static_cast<int>(std::ceil(interval / config.oracle_dt - 1e-9)));
  SplitStepPropagator propagator(n, psi.x_min, psi.x_max, config.barrier, interval / substeps);
  for (std::size_t i = 1; i < times.size(); ++i) {
    propagator.step(psi, substeps);
    psi.time = times[i];
    sink(psi);
  }
}

double stationary_transmission(double energy, const BarrierSpec& barrier, double reach_sigmas) {
  barrier.validate();
  if (!(energy > 0.0)) throw ValidationError("energy", "must be positive");
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 4>;  // Re psi, Im psi, Re psi', Im psi'
  const double k = std::sqrt(2.0 * energy);
  const double x_right = barrier.d + reach_sigmas * barrier.sigma;
  const double x_left = barrier.d - reach_sigmas * barrier.sigma;

  // Pure outgoing wave on the right, integrated backwards.
  const Complex right = std::polar(1.0, k * x_right);
  const Complex right_prime = Complex(0.0, k) * right;
  State state{right.real(), right.imag(), right_prime.real(), right_prime.imag()};
  const auto rhs = [&](const State& s, State& ds, double x) {
    const double c = 2.0 * (potential(x, barrier) - energy);
    ds = {s[2], s[3], c * s[0], c * s[1]};
  };
  odeint::integrate_adaptive(
      odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(1e-12, 1e-12), rhs, state,
      x_right, x_left, -1e-3);

  const Complex psi(state[0], state[1]);
  const Complex psi_prime(state[2], state[3]);
  const Complex incident = 0.5 * (psi + psi_prime / Complex(0.0, k)) * std::polar(1.0, -k * x_left);
  return 1.0 / std::norm(incident);
}

}  // namespace qtraj
