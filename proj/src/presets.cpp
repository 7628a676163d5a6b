#include "qtraj/presets.hpp"

#include <cstdint>

#include "qtraj/error.hpp"
#include "qtraj/units.hpp"

namespace qtraj {

namespace {

ScenarioConfig base(std::string name, double sigma, double delta_k, double x0, double t_final,
                    double momentum_fs, std::int64_t ensemble, int replicas) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.packet = PacketSpec::from_spread(x0, 1.0, delta_k);
  c.barrier = {1.0, 0.0, sigma};
  c.t_final = t_final;
  c.n_snapshots = 512;
  c.ensemble_size = ensemble;
  c.replicas = replicas;
  for (double offset : kDetectorOffsets) c.detectors.push_back(offset * sigma);
  c.momentum_times = {convert_back(momentum_fs, QuantityKind::kTime, UnitSystem())};
  return c;
}

}  // namespace

ScenarioConfig preset(std::string_view name) {
  if (name == "narrow") return base("narrow", 1.0, 0.125, -43.0, 110.0, 218.0, 400000, 8);
  if (name == "wide") return base("wide", 5.0, 0.04, -92.5, 240.0, 385.0, 100000, 4);
  if (name == "narrow-free") {
    ScenarioConfig c = free_variant(preset("narrow"));
    c.name = "narrow-free";
    return c;
  }
  if (name == "wide-free") {
    ScenarioConfig c = free_variant(preset("wide"));
    c.name = "wide-free";
    return c;
  }
  throw ValidationError("scenario.preset", "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"narrow", "wide", "narrow-free", "wide-free"}; }

double detector_position(const ScenarioConfig& config, double offset) {
  return config.barrier.d + offset * config.barrier.sigma;
}

ScenarioConfig free_variant(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.barrier.v0 = 0.0;
  return c;
}

}  // namespace qtraj
