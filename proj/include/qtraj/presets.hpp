#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qtraj/config.hpp"

namespace qtraj {

// Relative detector positions in barrier widths, in output order.
inline constexpr double kDetectorOffsets[] = {-5.0, -0.67, 0.0, 0.67, 5.0, 15.0};

// "narrow", "wide", "narrow-free", "wide-free". Throws ValidationError.
[[nodiscard]] ScenarioConfig preset(std::string_view name);
[[nodiscard]] std::vector<std::string> preset_names();

// Detector at offset * sigma from the barrier centre.
[[nodiscard]] double detector_position(const ScenarioConfig& config, double offset);

// The same scenario with the barrier switched off.
[[nodiscard]] ScenarioConfig free_variant(const ScenarioConfig& config);

}  // namespace qtraj
