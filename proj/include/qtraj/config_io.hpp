#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qtraj/config.hpp"

namespace qtraj {

// INI text with sections [scenario], [packet], [barrier], [numerics],
// [detectors], [observables] and [oracle]. Keys not set keep the value of the
// base: the preset named by `scenario.preset` if present, else `base`, else the
// built-in defaults. Unknown sections or keys are rejected.
//
// Throws ParseError (with line number) or ValidationError.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text,
                                          const std::optional<ScenarioConfig>& base = std::nullopt);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path,
                                         const std::optional<ScenarioConfig>& base = std::nullopt);

// Every key, full precision; parse_config(emit_config(c)) == c.
[[nodiscard]] std::string emit_config(const ScenarioConfig& config);

}  // namespace qtraj
