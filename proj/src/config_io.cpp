#include "qtraj/config_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "qtraj/error.hpp"
#include "qtraj/presets.hpp"

namespace qtraj {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not a valid number: '" + s + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<double>(item));
  }
  return out;
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::string list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += number(values[i]);
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
};

template <typename T>
Field numeric(const char* section, const char* key, T ScenarioConfig::*member) {
  return {section, key,
          [member](const ScenarioConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return number(c.*member);
            } else {
              return fmt::format("{}", c.*member);
            }
          },
          [member](ScenarioConfig& c, const std::string& v) { c.*member = parse_number<T>(v); }};
}

template <typename T, typename S>
Field nested(const char* section, const char* key, S ScenarioConfig::*outer, T S::*member) {
  return {section, key, [=](const ScenarioConfig& c) { return number(c.*outer.*member); },
          [=](ScenarioConfig& c, const std::string& v) { c.*outer.*member = parse_number<T>(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"scenario", "name", [](const ScenarioConfig& c) { return c.name; },
       [](ScenarioConfig& c, const std::string& v) { c.name = trim(v); }},
      {"scenario", "mode", [](const ScenarioConfig& c) { return std::string(to_string(c.mode)); },
       [](ScenarioConfig& c, const std::string& v) { c.mode = parse_mode(trim(v)); }},
      {"scenario", "estimator",
       [](const ScenarioConfig& c) { return std::string(to_string(c.estimator)); },
       [](ScenarioConfig& c, const std::string& v) { c.estimator = parse_estimator(trim(v)); }},
      {"scenario", "characteristics",
       [](const ScenarioConfig& c) { return std::string(to_string(c.characteristics)); },
       [](ScenarioConfig& c, const std::string& v) {
         c.characteristics = parse_characteristics(trim(v));
       }},
      numeric("scenario", "seed", &ScenarioConfig::seed),
      nested("packet", "x0", &ScenarioConfig::packet, &PacketSpec::x0),
      nested("packet", "k0", &ScenarioConfig::packet, &PacketSpec::k0),
      nested("packet", "sigma_x", &ScenarioConfig::packet, &PacketSpec::sigma_x),
      nested("packet", "delta_k", &ScenarioConfig::packet, &PacketSpec::delta_k),
      nested("barrier", "v0", &ScenarioConfig::barrier, &BarrierSpec::v0),
      nested("barrier", "d", &ScenarioConfig::barrier, &BarrierSpec::d),
      nested("barrier", "sigma", &ScenarioConfig::barrier, &BarrierSpec::sigma),
      numeric("numerics", "t_final", &ScenarioConfig::t_final),
      numeric("numerics", "dt", &ScenarioConfig::dt),
      numeric("numerics", "n_snapshots", &ScenarioConfig::n_snapshots),
      numeric("numerics", "ensemble_size", &ScenarioConfig::ensemble_size),
      numeric("numerics", "jump_attempt_bias", &ScenarioConfig::jump_attempt_bias),
      numeric("numerics", "epsilon_dprime", &ScenarioConfig::epsilon_dprime),
      numeric("numerics", "kernel_half_width", &ScenarioConfig::kernel_half_width),
      numeric("numerics", "max_jumps", &ScenarioConfig::max_jumps),
      numeric("numerics", "replicas", &ScenarioConfig::replicas),
      numeric("numerics", "cell_dq", &ScenarioConfig::cell_dq),
      numeric("numerics", "cell_dp", &ScenarioConfig::cell_dp),
      numeric("numerics", "annihilation_interval", &ScenarioConfig::annihilation_interval),
      numeric("numerics", "population_limit", &ScenarioConfig::population_limit),
      numeric("numerics", "threads", &ScenarioConfig::threads),
      {"detectors", "positions", [](const ScenarioConfig& c) { return list(c.detectors); },
       [](ScenarioConfig& c, const std::string& v) { c.detectors = parse_list(v); }},
      numeric("observables", "bandwidth", &ScenarioConfig::bandwidth),
      numeric("observables", "transmission_boundary", &ScenarioConfig::transmission_boundary),
      {"observables", "momentum_times",
       [](const ScenarioConfig& c) { return list(c.momentum_times); },
       [](ScenarioConfig& c, const std::string& v) { c.momentum_times = parse_list(v); }},
      numeric("observables", "momentum_bins", &ScenarioConfig::momentum_bins),
      numeric("observables", "momentum_min", &ScenarioConfig::momentum_min),
      numeric("observables", "momentum_max", &ScenarioConfig::momentum_max),
      numeric("oracle", "points", &ScenarioConfig::oracle_points),
      numeric("oracle", "half_domain", &ScenarioConfig::oracle_half_domain),
      numeric("oracle", "dt", &ScenarioConfig::oracle_dt),
  };
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

// Line (1-based) where `key` is assigned inside [section]; 0 if not found.
std::size_t locate(std::string_view text, const std::string& section, const std::string& key) {
  std::istringstream stream{std::string(text)};
  std::string line;
  std::string current;
  for (std::size_t n = 1; std::getline(stream, line); ++n) {
    const std::string t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

// Rejects section headers no field belongs to, including empty ones.
void check_sections(std::string_view text) {
  std::istringstream stream{std::string(text)};
  std::string line;
  for (std::size_t n = 1; std::getline(stream, line); ++n) {
    const std::string t = trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const std::string name = trim(std::string_view(t).substr(1, t.size() - 2));
    const auto& all = fields();
    const bool known = name == "scenario" || std::any_of(all.begin(), all.end(), [&](const Field& f) {
                         return name == f.section;
                       });
    if (!known) throw ParseError(n, "unknown section '" + name + "'");
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, const std::optional<ScenarioConfig>& base) {
  pt::ptree tree;
  try {
    std::istringstream stream{std::string(text)};
    pt::read_ini(stream, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  check_sections(text);

  ScenarioConfig config = base.value_or(ScenarioConfig{});
  if (const auto name = tree.get_optional<std::string>("scenario.preset")) {
    try {
      config = preset(trim(*name));
    } catch (const ValidationError& e) {
      throw ParseError(locate(text, "scenario", "preset"), e.what());
    }
  }

  bool sigma_x_set = false;
  bool delta_k_set = false;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) {
      throw ParseError(locate(text, "", section), "key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : entries) {
      if (section == "scenario" && key == "preset") continue;
      const std::size_t line = locate(text, section, key);
      const Field* field = find_field(section, key);
      if (field == nullptr) throw ParseError(line, "unknown key '" + section + "." + key + "'");
      try {
        field->set(config, value.data());
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, section + "." + key + ": " + e.what());
      } catch (const ValidationError& e) {
        throw ParseError(line, section + "." + key + ": " + e.what());
      }
      sigma_x_set = sigma_x_set || (section == "packet" && key == "sigma_x");
      delta_k_set = delta_k_set || (section == "packet" && key == "delta_k");
    }
  }
  // Either width parameter alone determines the other.
  if (sigma_x_set && !delta_k_set) config.packet.delta_k = 1.0 / (2.0 * config.packet.sigma_x);
  if (delta_k_set && !sigma_x_set) config.packet.sigma_x = 1.0 / (2.0 * config.packet.delta_k);

  config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path,
                           const std::optional<ScenarioConfig>& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), base);
}

std::string emit_config(const ScenarioConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

}  // namespace qtraj
