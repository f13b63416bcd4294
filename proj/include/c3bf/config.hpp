#pragma once

#include <iosfwd>
#include <string>

#include "c3bf/sim.hpp"

namespace c3bf {

/// Parse a scenario config (INI-style sections [sim], [arm], [impedance],
/// [trajectory], [safety], [world]; `#` comments). Throws
/// std::runtime_error with a line reference on malformed input.
SimConfig load_config(std::istream& is);
SimConfig load_config_file(const std::string& path);

/// Serialize a config so that re-loading reproduces a byte-identical trace
/// (doubles written with 17 significant digits).
void save_config(std::ostream& os, const SimConfig& cfg);
void save_config_file(const std::string& path, const SimConfig& cfg);

}  // namespace c3bf
