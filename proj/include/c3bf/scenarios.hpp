#pragma once

#include <string>
#include <vector>

#include "c3bf/sim.hpp"

namespace c3bf {

/// Builtin 6-DOF anthropomorphic arm: shoulder column, upper arm, forearm,
/// three-joint wrist. Link lengths 0.3/0.3/0.25/0.1/0.1/0.08 m, masses
/// 3/3/2/1/1/0.5 kg, rod-like inertias.
ArmModel default_arm();

/// Home configuration used by the builtin scenarios (non-singular, elbow up).
VecX default_home_q();

std::vector<std::string> builtin_scenario_names();

/// Fully specified builtin scenario configs: `static`, `headon`, `crossing`,
/// `multi`, all in collision-cone filter mode at 240 Hz.
std::vector<SimConfig> builtin_scenarios();

/// Lookup by name; throws std::invalid_argument listing valid names.
SimConfig builtin_scenario(const std::string& name);

}  // namespace c3bf
