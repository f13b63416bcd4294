#pragma once

#include <Eigen/Dense>
#include <vector>

#include "c3bf/arm_model.hpp"

namespace c3bf {

struct Waypoint {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
};

/// Moving spherical obstacle. Either constant-velocity or piecewise-linear
/// waypoint motion; in waypoint mode the obstacle holds the first point
/// before the first time stamp and the last point (with zero velocity)
/// after the last one.
struct Obstacle {
  enum class Motion { constant_velocity, waypoints };

  int id = 0;
  Vec3 center = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double radius = 0.1;
  Motion motion = Motion::constant_velocity;
  std::vector<Waypoint> waypoints;
  double elapsed = 0.0;  // internal clock driving waypoint interpolation

  void validate() const;  // radius > 0, waypoint times strictly increasing
};

struct PerceptionConfig {
  double range = 1.0;  // perception radius around the end-effector [m]
};

/// Snap a waypoint obstacle's center/velocity to its path at the current
/// internal clock. No-op for constant-velocity obstacles.
void sync_waypoint_state(Obstacle& obs);

/// Advance obstacle states by dt. Constant-velocity obstacles translate,
/// waypoint obstacles interpolate; velocity is set to the active segment's
/// slope so the filter sees a consistent v_o.
void step_obstacles(std::vector<Obstacle>& obstacles, double dt);

/// Obstacles within the closed perception ball around p_ee, order preserved.
std::vector<Obstacle> perceive(const std::vector<Obstacle>& obstacles,
                               const Vec3& p_ee, const PerceptionConfig& cfg);

}  // namespace c3bf
