#include "c3bf/world.hpp"

#include <stdexcept>

namespace c3bf {

namespace {

// Position and velocity on the piecewise-linear waypoint path at time t.
void sample_waypoints(const std::vector<Waypoint>& wps, double t, Vec3& p, Vec3& v) {
  if (t < wps.front().t) {
    p = wps.front().p;
    v = Vec3::Zero();
    return;
  }
  if (t >= wps.back().t) {
    p = wps.back().p;
    v = Vec3::Zero();
    return;
  }
  for (size_t k = 0; k + 1 < wps.size(); ++k) {
    if (t < wps[k + 1].t) {
      const double span = wps[k + 1].t - wps[k].t;
      const double s = (t - wps[k].t) / span;
      v = (wps[k + 1].p - wps[k].p) / span;
      p = wps[k].p + s * (wps[k + 1].p - wps[k].p);
      return;
    }
  }
  p = wps.back().p;
  v = Vec3::Zero();
}

}  // namespace

void Obstacle::validate() const {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("obstacle radius must be > 0");
  }
  if (motion == Motion::waypoints) {
    if (waypoints.size() < 2) {
      throw std::invalid_argument("waypoint obstacle needs at least two waypoints");
    }
    for (size_t k = 0; k + 1 < waypoints.size(); ++k) {
      if (!(waypoints[k + 1].t > waypoints[k].t)) {
        throw std::invalid_argument("waypoint times must be strictly increasing");
      }
    }
  }
}

void sync_waypoint_state(Obstacle& obs) {
  if (obs.motion == Obstacle::Motion::waypoints) {
    sample_waypoints(obs.waypoints, obs.elapsed, obs.center, obs.velocity);
  }
}

void step_obstacles(std::vector<Obstacle>& obstacles, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("step_obstacles: dt must be > 0");
  }
  for (Obstacle& obs : obstacles) {
    obs.elapsed += dt;
    switch (obs.motion) {
      case Obstacle::Motion::constant_velocity:
        obs.center += obs.velocity * dt;
        break;
      case Obstacle::Motion::waypoints:
        sample_waypoints(obs.waypoints, obs.elapsed, obs.center, obs.velocity);
        break;
    }
  }
}

std::vector<Obstacle> perceive(const std::vector<Obstacle>& obstacles,
                               const Vec3& p_ee, const PerceptionConfig& cfg) {
  std::vector<Obstacle> visible;
  for (const Obstacle& obs : obstacles) {
    if ((obs.center - p_ee).norm() <= cfg.range) {
      visible.push_back(obs);
    }
  }
  return visible;
}

}  // namespace c3bf
