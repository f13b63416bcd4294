#include "c3bf/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace c3bf {

namespace {

constexpr double kPi = 3.14159265358979323846;

DHLink rod_link_x(double a, double alpha, double mass) {
  DHLink link;
  link.a = a;
  link.alpha = alpha;
  link.mass = mass;
  link.com = Vec3(-0.5 * a, 0, 0);
  const double transverse = mass * a * a / 12.0;
  link.inertia = Vec3(1e-3 * mass, transverse + 1e-3 * mass, transverse + 1e-3 * mass)
                     .asDiagonal();
  return link;
}

DHLink compact_link(double d, double alpha, double mass) {
  DHLink link;
  link.d = d;
  link.alpha = alpha;
  link.mass = mass;
  link.inertia = (1e-3 * mass) * Mat3::Identity();
  return link;
}

}  // namespace

ArmModel default_arm() {
  std::vector<DHLink> links;

  // Shoulder column: rod along the parent z axis.
  DHLink base = compact_link(0.30, kPi / 2, 3.0);
  base.com = Vec3(0, -0.15, 0);
  const double col = 3.0 * 0.3 * 0.3 / 12.0;
  base.inertia = Vec3(col + 3e-3, 3e-3, col + 3e-3).asDiagonal();
  links.push_back(base);

  links.push_back(rod_link_x(0.30, 0.0, 3.0));       // upper arm
  links.push_back(rod_link_x(0.25, kPi / 2, 2.0));   // forearm
  links.push_back(compact_link(0.10, -kPi / 2, 1.0));  // wrist 1
  links.push_back(compact_link(0.10, kPi / 2, 1.0));   // wrist 2
  links.push_back(compact_link(0.08, 0.0, 0.5));       // flange

  return ArmModel(std::move(links));
}

VecX default_home_q() {
  VecX q(6);
  q << 0.0, 0.7, -0.5, 0.0, 0.6, 0.0;
  return q;
}

std::vector<std::string> builtin_scenario_names() {
  return {"static", "headon", "crossing", "multi"};
}

namespace {

SimConfig base_config(const std::string& name) {
  SimConfig cfg(default_arm());
  cfg.name = name;
  cfg.dt = 1.0 / 240.0;
  cfg.duration = 10.0;
  cfg.q0 = default_home_q();
  cfg.qd0 = VecX::Zero(6);
  cfg.safety.mode = FilterMode::c3bf;
  cfg.safety.margin = 0.01;  // absorbs discretization error in the barrier rate
  cfg.safety.guard = 0.03;   // distance backup row close to the sphere
  return cfg;
}

// Straight-line desired path from the home end-effector position.
void line_path(SimConfig& cfg, const Vec3& start, const Vec3& offset, double t_end) {
  cfg.trajectory.shape = TrajectorySpec::Shape::waypoints;
  cfg.trajectory.waypoints = {{0.0, start}, {t_end, start + offset}};
}

}  // namespace

std::vector<SimConfig> builtin_scenarios() {
  const ArmModel arm = default_arm();
  const Vec3 p0 = arm.ee_position(default_home_q());

  std::vector<SimConfig> scenarios;

  {
    // Static sphere sitting on the planned path, in view from the start.
    SimConfig cfg = base_config("static");
    line_path(cfg, p0, Vec3(0, 0.45, 0), 5.5);
    // Range chosen so the sphere is in view from the start but drops out of
    // view once the end effector has passed it and settled on the target.
    cfg.perception.range = 0.24;
    Obstacle obs;
    obs.id = 0;
    obs.center = p0 + Vec3(0.05, 0.20, 0.08);
    obs.radius = 0.1;
    cfg.obstacles = {obs};
    scenarios.push_back(cfg);
  }
  {
    // Obstacle flying back down the corridor the end-effector climbs into.
    SimConfig cfg = base_config("headon");
    line_path(cfg, p0, Vec3(0, 0.55, 0.18), 8.0);
    cfg.perception.range = 1.0;
    Obstacle obs;
    obs.id = 0;
    obs.center = p0 + Vec3(0, 1.5, 0.24);
    obs.velocity = Vec3(0, -0.35, 0);
    obs.radius = 0.1;
    cfg.obstacles = {obs};
    scenarios.push_back(cfg);
  }
  {
    // Sphere crossing the path at roughly 45 degrees, timed to meet the
    // end-effector mid-path.
    SimConfig cfg = base_config("crossing");
    line_path(cfg, p0, Vec3(0, 0.45, 0), 8.0);
    // Visible from spawn: with the end effector still at rest the cone value
    // starts positive, and the conflict then builds up continuously under
    // the filter's watch as the end effector accelerates down the path.
    cfg.perception.range = 1.8;
    const Vec3 meet = p0 + Vec3(0, 0.28, 0.10);
    const Vec3 dir = Vec3(-1, -1, 0).normalized() * 0.3;  // 0.3 m/s
    Obstacle obs;
    obs.id = 0;
    obs.motion = Obstacle::Motion::waypoints;
    obs.waypoints = {{0.0, meet - 5.0 * dir}, {10.0, meet + 5.0 * dir}};
    obs.radius = 0.1;
    cfg.obstacles = {obs};
    scenarios.push_back(cfg);
  }
  {
    // Three moving obstacles with distinct headings: one cutting across the
    // path, one sweeping the corridor overhead, one passing on the far side.
    SimConfig cfg = base_config("multi");
    line_path(cfg, p0, Vec3(0, 0.45, 0), 8.0);
    cfg.perception.range = 2.0;  // all three visible from spawn

    // Main conflict: cuts diagonally through the path, timed to meet the
    // end effector mid-way.
    Obstacle crossing;
    crossing.id = 0;
    crossing.motion = Obstacle::Motion::waypoints;
    const Vec3 meet = p0 + Vec3(0, 0.28, 0.10);
    const Vec3 dir = Vec3(-1, -1, 0).normalized() * 0.3;
    crossing.waypoints = {{0.0, meet - 5.0 * dir}, {10.0, meet + 5.0 * dir}};
    crossing.radius = 0.08;

    // Sweeps down the corridor above the path: a near miss the cone
    // constraint has to keep an eye on while the crossing sphere is dodged.
    Obstacle overhead;
    overhead.id = 1;
    overhead.center = p0 + Vec3(0, 1.3, 0.30);
    overhead.velocity = Vec3(0, -0.22, 0);
    overhead.radius = 0.08;

    // Passes on the far side of the path.
    Obstacle passer;
    passer.id = 2;
    passer.center = p0 + Vec3(-0.28, 1.1, -0.05);
    passer.velocity = Vec3(0, -0.28, 0);
    passer.radius = 0.08;

    cfg.obstacles = {crossing, overhead, passer};
    scenarios.push_back(cfg);
  }
  return scenarios;
}

SimConfig builtin_scenario(const std::string& name) {
  for (SimConfig& cfg : builtin_scenarios()) {
    if (cfg.name == name) return cfg;
  }
  std::string valid;
  for (const std::string& n : builtin_scenario_names()) {
    valid += valid.empty() ? n : ", " + n;
  }
  throw std::invalid_argument("unknown scenario '" + name + "' (valid: " + valid + ")");
}

}  // namespace c3bf
