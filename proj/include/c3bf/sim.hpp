#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "c3bf/arm_model.hpp"
#include "c3bf/impedance.hpp"
#include "c3bf/safety_filter.hpp"
#include "c3bf/world.hpp"

namespace c3bf {

enum class Integrator { semi_implicit_euler, rk4 };

/// Desired end-effector motion: constant setpoint, piecewise-linear
/// waypoints (held at the ends), or a circular path about `center` in the
/// plane normal to `axis`.
struct TrajectorySpec {
  enum class Shape { setpoint, waypoints, circle };
  Shape shape = Shape::setpoint;
  Vec3 target = Vec3::Zero();      // setpoint
  std::vector<Waypoint> waypoints; // waypoints
  Vec3 center = Vec3::Zero();      // circle
  double radius = 0.0;
  double rate = 0.0;               // angular rate [rad/s]
  double phase = 0.0;              // start angle [rad]
  Vec3 axis = Vec3(0, 0, 1);       // plane normal
};

DesiredMotion eval_trajectory(const TrajectorySpec& traj, double t);

struct SimConfig {
  explicit SimConfig(ArmModel arm_model) : arm(std::move(arm_model)) {}

  std::string name = "custom";
  double dt = 1.0 / 240.0;
  double duration = 10.0;
  Integrator integrator = Integrator::semi_implicit_euler;
  ArmModel arm;
  ImpedanceParams impedance;
  double dls_lambda = 1e-2;
  Vec3 f_ext = Vec3::Zero();
  TrajectorySpec trajectory;
  FilterConfig safety;
  std::vector<Obstacle> obstacles;
  PerceptionConfig perception;
  VecX q0, qd0;

  void validate() const;
};

struct ObstacleRecord {
  Vec3 p_o = Vec3::Zero();
  double dist = 0.0;   // ||p_rel||
  double h = 0.0;      // barrier value; -(penetration) once inside the sphere
  bool active = false; // constraint tight at the QP solution
};

struct TraceRecord {
  double t = 0.0;
  VecX q, qdot;
  Vec3 p_ee, v_ee, x_des, u_nom, u_safe;
  VecX tau;
  std::vector<ObstacleRecord> obstacles;
  bool infeasible = false;
};

struct RunMetrics {
  double min_separation = 0.0;     // min over time/obstacles of ||p_rel|| - r
  bool collision = false;          // min_separation <= 0
  double min_h = 0.0;
  double tracking_rmse_tail = 0.0; // RMSE of ||p_ee - x_des|| on the obstacle-free tail
  double effort_deviation = 0.0;   // trapezoidal integral of ||u_safe - u_nom||
  double active_fraction = 0.0;    // fraction of steps with u_safe != u_nom
};

struct SimState {
  double t = 0.0;
  JointState joints;
  std::vector<Obstacle> obstacles;
};

SimState initial_state(const SimConfig& cfg);

/// One control step: FK -> perceive -> impedance -> safety filter -> torque
/// map -> forward dynamics -> integrate -> advance obstacles. Throws
/// std::runtime_error naming the stage if a non-finite value appears.
TraceRecord step(SimState& state, const SimConfig& cfg);

struct RunResult {
  std::vector<TraceRecord> trace;
  RunMetrics metrics;
  bool aborted = false;
  std::string abort_reason;
};

RunResult run_scenario(const SimConfig& cfg);

RunMetrics compute_metrics(const SimConfig& cfg, const std::vector<TraceRecord>& trace);

/// CSV export, 17 significant digits, fixed column order.
void write_trace_csv(std::ostream& os, const SimConfig& cfg,
                     const std::vector<TraceRecord>& trace);

/// JSON export mirroring RunMetrics field names.
void write_metrics_json(std::ostream& os, const RunMetrics& metrics);

}  // namespace c3bf
