#include "c3bf/sim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace c3bf {

namespace {

void sample_path(const std::vector<Waypoint>& wps, double t, Vec3& p, Vec3& v) {
  if (t < wps.front().t) {
    p = wps.front().p;
    v = Vec3::Zero();
    return;
  }
  for (size_t k = 0; k + 1 < wps.size(); ++k) {
    if (t < wps[k + 1].t) {
      const double span = wps[k + 1].t - wps[k].t;
      v = (wps[k + 1].p - wps[k].p) / span;
      p = wps[k].p + (t - wps[k].t) * v;
      return;
    }
  }
  p = wps.back().p;
  v = Vec3::Zero();
}

void circle_basis(const Vec3& axis, Vec3& e1, Vec3& e2) {
  const Vec3 n = axis.normalized();
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (seed - seed.dot(n) * n).normalized();
  e2 = n.cross(e1);
}

void check_finite(const auto& value, const char* stage) {
  if (!value.allFinite()) {
    throw std::runtime_error(std::string("non-finite value at stage: ") + stage);
  }
}

}  // namespace

DesiredMotion eval_trajectory(const TrajectorySpec& traj, double t) {
  DesiredMotion des;
  switch (traj.shape) {
    case TrajectorySpec::Shape::setpoint:
      des.x = traj.target;
      break;
    case TrajectorySpec::Shape::waypoints: {
      if (traj.waypoints.empty()) {
        throw std::invalid_argument("waypoint trajectory has no waypoints");
      }
      if (traj.waypoints.size() == 1) {
        des.x = traj.waypoints.front().p;
        break;
      }
      sample_path(traj.waypoints, t, des.x, des.xdot);
      break;
    }
    case TrajectorySpec::Shape::circle: {
      Vec3 e1, e2;
      circle_basis(traj.axis, e1, e2);
      const double th = traj.phase + traj.rate * t;
      const double c = std::cos(th), s = std::sin(th);
      des.x = traj.center + traj.radius * (c * e1 + s * e2);
      des.xdot = traj.radius * traj.rate * (-s * e1 + c * e2);
      des.xddot = -traj.radius * traj.rate * traj.rate * (c * e1 + s * e2);
      break;
    }
  }
  return des;
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
  if (!(duration >= dt)) throw std::invalid_argument("SimConfig: duration must be >= dt");
  if (q0.size() != arm.dof() || qd0.size() != arm.dof()) {
    throw std::invalid_argument("SimConfig: initial state dimension mismatch");
  }
  for (const Obstacle& obs : obstacles) {
    obs.validate();
    if (!(perception.range > combined_radius(obs, safety))) {
      throw std::invalid_argument(
          "SimConfig: perception range must exceed every combined safety radius");
    }
  }
}

SimState initial_state(const SimConfig& cfg) {
  SimState st;
  st.t = 0.0;
  st.joints.q = cfg.q0;
  st.joints.qdot = cfg.qd0;
  st.obstacles = cfg.obstacles;
  for (Obstacle& obs : st.obstacles) {
    sync_waypoint_state(obs);
  }
  return st;
}

TraceRecord step(SimState& state, const SimConfig& cfg) {
  const ArmModel& arm = cfg.arm;

  // (1) task state from kinematics
  const MatX jac = arm.jacobian(state.joints.q);
  TaskState task;
  task.p = arm.ee_position(state.joints.q);
  task.v = jac * state.joints.qdot;
  check_finite(task.p, "forward_kinematics");

  // (2) perception
  const std::vector<Obstacle> visible = perceive(state.obstacles, task.p, cfg.perception);

  // (3) nominal impedance acceleration
  const DesiredMotion des = eval_trajectory(cfg.trajectory, state.t);
  const Vec3 u_nom = nominal_task_accel(task, des, cfg.f_ext, cfg.impedance);
  check_finite(u_nom, "nominal_task_accel");

  // (4) safety filter
  const FilterResult filtered = filter(u_nom, task, visible, cfg.safety);
  check_finite(filtered.u, "safety_filter");

  // (5) torque map
  const TorqueCommand cmd =
      task_to_joint_torques(arm, state.joints, filtered.u, cfg.dls_lambda);
  check_finite(cmd.tau, "task_to_joint_torques");

  TraceRecord rec;
  rec.t = state.t;
  rec.q = state.joints.q;
  rec.qdot = state.joints.qdot;
  rec.p_ee = task.p;
  rec.v_ee = task.v;
  rec.x_des = des.x;
  rec.u_nom = u_nom;
  rec.u_safe = filtered.u;
  rec.tau = cmd.tau;
  rec.infeasible = filtered.diag.infeasible;
  rec.obstacles.reserve(state.obstacles.size());
  for (const Obstacle& obs : state.obstacles) {
    ObstacleRecord orec;
    orec.p_o = obs.center;
    RelativeState rel;
    rel.p_rel = task.p - obs.center;
    rel.v_rel = task.v - obs.velocity;
    rel.r = combined_radius(obs, cfg.safety);
    orec.dist = rel.p_rel.norm();
    if (orec.dist > rel.r) {
      orec.h = c3bf_value(rel);
    } else {
      orec.h = orec.dist - rel.r;  // negative penetration marker
    }
    for (const ConstraintDiag& diag : filtered.diag.constraints) {
      if (diag.source == obs.id) {
        orec.active = orec.active || diag.active;
      }
    }
    rec.obstacles.push_back(orec);
  }

  // (6)-(7) integrate the joints with the torque held over the step
  const double dt = cfg.dt;
  if (cfg.integrator == Integrator::semi_implicit_euler) {
    const VecX qddot = arm.forward_dynamics(state.joints, cmd.tau);
    state.joints.qdot += qddot * dt;
    state.joints.q += state.joints.qdot * dt;
  } else {
    auto accel = [&](const VecX& q, const VecX& qd) {
      return arm.forward_dynamics({q, qd}, cmd.tau);
    };
    const VecX& q = state.joints.q;
    const VecX& qd = state.joints.qdot;
    const VecX k1q = qd, k1v = accel(q, qd);
    const VecX k2q = qd + 0.5 * dt * k1v, k2v = accel(q + 0.5 * dt * k1q, qd + 0.5 * dt * k1v);
    const VecX k3q = qd + 0.5 * dt * k2v, k3v = accel(q + 0.5 * dt * k2q, qd + 0.5 * dt * k2v);
    const VecX k4q = qd + dt * k3v, k4v = accel(q + dt * k3q, qd + dt * k3v);
    state.joints.q = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    state.joints.qdot = qd + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  check_finite(state.joints.q, "integration");
  check_finite(state.joints.qdot, "integration");

  // (8) obstacles
  step_obstacles(state.obstacles, dt);
  state.t += dt;
  return rec;
}

RunResult run_scenario(const SimConfig& cfg) {
  cfg.validate();
  RunResult result;
  SimState state = initial_state(cfg);
  const long steps = std::lround(cfg.duration / cfg.dt);
  result.trace.reserve(steps);
  for (long i = 0; i < steps; ++i) {
    try {
      result.trace.push_back(step(state, cfg));
    } catch (const std::exception& err) {
      result.aborted = true;
      result.abort_reason = err.what();
      break;
    }
  }
  if (!result.trace.empty()) {
    result.metrics = compute_metrics(cfg, result.trace);
  }
  return result;
}

RunMetrics compute_metrics(const SimConfig& cfg, const std::vector<TraceRecord>& trace) {
  if (trace.empty()) {
    throw std::invalid_argument("compute_metrics: empty trace");
  }
  RunMetrics m;
  m.min_separation = std::numeric_limits<double>::infinity();
  m.min_h = std::numeric_limits<double>::infinity();
  if (trace.front().obstacles.empty()) {
    m.min_separation = 0.0;
    m.min_h = 0.0;
  }

  long active_steps = 0;
  for (const TraceRecord& rec : trace) {
    for (size_t k = 0; k < rec.obstacles.size(); ++k) {
      const double r = combined_radius(cfg.obstacles[k], cfg.safety);
      m.min_separation = std::min(m.min_separation, rec.obstacles[k].dist - r);
      // min_h measures how well the filter enforces its constraints, so it
      // ranges over the steps where the obstacle is actually visible.
      if (rec.obstacles[k].dist <= cfg.perception.range) {
        m.min_h = std::min(m.min_h, rec.obstacles[k].h);
      }
    }
    if ((rec.u_safe - rec.u_nom).norm() > 0.0) {
      ++active_steps;
    }
  }
  if (std::isinf(m.min_h)) {
    m.min_h = 0.0;  // no obstacle ever became visible
  }
  m.collision = !trace.front().obstacles.empty() && m.min_separation <= 0.0;
  m.active_fraction = static_cast<double>(active_steps) / trace.size();

  // trapezoidal integral of the filter deviation
  for (size_t i = 0; i + 1 < trace.size(); ++i) {
    const double d0 = (trace[i].u_safe - trace[i].u_nom).norm();
    const double d1 = (trace[i + 1].u_safe - trace[i + 1].u_nom).norm();
    m.effort_deviation += 0.5 * (d0 + d1) * (trace[i + 1].t - trace[i].t);
  }

  // Tracking RMSE over the trailing contiguous obstacle-free segment (no
  // obstacle inside perception range); whole trace if that segment is empty.
  size_t tail_start = trace.size();
  while (tail_start > 0) {
    const TraceRecord& rec = trace[tail_start - 1];
    bool clear = true;
    for (const ObstacleRecord& orec : rec.obstacles) {
      if (orec.dist <= cfg.perception.range) clear = false;
    }
    if (!clear) break;
    --tail_start;
  }
  size_t begin = tail_start, end = trace.size();
  if (begin == end) {
    begin = 0;
  }
  double sum_sq = 0.0;
  for (size_t i = begin; i < end; ++i) {
    sum_sq += (trace[i].p_ee - trace[i].x_des).squaredNorm();
  }
  m.tracking_rmse_tail = std::sqrt(sum_sq / static_cast<double>(end - begin));
  return m;
}

namespace {

void put(std::ostream& os, double value, bool lead_comma = true) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  if (lead_comma) os << ',';
  os << buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const SimConfig& cfg,
                     const std::vector<TraceRecord>& trace) {
  const int n = cfg.arm.dof();
  os << 't';
  for (int i = 0; i < n; ++i) os << ",q" << i;
  for (int i = 0; i < n; ++i) os << ",qd" << i;
  os << ",px,py,pz,vx,vy,vz,xdes_x,xdes_y,xdes_z"
     << ",unom_x,unom_y,unom_z,usafe_x,usafe_y,usafe_z";
  for (int i = 0; i < n; ++i) os << ",tau" << i;
  for (size_t k = 0; k < cfg.obstacles.size(); ++k) {
    os << ",obs" << k << "_px,obs" << k << "_py,obs" << k << "_pz"
       << ",obs" << k << "_dist,obs" << k << "_h,obs" << k << "_active";
  }
  os << '\n';

  for (const TraceRecord& rec : trace) {
    put(os, rec.t, false);
    for (int i = 0; i < n; ++i) put(os, rec.q[i]);
    for (int i = 0; i < n; ++i) put(os, rec.qdot[i]);
    for (int i = 0; i < 3; ++i) put(os, rec.p_ee[i]);
    for (int i = 0; i < 3; ++i) put(os, rec.v_ee[i]);
    for (int i = 0; i < 3; ++i) put(os, rec.x_des[i]);
    for (int i = 0; i < 3; ++i) put(os, rec.u_nom[i]);
    for (int i = 0; i < 3; ++i) put(os, rec.u_safe[i]);
    for (int i = 0; i < n; ++i) put(os, rec.tau[i]);
    for (const ObstacleRecord& orec : rec.obstacles) {
      for (int i = 0; i < 3; ++i) put(os, orec.p_o[i]);
      put(os, orec.dist);
      put(os, orec.h);
      os << ',' << (orec.active ? 1 : 0);
    }
    os << '\n';
  }
}

void write_metrics_json(std::ostream& os, const RunMetrics& metrics) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\n"
                "  \"min_separation\": %.17g,\n"
                "  \"collision\": %s,\n"
                "  \"min_h\": %.17g,\n"
                "  \"tracking_rmse_tail\": %.17g,\n"
                "  \"effort_deviation\": %.17g,\n"
                "  \"active_fraction\": %.17g\n"
                "}\n",
                metrics.min_separation, metrics.collision ? "true" : "false",
                metrics.min_h, metrics.tracking_rmse_tail, metrics.effort_deviation,
                metrics.active_fraction);
  os << buf;
}

}  // namespace c3bf
