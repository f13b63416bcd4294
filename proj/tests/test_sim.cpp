#include <doctest.h>

#include <sstream>

#include "c3bf/scenarios.hpp"
#include "c3bf/sim.hpp"

using namespace c3bf;

namespace {

SimConfig quiet_config() {
  SimConfig cfg(default_arm());
  cfg.q0 = default_home_q();
  cfg.qd0 = VecX::Zero(6);
  cfg.trajectory.shape = TrajectorySpec::Shape::setpoint;
  cfg.trajectory.target = cfg.arm.ee_position(cfg.q0);
  return cfg;
}

}  // namespace

TEST_CASE("trajectory evaluation") {
  SUBCASE("setpoint holds position with zero derivatives") {
    TrajectorySpec traj;
    traj.target = Vec3(1, 2, 3);
    const DesiredMotion d = eval_trajectory(traj, 5.0);
    CHECK(d.x == Vec3(1, 2, 3));
    CHECK(d.xdot == Vec3::Zero());
    CHECK(d.xddot == Vec3::Zero());
  }
  SUBCASE("waypoint segment slope") {
    TrajectorySpec traj;
    traj.shape = TrajectorySpec::Shape::waypoints;
    traj.waypoints = {{0.0, Vec3::Zero()}, {2.0, Vec3(2, 0, 0)}};
    const DesiredMotion d = eval_trajectory(traj, 1.0);
    CHECK(d.x.isApprox(Vec3(1, 0, 0), 1e-15));
    CHECK(d.xdot.isApprox(Vec3(1, 0, 0), 1e-15));
    const DesiredMotion held = eval_trajectory(traj, 3.0);
    CHECK(held.x == Vec3(2, 0, 0));
    CHECK(held.xdot == Vec3::Zero());
  }
  SUBCASE("circle position, velocity, acceleration are consistent") {
    TrajectorySpec traj;
    traj.shape = TrajectorySpec::Shape::circle;
    traj.center = Vec3(0.4, 0, 0.3);
    traj.radius = 0.1;
    traj.rate = 0.7;
    const double t = 1.3, h = 1e-6;
    const DesiredMotion d = eval_trajectory(traj, t);
    const DesiredMotion dp = eval_trajectory(traj, t + h);
    const DesiredMotion dm = eval_trajectory(traj, t - h);
    CHECK(((dp.x - dm.x) / (2 * h) - d.xdot).norm() < 1e-7);
    CHECK(((dp.xdot - dm.xdot) / (2 * h) - d.xddot).norm() < 1e-7);
    CHECK((d.x - traj.center).norm() == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("equilibrium step leaves a zero-gravity arm at rest") {
  SimConfig cfg = quiet_config();
  cfg.arm.set_gravity(Vec3::Zero());
  SimState st = initial_state(cfg);
  for (int i = 0; i < 10; ++i) step(st, cfg);
  CHECK((st.joints.q - cfg.q0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(st.joints.qdot.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("semi-implicit step matches the hand-computed update") {
  SimConfig cfg = quiet_config();
  // one obstacle-free step: qdot' = qdot + M^{-1}(tau - bias) dt, q' = q + qdot' dt
  SimState st = initial_state(cfg);
  const JointState before = st.joints;
  const TraceRecord rec = step(st, cfg);
  const VecX qdd = cfg.arm.forward_dynamics(before, rec.tau);
  const VecX qdot_expect = before.qdot + qdd * cfg.dt;
  const VecX q_expect = before.q + qdot_expect * cfg.dt;
  CHECK((st.joints.qdot - qdot_expect).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((st.joints.q - q_expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("inactive filter modes produce identical traces") {
  SimConfig cfg = quiet_config();
  cfg.duration = 0.5;
  Obstacle far;
  far.center = Vec3(5, 5, 5);  // never enters the perception range
  far.radius = 0.1;
  cfg.obstacles = {far};

  SimConfig off = cfg;
  off.safety.mode = FilterMode::none;
  const RunResult a = run_scenario(cfg);
  const RunResult b = run_scenario(off);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].q == b.trace[i].q);
    CHECK(a.trace[i].u_safe == b.trace[i].u_safe);
    CHECK(a.trace[i].tau == b.trace[i].tau);
  }
}

TEST_CASE("metrics") {
  SimConfig cfg = quiet_config();

  SUBCASE("empty trace rejected") {
    CHECK_THROWS_AS(compute_metrics(cfg, {}), std::invalid_argument);
  }
  SUBCASE("no filter activity means zero effort deviation") {
    cfg.duration = 0.5;
    const RunResult r = run_scenario(cfg);
    CHECK(r.metrics.effort_deviation == 0.0);
    CHECK(r.metrics.active_fraction == 0.0);
    CHECK_FALSE(r.metrics.collision);
  }
  SUBCASE("single-record separation") {
    Obstacle obs;
    obs.radius = 0.1;
    cfg.obstacles = {obs};
    const double r = combined_radius(obs, cfg.safety);
    TraceRecord rec;
    rec.t = 0.0;
    rec.u_nom = rec.u_safe = Vec3::Zero();
    ObstacleRecord orec;
    orec.dist = r + 0.1;
    orec.h = 0.5;
    rec.obstacles = {orec};
    const RunMetrics m = compute_metrics(cfg, {rec});
    CHECK(m.min_separation == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(m.collision);
  }
  SUBCASE("trapezoidal effort deviation") {
    TraceRecord r0, r1, r2;
    r0.t = 0.0;
    r1.t = 1.0;
    r2.t = 3.0;
    r0.u_nom = r1.u_nom = r2.u_nom = Vec3::Zero();
    r0.u_safe = Vec3(1, 0, 0);   // deviation 1
    r1.u_safe = Vec3(0, 3, 0);   // deviation 3
    r2.u_safe = Vec3::Zero();    // deviation 0
    // trapezoid: 0.5(1+3)*1 + 0.5(3+0)*2 = 2 + 3 = 5
    const RunMetrics m = compute_metrics(cfg, {r0, r1, r2});
    CHECK(m.effort_deviation == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(m.active_fraction == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("builtin scenarios validate and cover the four families") {
  const std::vector<SimConfig> all = builtin_scenarios();
  REQUIRE(all.size() == 4);
  const std::vector<std::string> names = builtin_scenario_names();
  for (size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].name == names[i]);
    CHECK_NOTHROW(all[i].validate());
    CHECK(all[i].safety.mode == FilterMode::c3bf);
  }
  CHECK_THROWS_AS(builtin_scenario("nosuch"), std::invalid_argument);
}

TEST_CASE("halving the step barely moves the final end-effector position") {
  SimConfig coarse = builtin_scenario("static");
  SimConfig fine = coarse;
  fine.dt = 0.5 * coarse.dt;
  const RunResult a = run_scenario(coarse);
  const RunResult b = run_scenario(fine);
  const Vec3 pa = coarse.arm.ee_position(a.trace.back().q);
  const Vec3 pb = fine.arm.ee_position(b.trace.back().q);
  CHECK((pa - pb).norm() <= 1e-3);
}

TEST_CASE("runs are deterministic") {
  SimConfig cfg = builtin_scenario("static");
  cfg.duration = 1.0;
  const RunResult a = run_scenario(cfg);
  const RunResult b = run_scenario(cfg);
  std::ostringstream csv_a, csv_b;
  write_trace_csv(csv_a, cfg, a.trace);
  write_trace_csv(csv_b, cfg, b.trace);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("trace CSV layout") {
  SimConfig cfg = builtin_scenario("static");
  cfg.duration = 2.0 * cfg.dt;
  const RunResult r = run_scenario(cfg);
  std::ostringstream os;
  write_trace_csv(os, cfg, r.trace);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  CHECK(header.substr(0, 2) == "t,");
  CHECK(header.find("qd0") != std::string::npos);
  CHECK(header.find("usafe_z") != std::string::npos);
  CHECK(header.find("obs0_active") != std::string::npos);
  size_t cols = 1;
  for (char c : header) {
    if (c == ',') ++cols;
  }
  // t + 2n joints + 5*3 task vectors + n torques + 6 per obstacle
  CHECK(cols == 1 + 12 + 15 + 6 + 6);
  std::getline(is, row);
  size_t row_cols = 1;
  for (char c : row) {
    if (c == ',') ++row_cols;
  }
  CHECK(row_cols == cols);
}
