#include <doctest.h>

#include <random>

#include "c3bf/impedance.hpp"
#include "c3bf/scenarios.hpp"

using namespace c3bf;

TEST_CASE("impedance gains are validated at construction") {
  CHECK_NOTHROW(ImpedanceParams());
  Mat3 indefinite = Vec3(1, -1, 1).asDiagonal();
  CHECK_THROWS_AS(ImpedanceParams(indefinite, Mat3::Zero(), Mat3::Identity()),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      ImpedanceParams(Mat3::Identity(), indefinite, Mat3::Identity()),
      std::invalid_argument);
  // zero damping/stiffness is allowed (semidefinite)
  CHECK_NOTHROW(ImpedanceParams(Mat3::Identity(), Mat3::Zero(), Mat3::Zero()));
}

TEST_CASE("nominal task acceleration") {
  TaskState state;
  DesiredMotion desired;

  SUBCASE("zero error, zero feedforward") {
    state.p = desired.x = Vec3(0.3, 0.2, 0.1);
    state.v = desired.xdot = Vec3(0.1, 0, 0);
    const Vec3 u = nominal_task_accel(state, desired, Vec3::Zero(), ImpedanceParams());
    CHECK(u.norm() == 0.0);
  }
  SUBCASE("pure stiffness") {
    ImpedanceParams params(Mat3::Identity(), Mat3::Zero(), Mat3::Identity());
    state.p = Vec3(1, 0, 0);
    const Vec3 u = nominal_task_accel(state, desired, Vec3::Zero(), params);
    CHECK(u.isApprox(Vec3(-1, 0, 0), 1e-14));
  }
  SUBCASE("external force through the inertia inverse") {
    ImpedanceParams params(2.0 * Mat3::Identity(), Mat3::Zero(), Mat3::Zero());
    const Vec3 u = nominal_task_accel(state, desired, Vec3(4, 0, 0), params);
    CHECK(u.isApprox(Vec3(2, 0, 0), 1e-14));
  }
}

TEST_CASE("nominal task acceleration is affine in state and force") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto rand3 = [&] { return Vec3(dist(rng), dist(rng), dist(rng)); };
  const ImpedanceParams params;
  DesiredMotion desired;
  desired.x = rand3();
  desired.xdot = rand3();
  desired.xddot = rand3();

  for (int trial = 0; trial < 50; ++trial) {
    TaskState sa{rand3(), rand3()}, sb{rand3(), rand3()};
    const Vec3 fa = rand3(), fb = rand3();
    const double alpha = dist(rng);

    // superposition of deviations around (desired, f = 0)
    const Vec3 u0 = nominal_task_accel({desired.x, desired.xdot}, desired,
                                       Vec3::Zero(), params);
    auto dev = [&](const TaskState& s, const Vec3& f) {
      return nominal_task_accel(s, desired, f, params) - u0;
    };
    TaskState mix{desired.x + (sa.p - desired.x) + alpha * (sb.p - desired.x),
                  desired.xdot + (sa.v - desired.xdot) + alpha * (sb.v - desired.xdot)};
    const Vec3 lhs = dev(mix, fa + alpha * fb);
    const Vec3 rhs = dev(sa, fa) + alpha * dev(sb, fb);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("task-to-joint torque mapping") {
  const ArmModel arm = default_arm();
  const int n = arm.dof();

  SUBCASE("pure drift compensation") {
    JointState st;
    st.q = default_home_q();
    st.qdot = VecX::Ones(n) * 0.3;
    const Vec3 drift = arm.jacobian_dot_qdot(st);
    const TorqueCommand cmd = task_to_joint_torques(arm, st, drift);
    CHECK((cmd.tau - arm.bias_forces(st)).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("static arm commands gravity compensation") {
    JointState st{default_home_q(), VecX::Zero(n)};
    const TorqueCommand cmd = task_to_joint_torques(arm, st, Vec3::Zero());
    CHECK((cmd.tau - arm.gravity_forces(st.q)).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("commanded task acceleration is achieved") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    for (int trial = 0; trial < 10; ++trial) {
      JointState st;
      st.q = default_home_q() +
             VecX::NullaryExpr(n, [&](int) { return dist(rng); });
      st.qdot = VecX::NullaryExpr(n, [&](int) { return dist(rng); });
      const Vec3 u(dist(rng), dist(rng), dist(rng));
      const TorqueCommand cmd = task_to_joint_torques(arm, st, u, 1e-3);
      const VecX qdd = arm.forward_dynamics(st, cmd.tau);
      const Vec3 achieved = arm.jacobian(st.q) * qdd + arm.jacobian_dot_qdot(st);
      CHECK((achieved - u).norm() < 1e-3);
    }
  }
  SUBCASE("near-singular flag") {
    // stretched planar two-link arm: the Jacobian loses rank radially
    DHLink rod;
    rod.a = 0.5;
    rod.mass = 1.0;
    rod.com = Vec3(-0.25, 0, 0);
    const ArmModel planar({rod, rod});
    JointState st{VecX::Zero(2), VecX::Zero(2)};
    const TorqueCommand cmd = task_to_joint_torques(planar, st, Vec3::Zero(), 1e-2);
    CHECK(cmd.near_singular);
    const TorqueCommand good =
        task_to_joint_torques(arm, {default_home_q(), VecX::Zero(n)}, Vec3::Zero(), 1e-3);
    CHECK_FALSE(good.near_singular);
  }
}
