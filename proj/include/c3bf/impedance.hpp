#pragma once

#include <Eigen/Dense>

#include "c3bf/arm_model.hpp"

namespace c3bf {

/// Cartesian impedance gains. Lambda must be SPD (it is inverted); damping
/// and stiffness must be symmetric positive semidefinite. Validated at
/// construction so the control loop never sees a bad gain set.
class ImpedanceParams {
 public:
  ImpedanceParams();  // Lambda = I, D = 20 I, K = 100 I
  ImpedanceParams(const Mat3& lambda, const Mat3& damping, const Mat3& stiffness);

  const Mat3& lambda() const { return lambda_; }
  const Mat3& damping() const { return damping_; }
  const Mat3& stiffness() const { return stiffness_; }
  const Eigen::LLT<Mat3>& lambda_llt() const { return lambda_llt_; }

 private:
  Mat3 lambda_, damping_, stiffness_;
  Eigen::LLT<Mat3> lambda_llt_;
};

struct DesiredMotion {
  Vec3 x = Vec3::Zero();      // desired position [m]
  Vec3 xdot = Vec3::Zero();   // desired velocity [m/s]
  Vec3 xddot = Vec3::Zero();  // desired acceleration [m/s^2]
};

/// End-effector position and velocity.
struct TaskState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Impedance law solved for the commanded task acceleration:
///   u = xddot_des + Lambda^{-1} (f_ext - D (v - xdot_des) - K (p - x_des))
Vec3 nominal_task_accel(const TaskState& state, const DesiredMotion& desired,
                        const Vec3& f_ext, const ImpedanceParams& params);

struct TorqueCommand {
  VecX tau;
  bool near_singular = false;  // smallest singular value of J below 10*lambda
};

/// Map a task acceleration to joint torques through inverse dynamics with a
/// damped-least-squares pseudoinverse of the translational Jacobian:
///   qddot = J^T (J J^T + lambda^2 I)^{-1} (u - Jdot qdot)
///   tau   = M qddot + C qdot + G
TorqueCommand task_to_joint_torques(const ArmModel& model, const JointState& state,
                                    const Vec3& u_task, double dls_lambda = 1e-2);

}  // namespace c3bf
