#pragma once

#include <Eigen/Dense>
#include <vector>

namespace c3bf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// One revolute link in standard Denavit-Hartenberg convention plus its
/// inertial data. The link frame sits at the distal end of the link; `com`
/// and `inertia` are expressed in that frame, inertia taken about the COM.
struct DHLink {
  double a = 0.0;             // link length [m]
  double alpha = 0.0;         // link twist [rad]
  double d = 0.0;             // link offset [m]
  double theta_offset = 0.0;  // joint angle offset [rad]
  double mass = 0.0;          // [kg]
  Vec3 com = Vec3::Zero();    // COM in link frame [m]
  Mat3 inertia = Mat3::Zero();  // about COM, link frame [kg m^2]
};

struct JointState {
  VecX q;     // joint positions [rad]
  VecX qdot;  // joint velocities [rad/s]
};

/// n-DOF revolute serial chain. Kinematics via composed DH transforms,
/// dynamics via a world-frame recursive Newton-Euler pass. All methods are
/// const and the object is safe to copy between threads.
class ArmModel {
 public:
  explicit ArmModel(std::vector<DHLink> links, Vec3 gravity = Vec3(0, 0, -9.81));

  int dof() const { return static_cast<int>(links_.size()); }
  const std::vector<DHLink>& links() const { return links_; }
  const Vec3& gravity() const { return gravity_; }
  void set_gravity(const Vec3& g) { gravity_ = g; }

  /// End-effector position and rotation (last link frame).
  void forward_kinematics(const VecX& q, Vec3& p_ee, Mat3& r_ee) const;
  Vec3 ee_position(const VecX& q) const;

  /// Translational geometric Jacobian, 3 x n. Column i is z_i x (p_ee - o_i)
  /// with z_i the world axis of joint i and o_i the joint location.
  MatX jacobian(const VecX& q) const;

  /// Drift acceleration d/dt(J(q)) qdot of the end-effector point.
  Vec3 jacobian_dot_qdot(const JointState& state) const;

  /// Joint-space inertia matrix M(q), symmetric positive definite.
  MatX mass_matrix(const VecX& q) const;

  /// C(q,qdot) qdot + G(q), i.e. inverse dynamics at zero joint acceleration.
  VecX bias_forces(const JointState& state) const;

  /// G(q) alone (bias at zero velocity).
  VecX gravity_forces(const VecX& q) const;

  /// tau = M(q) qddot + C(q,qdot) qdot + G(q)  (recursive Newton-Euler).
  VecX inverse_dynamics(const JointState& state, const VecX& qddot) const;

  /// qddot = M(q)^{-1} (tau - C qdot - G), solved by Cholesky factorization.
  VecX forward_dynamics(const JointState& state, const VecX& tau) const;

 private:
  struct FramePass;  // per-link world-frame kinematic quantities

  void check_dim(const VecX& v, const char* what) const;
  FramePass kinematic_pass(const VecX& q, const VecX& qdot, const VecX& qddot,
                           const Vec3& base_accel) const;
  VecX rnea(const VecX& q, const VecX& qdot, const VecX& qddot,
            const Vec3& gravity) const;

  std::vector<DHLink> links_;
  Vec3 gravity_;
};

}  // namespace c3bf
