#include "c3bf/arm_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace c3bf {

namespace {

void validate_link(const DHLink& link, int index) {
  const std::string tag = "link " + std::to_string(index) + ": ";
  if (!(link.mass >= 0.0)) {
    throw std::invalid_argument(tag + "mass must be >= 0");
  }
  if ((link.inertia - link.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument(tag + "inertia tensor must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(link.inertia);
  const Vec3 ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-12) {
    throw std::invalid_argument(tag + "inertia tensor must be positive semidefinite");
  }
  // Triangle inequality on principal moments, all permutations.
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    if (ev[j] + ev[k] < ev[i] - 1e-9) {
      throw std::invalid_argument(tag + "inertia violates the triangle inequality");
    }
  }
}

}  // namespace

ArmModel::ArmModel(std::vector<DHLink> links, Vec3 gravity)
    : links_(std::move(links)), gravity_(std::move(gravity)) {
  if (links_.empty()) {
    throw std::invalid_argument("ArmModel needs at least one link");
  }
  for (size_t i = 0; i < links_.size(); ++i) {
    validate_link(links_[i], static_cast<int>(i));
  }
}

void ArmModel::check_dim(const VecX& v, const char* what) const {
  if (v.size() != dof()) {
    throw std::invalid_argument(std::string(what) + " has dimension " +
                                std::to_string(v.size()) + ", model has " +
                                std::to_string(dof()) + " joints");
  }
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite entries");
  }
}

// World-frame quantities accumulated along the chain. Index i runs over
// links; joint i+1 (1-based) acts at origin[i] of the parent frame.
struct ArmModel::FramePass {
  std::vector<Mat3> rot;       // world rotation of link frame i
  std::vector<Vec3> origin;    // world origin of link frame i
  std::vector<Vec3> axis;      // world joint axis (parent frame z)
  std::vector<Vec3> joint_at;  // world joint location (parent origin)
  std::vector<Vec3> omega;     // angular velocity of link i
  std::vector<Vec3> alpha;     // angular acceleration of link i
  std::vector<Vec3> accel;     // linear acceleration of origin i
};

ArmModel::FramePass ArmModel::kinematic_pass(const VecX& q, const VecX& qdot,
                                             const VecX& qddot,
                                             const Vec3& base_accel) const {
  const int n = dof();
  FramePass fp;
  fp.rot.resize(n);
  fp.origin.resize(n);
  fp.axis.resize(n);
  fp.joint_at.resize(n);
  fp.omega.resize(n);
  fp.alpha.resize(n);
  fp.accel.resize(n);

  Mat3 r_parent = Mat3::Identity();
  Vec3 o_parent = Vec3::Zero();
  Vec3 w_parent = Vec3::Zero();
  Vec3 dw_parent = Vec3::Zero();
  Vec3 a_parent = base_accel;

  for (int i = 0; i < n; ++i) {
    const DHLink& link = links_[i];
    const double theta = q[i] + link.theta_offset;
    const double ct = std::cos(theta), st = std::sin(theta);
    const double ca = std::cos(link.alpha), sa = std::sin(link.alpha);

    // Standard DH: RotZ(theta) TransZ(d) TransX(a) RotX(alpha).
    Mat3 r_local;
    r_local << ct, -st * ca, st * sa,
               st, ct * ca, -ct * sa,
               0.0, sa, ca;
    const Vec3 t_local(link.a * ct, link.a * st, link.d);

    const Vec3 z = r_parent.col(2);  // joint axis in world
    const Mat3 r = r_parent * r_local;
    const Vec3 o = o_parent + r_parent * t_local;

    const Vec3 w = w_parent + qdot[i] * z;
    const Vec3 dw = dw_parent + qddot[i] * z + w_parent.cross(qdot[i] * z);
    const Vec3 d = o - o_parent;
    const Vec3 a = a_parent + dw.cross(d) + w.cross(w.cross(d));

    fp.rot[i] = r;
    fp.origin[i] = o;
    fp.axis[i] = z;
    fp.joint_at[i] = o_parent;
    fp.omega[i] = w;
    fp.alpha[i] = dw;
    fp.accel[i] = a;

    r_parent = r;
    o_parent = o;
    w_parent = w;
    dw_parent = dw;
    a_parent = a;
  }
  return fp;
}

void ArmModel::forward_kinematics(const VecX& q, Vec3& p_ee, Mat3& r_ee) const {
  check_dim(q, "q");
  const VecX zero = VecX::Zero(dof());
  const FramePass fp = kinematic_pass(q, zero, zero, Vec3::Zero());
  p_ee = fp.origin.back();
  r_ee = fp.rot.back();
}

Vec3 ArmModel::ee_position(const VecX& q) const {
  Vec3 p;
  Mat3 r;
  forward_kinematics(q, p, r);
  return p;
}

MatX ArmModel::jacobian(const VecX& q) const {
  check_dim(q, "q");
  const int n = dof();
  const VecX zero = VecX::Zero(n);
  const FramePass fp = kinematic_pass(q, zero, zero, Vec3::Zero());
  const Vec3 p_ee = fp.origin.back();
  MatX jac(3, n);
  for (int i = 0; i < n; ++i) {
    jac.col(i) = fp.axis[i].cross(p_ee - fp.joint_at[i]);
  }
  return jac;
}

Vec3 ArmModel::jacobian_dot_qdot(const JointState& state) const {
  check_dim(state.q, "q");
  check_dim(state.qdot, "qdot");
  // The end-effector acceleration at zero joint acceleration and zero base
  // acceleration is exactly Jdot qdot.
  const VecX zero = VecX::Zero(dof());
  const FramePass fp = kinematic_pass(state.q, state.qdot, zero, Vec3::Zero());
  return fp.accel.back();
}

VecX ArmModel::rnea(const VecX& q, const VecX& qdot, const VecX& qddot,
                    const Vec3& gravity) const {
  const int n = dof();
  // Fictitious base acceleration -g folds gravity into the recursion.
  const FramePass fp = kinematic_pass(q, qdot, qddot, -gravity);

  VecX tau(n);
  Vec3 f_child = Vec3::Zero();   // force from link i+1 on link i
  Vec3 n_child = Vec3::Zero();   // couple from link i+1 on link i
  for (int i = n - 1; i >= 0; --i) {
    const DHLink& link = links_[i];
    const Vec3 c_w = fp.rot[i] * link.com;
    const Vec3 x_com = fp.origin[i] + c_w;
    const Vec3 a_com = fp.accel[i] + fp.alpha[i].cross(c_w) +
                       fp.omega[i].cross(fp.omega[i].cross(c_w));
    const Mat3 inertia_w = fp.rot[i] * link.inertia * fp.rot[i].transpose();

    const Vec3 force = link.mass * a_com;
    const Vec3 torque = inertia_w * fp.alpha[i] +
                        fp.omega[i].cross(inertia_w * fp.omega[i]);

    // Moments taken about the joint point of link i.
    const Vec3 f_joint = f_child + force;
    const Vec3 n_joint = n_child + torque + (x_com - fp.joint_at[i]).cross(force) +
                         (fp.origin[i] - fp.joint_at[i]).cross(f_child);

    tau[i] = fp.axis[i].dot(n_joint);
    f_child = f_joint;
    n_child = n_joint;
  }
  return tau;
}

MatX ArmModel::mass_matrix(const VecX& q) const {
  check_dim(q, "q");
  const int n = dof();
  const VecX zero = VecX::Zero(n);
  MatX m(n, n);
  for (int j = 0; j < n; ++j) {
    VecX unit = VecX::Zero(n);
    unit[j] = 1.0;
    m.col(j) = rnea(q, zero, unit, Vec3::Zero());
  }
  // Symmetrize away the last bits of floating-point asymmetry.
  m = 0.5 * (m + m.transpose()).eval();
  return m;
}

VecX ArmModel::bias_forces(const JointState& state) const {
  check_dim(state.q, "q");
  check_dim(state.qdot, "qdot");
  return rnea(state.q, state.qdot, VecX::Zero(dof()), gravity_);
}

VecX ArmModel::gravity_forces(const VecX& q) const {
  check_dim(q, "q");
  const VecX zero = VecX::Zero(dof());
  return rnea(q, zero, zero, gravity_);
}

VecX ArmModel::inverse_dynamics(const JointState& state, const VecX& qddot) const {
  check_dim(state.q, "q");
  check_dim(state.qdot, "qdot");
  check_dim(qddot, "qddot");
  return rnea(state.q, state.qdot, qddot, gravity_);
}

VecX ArmModel::forward_dynamics(const JointState& state, const VecX& tau) const {
  check_dim(tau, "tau");
  const MatX m = mass_matrix(state.q);
  const VecX bias = bias_forces(state);
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "forward_dynamics: mass matrix is not positive definite "
        "(degenerate inertial parameters?)");
  }
  return llt.solve(tau - bias);
}

}  // namespace c3bf
