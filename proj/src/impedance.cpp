#include "c3bf/impedance.hpp"

#include <stdexcept>

namespace c3bf {

namespace {

void require_symmetric_psd(const Mat3& m, const char* name) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument(std::string(name) +
                                " must be positive semidefinite");
  }
}

}  // namespace

ImpedanceParams::ImpedanceParams()
    : ImpedanceParams(Mat3::Identity(), 20.0 * Mat3::Identity(),
                      100.0 * Mat3::Identity()) {}

ImpedanceParams::ImpedanceParams(const Mat3& lambda, const Mat3& damping,
                                 const Mat3& stiffness)
    : lambda_(lambda), damping_(damping), stiffness_(stiffness) {
  if ((lambda_ - lambda_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("lambda must be symmetric");
  }
  lambda_llt_.compute(lambda_);
  if (lambda_llt_.info() != Eigen::Success) {
    throw std::invalid_argument("lambda must be symmetric positive definite");
  }
  require_symmetric_psd(damping_, "damping");
  require_symmetric_psd(stiffness_, "stiffness");
}

Vec3 nominal_task_accel(const TaskState& state, const DesiredMotion& desired,
                        const Vec3& f_ext, const ImpedanceParams& params) {
  const Vec3 wrench = f_ext - params.damping() * (state.v - desired.xdot) -
                      params.stiffness() * (state.p - desired.x);
  return desired.xddot + params.lambda_llt().solve(wrench);
}

TorqueCommand task_to_joint_torques(const ArmModel& model, const JointState& state,
                                    const Vec3& u_task, double dls_lambda) {
  const MatX jac = model.jacobian(state.q);
  const Vec3 drift = model.jacobian_dot_qdot(state);

  Mat3 jjt = (jac * jac.transpose());
  jjt.diagonal().array() += dls_lambda * dls_lambda;
  const Vec3 rhs = u_task - drift;
  const VecX qddot_cmd = jac.transpose() * jjt.ldlt().solve(rhs).eval();

  TorqueCommand cmd;
  cmd.tau = model.mass_matrix(state.q) * qddot_cmd + model.bias_forces(state);
  Eigen::JacobiSVD<MatX> svd(jac);
  cmd.near_singular = svd.singularValues().minCoeff() < 10.0 * dls_lambda;
  return cmd;
}

}  // namespace c3bf
