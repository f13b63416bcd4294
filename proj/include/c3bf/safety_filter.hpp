#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "c3bf/impedance.hpp"
#include "c3bf/world.hpp"

namespace c3bf {

/// Relative kinematics of the end-effector with respect to one obstacle.
/// r is the combined safety radius (obstacle + end-effector envelope +
/// clearance margin).
struct RelativeState {
  Vec3 p_rel = Vec3::Zero();  // p_ee - p_obstacle [m]
  Vec3 v_rel = Vec3::Zero();  // v_ee - v_obstacle [m/s]
  double r = 0.0;             // combined safety radius [m], > 0
};

/// One half-space row a . u >= b on the task acceleration.
struct SafetyConstraint {
  Vec3 a = Vec3::Zero();
  double b = 0.0;
  int source = -1;           // obstacle id
  double barrier_value = 0;  // h at build time
};

enum class FilterMode { c3bf, distance, none };

struct FilterConfig {
  FilterMode mode = FilterMode::c3bf;
  double gamma = 1.0;    // class-K gain for the collision-cone barrier [1/s]
  double eps_v = 1e-6;   // relative-velocity regularization floor [m/s]
  double gamma1 = 1.0;   // first gain of the distance-barrier chain [1/s]
  double gamma2 = 1.0;   // second gain of the distance-barrier chain [1/s]
  double ee_radius = 0.05;  // end-effector envelope radius [m]
  double clearance = 0.02;  // extra clearance margin [m]
  double margin = 0.0;      // robustness offset: enforce hdot >= -gamma h + margin
  double guard = 0.0;       // band above r where the distance row backs up the cone [m]
};

/// Thrown when the relative state has penetrated the safety sphere
/// (||p_rel|| <= r), outside the collision-cone barrier's domain.
class DomainViolation : public std::runtime_error {
 public:
  explicit DomainViolation(double penetration);
  double penetration() const { return penetration_; }

 private:
  double penetration_;
};

struct ConstraintDiag {
  int source = -1;
  double h = 0.0;
  bool active = false;   // tight at the solution
  double margin = 0.0;   // a . u_safe - b
  bool emergency = false;  // distance row substituted after penetration
};

struct FilterDiagnostics {
  std::vector<ConstraintDiag> constraints;
  double deviation = 0.0;  // ||u_safe - u_nom||
  bool infeasible = false;
};

/// Collision-cone barrier value
///   h = <p_rel, v_rel> + ||v_rel|| sqrt(||p_rel||^2 - r^2).
/// Requires ||p_rel|| > r; throws DomainViolation otherwise.
double c3bf_value(const RelativeState& rel);

/// Linearization of hdot + gamma h >= 0 in the task acceleration. With
/// s = sqrt(||p_rel||^2 - r^2) and the velocity norm floored at eps_v:
///   L_f h = ||v||^2 + ||v|| <p, v> / s
///   L_g h = p^T + (s / ||v||) v^T
/// returning a = (L_g h)^T, b = -gamma h - L_f h.
SafetyConstraint c3bf_constraint(const RelativeState& rel, const FilterConfig& cfg);

/// Second-order distance barrier on h0 = ||p_rel||^2 - r^2 (the baseline):
///   psi1 = 2 <p, v> + gamma1 h0,  constraint psidot1 + gamma2 psi1 >= 0.
SafetyConstraint distance_cbf_constraint(const RelativeState& rel,
                                         const FilterConfig& cfg);

struct QpResult {
  Vec3 u = Vec3::Zero();
  bool infeasible = false;
};

/// argmin ||u - u_nom||^2 subject to a_i . u >= b_i, by active-set
/// enumeration over subsets of up to three rows. If no feasible point
/// exists, returns the minimizer of the maximum (row-normalized) violation
/// and flags infeasibility.
QpResult solve_safety_qp(const Vec3& u_nom,
                         const std::vector<SafetyConstraint>& constraints);

struct FilterResult {
  Vec3 u = Vec3::Zero();
  FilterDiagnostics diag;
};

/// Build one constraint per visible obstacle according to cfg.mode, solve
/// the minimum-deviation QP, and report diagnostics. A penetrated obstacle
/// falls back to the distance row (emergency mode) instead of aborting.
FilterResult filter(const Vec3& u_nom, const TaskState& task,
                    const std::vector<Obstacle>& visible_obstacles,
                    const FilterConfig& cfg);

/// Combined safety radius for an obstacle under this configuration.
double combined_radius(const Obstacle& obs, const FilterConfig& cfg);

}  // namespace c3bf
