#include "c3bf/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace c3bf {

namespace {

constexpr double kDegenerateNorm = 1e-12;

// The robustness margin absorbs discretization error in the barrier rate,
// which scales with how fast the relative state moves; at rest it would
// only force needless corrections, so fade it in with relative speed.
double effective_margin(const FilterConfig& cfg, double vnorm) {
  constexpr double kRefSpeed = 0.1;  // m/s
  return cfg.margin * std::min(1.0, vnorm / kRefSpeed);
}

void check_relative_state(const RelativeState& rel) {
  if (!(rel.r > 0.0)) {
    throw std::invalid_argument("RelativeState: r must be > 0");
  }
  if (!rel.p_rel.allFinite() || !rel.v_rel.allFinite()) {
    throw std::invalid_argument("RelativeState: non-finite entries");
  }
}

struct Row {
  Vec3 a = Vec3::Zero();  // unit normal (zero for degenerate rows)
  double b = 0.0;         // bound in normalized units
  bool degenerate = false;
};

std::vector<Row> normalize_rows(const std::vector<SafetyConstraint>& cs) {
  std::vector<Row> rows;
  rows.reserve(cs.size());
  for (const SafetyConstraint& c : cs) {
    const double n = c.a.norm();
    Row row;
    if (n < kDegenerateNorm) {
      if (c.b <= kDegenerateNorm) {
        continue;  // 0 >= b with b <= 0: vacuous
      }
      row.degenerate = true;
      row.b = c.b;  // unsatisfiable for any u
    } else {
      row.a = c.a / n;
      row.b = c.b / n;
    }
    rows.push_back(row);
  }
  return rows;
}

double max_violation(const std::vector<Row>& rows, const Vec3& u) {
  double worst = 0.0;
  for (const Row& row : rows) {
    const double v = row.degenerate ? row.b : row.b - row.a.dot(u);
    worst = std::max(worst, v);
  }
  return worst;
}

// Minimum-deviation point over rows relaxed by `relax`, via enumeration of
// active subsets of size 0..3 (KKT in R^3 never needs more). Returns empty
// if the relaxed system is infeasible.
std::optional<Vec3> active_set_solve(const Vec3& u_nom, const std::vector<Row>& rows,
                                     double relax) {
  constexpr double kFeasTol = 1e-10;
  constexpr double kDualTol = 1e-9;

  std::vector<int> live;  // non-degenerate rows
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].degenerate) {
      if (rows[i].b - relax > kFeasTol) {
        return std::nullopt;  // a = 0 with positive bound: nothing helps
      }
    } else {
      live.push_back(static_cast<int>(i));
    }
  }

  auto feasible = [&](const Vec3& u) {
    for (int i : live) {
      if (rows[i].a.dot(u) < rows[i].b - relax - kFeasTol) return false;
    }
    return true;
  };

  if (feasible(u_nom)) {
    return u_nom;  // bit-for-bit: no solver drift when already safe
  }

  const int m = static_cast<int>(live.size());
  std::optional<Vec3> best;
  double best_cost = std::numeric_limits<double>::infinity();

  auto try_subset = [&](const std::vector<int>& subset) {
    const int k = static_cast<int>(subset.size());
    MatX a(k, 3);
    VecX rhs(k);
    for (int j = 0; j < k; ++j) {
      a.row(j) = rows[live[subset[j]]].a.transpose();
      rhs[j] = rows[live[subset[j]]].b - relax - rows[live[subset[j]]].a.dot(u_nom);
    }
    const MatX gram = a * a.transpose();
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(gram);
    const VecX lambda = cod.solve(rhs);
    if ((gram * lambda - rhs).cwiseAbs().maxCoeff() > 1e-8) {
      return;  // inconsistent equality subsystem
    }
    if ((lambda.array() < -kDualTol).any()) {
      return;  // dual-infeasible: not the KKT active set
    }
    const Vec3 u = u_nom + a.transpose() * lambda;
    if (!feasible(u)) {
      return;
    }
    const double cost = (u - u_nom).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = u;
    }
  };

  std::vector<int> subset;
  for (int i = 0; i < m; ++i) {
    subset = {i};
    try_subset(subset);
    for (int j = i + 1; j < m; ++j) {
      subset = {i, j};
      try_subset(subset);
      for (int k = j + 1; k < m; ++k) {
        subset = {i, j, k};
        try_subset(subset);
      }
    }
  }
  return best;
}

}  // namespace

DomainViolation::DomainViolation(double penetration)
    : std::runtime_error("relative state penetrates the safety sphere by " +
                         std::to_string(penetration) + " m"),
      penetration_(penetration) {}

double c3bf_value(const RelativeState& rel) {
  check_relative_state(rel);
  const double dist = rel.p_rel.norm();
  if (dist <= rel.r) {
    throw DomainViolation(rel.r - dist);
  }
  const double s = std::sqrt(dist * dist - rel.r * rel.r);
  return rel.p_rel.dot(rel.v_rel) + rel.v_rel.norm() * s;
}

SafetyConstraint c3bf_constraint(const RelativeState& rel, const FilterConfig& cfg) {
  const double h = c3bf_value(rel);  // also validates the domain
  const double dist = rel.p_rel.norm();
  const double s = std::sqrt(dist * dist - rel.r * rel.r);
  const double vnorm = rel.v_rel.norm();
  const double vnorm_reg = std::max(vnorm, cfg.eps_v);

  const double lf_h = vnorm * vnorm + vnorm * rel.p_rel.dot(rel.v_rel) / s;
  const Vec3 lg_h = rel.p_rel + (s / vnorm_reg) * rel.v_rel;

  SafetyConstraint c;
  c.a = lg_h;
  c.b = -cfg.gamma * h - lf_h + effective_margin(cfg, vnorm);
  c.barrier_value = h;
  return c;
}

SafetyConstraint distance_cbf_constraint(const RelativeState& rel,
                                         const FilterConfig& cfg) {
  check_relative_state(rel);
  const double h0 = rel.p_rel.squaredNorm() - rel.r * rel.r;
  const double pv = rel.p_rel.dot(rel.v_rel);
  const double psi1 = 2.0 * pv + cfg.gamma1 * h0;

  SafetyConstraint c;
  c.a = 2.0 * rel.p_rel;
  c.b = -(2.0 * rel.v_rel.squaredNorm() + 2.0 * cfg.gamma1 * pv + cfg.gamma2 * psi1) +
        effective_margin(cfg, rel.v_rel.norm());
  c.barrier_value = h0;
  return c;
}

QpResult solve_safety_qp(const Vec3& u_nom,
                         const std::vector<SafetyConstraint>& constraints) {
  QpResult result;
  if (!u_nom.allFinite()) {
    throw std::invalid_argument("solve_safety_qp: u_nom is not finite");
  }
  const std::vector<Row> rows = normalize_rows(constraints);
  if (rows.empty()) {
    result.u = u_nom;
    return result;
  }

  if (auto u = active_set_solve(u_nom, rows, 0.0)) {
    result.u = *u;
    return result;
  }

  // Infeasible: find the smallest uniform relaxation t that admits a point,
  // i.e. the minimizer of the maximum row-normalized violation.
  result.infeasible = true;
  double hi = 1.0;
  std::optional<Vec3> u_hi;
  for (int iter = 0; iter < 60; ++iter) {
    u_hi = active_set_solve(u_nom, rows, hi);
    if (u_hi) break;
    hi *= 2.0;
  }
  if (!u_hi) {
    // Cannot happen for finite rows; fall back to the nominal input.
    result.u = u_nom;
    return result;
  }
  double lo = 0.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (auto u = active_set_solve(u_nom, rows, mid)) {
      hi = mid;
      u_hi = u;
    } else {
      lo = mid;
    }
  }
  result.u = *u_hi;
  return result;
}

double combined_radius(const Obstacle& obs, const FilterConfig& cfg) {
  return obs.radius + cfg.ee_radius + cfg.clearance;
}

FilterResult filter(const Vec3& u_nom, const TaskState& task,
                    const std::vector<Obstacle>& visible_obstacles,
                    const FilterConfig& cfg) {
  FilterResult out;
  if (cfg.mode == FilterMode::none) {
    out.u = u_nom;
    return out;
  }

  std::vector<SafetyConstraint> constraints;
  constraints.reserve(visible_obstacles.size());
  out.diag.constraints.reserve(visible_obstacles.size());

  for (const Obstacle& obs : visible_obstacles) {
    RelativeState rel;
    rel.p_rel = task.p - obs.center;
    rel.v_rel = task.v - obs.velocity;
    rel.r = combined_radius(obs, cfg);

    SafetyConstraint c;
    ConstraintDiag diag;
    diag.source = obs.id;
    if (cfg.mode == FilterMode::c3bf) {
      try {
        c = c3bf_constraint(rel, cfg);
        if (rel.p_rel.norm() - rel.r <= cfg.guard) {
          // The cone keeps the velocity outside the collision cone but does
          // not lower-bound the distance; close to the sphere a grazing
          // slide can creep inward, so back the cone up with the distance
          // row inside the guard band.
          SafetyConstraint backup = distance_cbf_constraint(rel, cfg);
          backup.source = obs.id;
          backup.barrier_value = c.barrier_value;
          constraints.push_back(backup);
          ConstraintDiag backup_diag = diag;
          backup_diag.h = c.barrier_value;
          out.diag.constraints.push_back(backup_diag);
        }
      } catch (const DomainViolation& violation) {
        // Penetration can only come from integration error or a bad spawn;
        // keep the loop alive with the distance row and report it.
        c = distance_cbf_constraint(rel, cfg);
        diag.emergency = true;
        c.barrier_value = -violation.penetration();
      }
    } else {
      c = distance_cbf_constraint(rel, cfg);
    }
    c.source = obs.id;
    diag.h = c.barrier_value;
    constraints.push_back(c);
    out.diag.constraints.push_back(diag);
  }

  const QpResult qp = solve_safety_qp(u_nom, constraints);
  out.u = qp.u;
  out.diag.infeasible = qp.infeasible;
  out.diag.deviation = (qp.u - u_nom).norm();

  for (size_t i = 0; i < constraints.size(); ++i) {
    const SafetyConstraint& c = constraints[i];
    ConstraintDiag& diag = out.diag.constraints[i];
    diag.margin = c.a.dot(qp.u) - c.b;
    const double scale = std::max(1.0, c.a.norm());
    diag.active = out.diag.deviation > 0.0 && diag.margin <= 1e-7 * scale;
  }
  return out;
}

}  // namespace c3bf
