#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "c3bf/cbf_constraints.hpp"
#include "c3bf/errors.hpp"

// The safety filter: minimally modify a reference input so every barrier
// constraint  lf_h_i + lg_h_i . u + kappa_i(h_i) >= 0  holds. For a single
// constraint without input bounds the KKT solution is the switching law
//
//   u_safe = u_ref                                   if psi >= 0
//   u_safe = u_ref - lg_h^T psi / (lg_h lg_h^T)      if psi <  0,
//
// which places the corrected input exactly on the constraint boundary. The
// general case is a 2-variable projection QP solved exactly by active-set
// enumeration; the two paths serve as oracles for each other.

namespace c3bf {

template <typename Scalar>
struct InputBoundsT {
  Vec2<Scalar> lower{-std::numeric_limits<Scalar>::infinity(),
                     -std::numeric_limits<Scalar>::infinity()};
  Vec2<Scalar> upper{std::numeric_limits<Scalar>::infinity(),
                     std::numeric_limits<Scalar>::infinity()};

  bool unbounded() const {
    return !std::isfinite(lower[0]) && !std::isfinite(lower[1]) &&
           !std::isfinite(upper[0]) && !std::isfinite(upper[1]);
  }
};

template <typename Scalar>
struct FilterResultT {
  Vec2<Scalar> u_safe{Vec2<Scalar>::Zero()};
  bool active{false};  // false implies u_safe == u_ref exactly
  Scalar psi{0};       // most critical constraint's psi at u_ref
  Scalar h{0};         // most critical constraint's h
};

using InputBounds = InputBoundsT<double>;
using FilterResult = FilterResultT<double>;

// Closed-form single-constraint filter.
template <typename Scalar>
FilterResultT<Scalar> filter_closed_form(const Vec2<Scalar>& u_ref,
                                         const ConstraintEvalT<Scalar>& c) {
  const Scalar gram = c.lg_h.squaredNorm();
  if (!(gram > Scalar(0))) {
    throw InvalidConstraintError("filter_closed_form: L_g h vanishes");
  }
  FilterResultT<Scalar> result;
  result.psi = c.psi;
  result.h = c.h;
  if (c.psi >= Scalar(0)) {
    result.u_safe = u_ref;
    result.active = false;
  } else {
    result.u_safe = u_ref - c.lg_h * (c.psi / gram);
    result.active = true;
  }
  return result;
}

namespace internal {

// Feasibility slack of constraint a.delta >= b at delta: positive means slack.
template <typename Scalar>
Scalar slack(const Vec2<Scalar>& a, Scalar b, const Vec2<Scalar>& delta) {
  return a.dot(delta) - b;
}

}  // namespace internal

// Projection of u_ref onto the feasible polytope, in correction coordinates
// delta = u - u_ref: minimize |delta|^2 subject to lg_h_i . delta >= -psi_i
// and box bounds on u. Exact enumeration over active sets of size 0, 1 and 2;
// the unique candidate that is primal feasible with nonnegative multipliers is
// the optimum. Throws InfeasibleError when no input satisfies all constraints.
template <typename Scalar>
FilterResultT<Scalar> filter_qp(const Vec2<Scalar>& u_ref,
                                const std::vector<ConstraintEvalT<Scalar>>& constraints,
                                const InputBoundsT<Scalar>& bounds = {}) {
  if (constraints.empty()) {
    throw InvalidConstraintError("filter_qp: needs at least one constraint");
  }
  // Stack barrier rows and finite bound rows as a.delta >= b.
  std::vector<Vec2<Scalar>> rows;
  std::vector<Scalar> rhs;
  for (const auto& c : constraints) {
    if (!(c.lg_h.squaredNorm() > Scalar(0))) {
      throw InvalidConstraintError("filter_qp: constraint with vanishing L_g h");
    }
    rows.push_back(c.lg_h);
    rhs.push_back(-c.psi);
  }
  for (int axis = 0; axis < 2; ++axis) {
    if (std::isfinite(bounds.lower[axis])) {
      rows.push_back(Vec2<Scalar>::Unit(axis));
      rhs.push_back(bounds.lower[axis] - u_ref[axis]);
    }
    if (std::isfinite(bounds.upper[axis])) {
      rows.push_back(-Vec2<Scalar>::Unit(axis));
      rhs.push_back(u_ref[axis] - bounds.upper[axis]);
    }
  }
  const int n = static_cast<int>(rows.size());

  Scalar scale = Scalar(1);
  for (int i = 0; i < n; ++i) {
    scale = std::max({scale, rows[i].norm(), std::abs(rhs[i])});
  }
  const Scalar feas_tol = Scalar(1e-10) * scale;
  const Scalar dual_tol = Scalar(1e-12) * scale;

  auto feasible = [&](const Vec2<Scalar>& delta) {
    for (int i = 0; i < n; ++i) {
      if (internal::slack(rows[i], rhs[i], delta) < -feas_tol) return false;
    }
    return true;
  };

  bool found = false;
  Vec2<Scalar> best = Vec2<Scalar>::Zero();
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  auto consider = [&](const Vec2<Scalar>& delta) {
    if (!feasible(delta)) return;
    const Scalar cost = delta.squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = delta;
      found = true;
    }
  };

  // Unconstrained optimum.
  consider(Vec2<Scalar>::Zero());

  // Single active constraint: delta = a_i * lambda with lambda >= 0.
  for (int i = 0; i < n; ++i) {
    const Scalar lambda = rhs[i] / rows[i].squaredNorm();
    if (lambda >= -dual_tol) {
      consider(rows[i] * lambda);
    }
  }

  // Pairs of active constraints.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::Matrix<Scalar, 2, 2> basis;
      basis.col(0) = rows[i];
      basis.col(1) = rows[j];
      const Scalar det = basis.determinant();
      if (std::abs(det) <= Scalar(1e-14) * rows[i].norm() * rows[j].norm()) {
        continue;  // parallel rows; single-constraint candidates cover these
      }
      const Vec2<Scalar> delta =
          basis.transpose().inverse() * Vec2<Scalar>{rhs[i], rhs[j]};
      const Vec2<Scalar> lambda = basis.inverse() * delta;
      if (lambda[0] >= -dual_tol && lambda[1] >= -dual_tol) {
        consider(delta);
      }
    }
  }

  if (!found) {
    // No feasible point exists. Diagnose with the most violated constraint at
    // the box-clamped reference.
    Vec2<Scalar> probe = Vec2<Scalar>::Zero();
    for (int axis = 0; axis < 2; ++axis) {
      const Scalar lo = std::isfinite(bounds.lower[axis]) ? bounds.lower[axis] - u_ref[axis]
                                                          : probe[axis];
      const Scalar hi = std::isfinite(bounds.upper[axis]) ? bounds.upper[axis] - u_ref[axis]
                                                          : probe[axis];
      probe[axis] = std::min(std::max(probe[axis], lo), hi);
    }
    int worst = 0;
    Scalar worst_violation = Scalar(0);
    for (int i = 0; i < static_cast<int>(constraints.size()); ++i) {
      const Scalar violation = -internal::slack(rows[i], rhs[i], probe);
      if (violation > worst_violation) {
        worst_violation = violation;
        worst = i;
      }
    }
    throw InfeasibleError(worst, static_cast<double>(worst_violation));
  }

  FilterResultT<Scalar> result;
  result.active = best_cost > Scalar(0);
  result.u_safe = result.active ? Vec2<Scalar>(u_ref + best) : u_ref;
  result.psi = constraints.front().psi;
  result.h = constraints.front().h;
  for (const auto& c : constraints) {
    result.psi = std::min(result.psi, c.psi);
    result.h = std::min(result.h, c.h);
  }
  return result;
}

}  // namespace c3bf
