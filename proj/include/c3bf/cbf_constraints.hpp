#pragma once

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <utility>

#include "c3bf/cone_geometry.hpp"
#include "c3bf/reduced_models.hpp"

// Assembly of the collision-cone barrier constraint for one obstacle: the
// value h, its Lie derivatives L_f h and L_g h along the reduced model, and
// psi = L_f h + L_g h u_ref + kappa(h), whose sign decides whether the safety
// filter intervenes.
//
// Both constraints share the derivative structure
//
//   dh/dt = <v_rel, v_rel> + <p_rel, v_rel> |v_rel| / s + <w, dv_rel/dt>,
//   w = p_rel + v_rel s / |v_rel|,   s = sqrt(|p_rel|^2 - r^2),
//
// valid while the obstacle moves at constant velocity (then dp_rel/dt = v_rel).
// The input enters only through dv_rel/dt; collecting its input-linear part
// yields L_g h and the remainder L_f h.

namespace c3bf {

// Linear extended class-K function kappa(h) = gamma * h.
template <typename Scalar>
struct ClassKT {
  Scalar gamma{Scalar(1)};

  Scalar operator()(Scalar h) const { return gamma * h; }
};

template <typename Scalar>
struct ObstacleStateT {
  Vec2<Scalar> center{Vec2<Scalar>::Zero()};    // m
  Vec2<Scalar> velocity{Vec2<Scalar>::Zero()};  // m/s, constant over a scenario
  Scalar radius{Scalar(1)};                     // effective radius r > 0
};

// One evaluated constraint instance. By construction
// psi == lf_h + lg_h . u_ref + kappa(h); consistency_residual() rechecks it.
template <typename Scalar>
struct ConstraintEvalT {
  Scalar h{0};
  Scalar lf_h{0};
  Vec2<Scalar> lg_h{Vec2<Scalar>::Zero()};  // row of dh/du, one entry per input axis
  Scalar psi{0};

  Scalar consistency_residual(const Vec2<Scalar>& u_ref, const ClassKT<Scalar>& k) const {
    return psi - (lf_h + lg_h.dot(u_ref) + k(h));
  }
};

using ClassK = ClassKT<double>;
using ObstacleState = ObstacleStateT<double>;
using ConstraintEval = ConstraintEvalT<double>;

// Relative kinematics of the obstacle center with respect to the unicycle
// body center (offset l ahead of the axle along the heading).
template <typename Scalar>
std::pair<Vec2<Scalar>, Vec2<Scalar>> relative_state_vertical(
    const UnicycleStateT<Scalar>& s, const EgoParamsT<Scalar>& ego,
    const ObstacleStateT<Scalar>& obs) {
  const Scalar c = std::cos(s.theta);
  const Scalar sn = std::sin(s.theta);
  const Vec2<Scalar> body_center{s.x_p + ego.l * c, s.y_p + ego.l * sn};
  const Vec2<Scalar> body_velocity{s.v * c - ego.l * s.omega * sn,
                                   s.v * sn + ego.l * s.omega * c};
  return {obs.center - body_center, obs.velocity - body_velocity};
}

// Relative kinematics in the x-z plane.
template <typename Scalar>
std::pair<Vec2<Scalar>, Vec2<Scalar>> relative_state_horizontal(
    const PlanarStateT<Scalar>& s, const ObstacleStateT<Scalar>& obs) {
  const Vec2<Scalar> position{s.x_p, s.z_p};
  const Vec2<Scalar> velocity{s.vx, s.vz};
  return {obs.center - position, obs.velocity - velocity};
}

namespace internal {

// Shared constraint assembly once the input-dependence of dv_rel/dt is known:
// dv_rel/dt = drift + input_map * u.
template <typename Scalar>
std::optional<ConstraintEvalT<Scalar>> assemble_constraint(
    const Vec2<Scalar>& p_rel, const Vec2<Scalar>& v_rel, Scalar r,
    const Vec2<Scalar>& vrel_dot_drift, const Eigen::Matrix<Scalar, 2, 2>& vrel_dot_input_map,
    const ClassKT<Scalar>& k, const Vec2<Scalar>& u_ref) {
  const Scalar s = internal::tangent_leg(p_rel, r);  // throws on penetration
  const Scalar speed = v_rel.norm();
  if (!(speed > Scalar(kDegenerateSpeed))) {
    return std::nullopt;
  }
  ConstraintEvalT<Scalar> eval;
  eval.h = h_value(p_rel, v_rel, r);
  const Vec2<Scalar> w = p_rel + v_rel * (s / speed);
  eval.lf_h = v_rel.squaredNorm() + p_rel.dot(v_rel) * speed / s + w.dot(vrel_dot_drift);
  eval.lg_h = vrel_dot_input_map.transpose() * w;
  eval.psi = eval.lf_h + eval.lg_h.dot(u_ref) + k(eval.h);
  return eval;
}

}  // namespace internal

// Constraint for the planar x-z model. dv_rel/dt = (-a, -a_z) for a constant
// velocity obstacle, so L_g h = -(p_rel + v_rel s / |v_rel|)^T.
// Returns nullopt when |v_rel| is degenerate; throws PenetrationError when the
// body center is inside the effective disc.
template <typename Scalar>
std::optional<ConstraintEvalT<Scalar>> eval_constraint_horizontal(
    const PlanarStateT<Scalar>& state, const ObstacleStateT<Scalar>& obs,
    const ClassKT<Scalar>& k, const PlanarInputT<Scalar>& u_ref) {
  const auto [p_rel, v_rel] = relative_state_horizontal(state, obs);
  return internal::assemble_constraint<Scalar>(
      p_rel, v_rel, obs.radius, Vec2<Scalar>::Zero(),
      -Eigen::Matrix<Scalar, 2, 2>::Identity(), k, Vec2<Scalar>{u_ref.accel_x, u_ref.accel_z});
}

// Constraint for the unicycle model. Differentiating v_rel along the dynamics
// (constant obstacle velocity) gives
//
//   dv_rel/dt = ( v w sin(th) + l w^2 cos(th),  -v w cos(th) + l w^2 sin(th) )
//             + [ -cos(th)   l sin(th) ] [ a     ]
//               [ -sin(th)  -l cos(th) ] [ alpha ]
//
// whose input map has determinant l, so with l > 0 the alpha column breaks the
// head-on symmetry.
template <typename Scalar>
std::optional<ConstraintEvalT<Scalar>> eval_constraint_vertical(
    const UnicycleStateT<Scalar>& state, const EgoParamsT<Scalar>& ego,
    const ObstacleStateT<Scalar>& obs, const ClassKT<Scalar>& k,
    const UnicycleInputT<Scalar>& u_ref) {
  const auto [p_rel, v_rel] = relative_state_vertical(state, ego, obs);
  const Scalar c = std::cos(state.theta);
  const Scalar sn = std::sin(state.theta);
  const Scalar vw = state.v * state.omega;
  const Scalar lw2 = ego.l * state.omega * state.omega;
  const Vec2<Scalar> drift{vw * sn + lw2 * c, -vw * c + lw2 * sn};
  Eigen::Matrix<Scalar, 2, 2> input_map;
  input_map << -c, ego.l * sn, -sn, -ego.l * c;
  return internal::assemble_constraint<Scalar>(p_rel, v_rel, obs.radius, drift, input_map, k,
                                               Vec2<Scalar>{u_ref.accel, u_ref.alpha});
}

}  // namespace c3bf
