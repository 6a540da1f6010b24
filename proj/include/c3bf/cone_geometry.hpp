#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "c3bf/errors.hpp"

// Collision-cone geometry. Everything here is a pure function of the relative
// position p_rel, the relative velocity v_rel, and the effective obstacle
// radius r; all are safe to call concurrently.
//
// The candidate barrier value
//
//     h = <p_rel, v_rel> + |p_rel| |v_rel| cos(phi),   cos(phi) = sqrt(|p_rel|^2 - r^2) / |p_rel|
//
// is nonnegative exactly when v_rel points outside the cone of directions that
// lead into the disc of radius r centered at the obstacle.

namespace c3bf {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2d = Vec2<double>;

// Guard band on the penetration precondition |p_rel| > r. Inside r + guard the
// square root in cos(phi) has a vanishing or undefined derivative.
inline constexpr double kPenetrationGuard = 1e-9;

// Relative speeds at or below this are treated as degenerate: h vanishes
// identically and the cone direction is undefined.
inline constexpr double kDegenerateSpeed = 1e-8;

// Effective obstacle radius: the circle enclosing the elliptical obstacle,
// inflated by half the ego width.
template <typename Scalar>
Scalar effective_radius(Scalar semi_axis_1, Scalar semi_axis_2, Scalar ego_width) {
  if (!(semi_axis_1 > Scalar(0)) || !(semi_axis_2 > Scalar(0))) {
    throw GeometryError("effective_radius: semi-axes must be positive");
  }
  if (!(ego_width >= Scalar(0))) {
    throw GeometryError("effective_radius: ego width must be nonnegative");
  }
  return std::max(semi_axis_1, semi_axis_2) + ego_width / Scalar(2);
}

namespace internal {

// sqrt(|p_rel|^2 - r^2), the shared radicand of cos(phi) and the Lie
// derivatives. Throws when the ego center is inside the tangent circle.
template <typename Scalar>
Scalar tangent_leg(const Vec2<Scalar>& p_rel, Scalar r) {
  if (!(r > Scalar(0))) {
    throw GeometryError("cone radius must be positive");
  }
  const Scalar dist = p_rel.norm();
  if (!(dist > r + Scalar(kPenetrationGuard))) {
    throw PenetrationError(static_cast<double>(dist), static_cast<double>(r));
  }
  return std::sqrt(p_rel.squaredNorm() - r * r);
}

}  // namespace internal

// cos(phi) for the cone half-angle phi; strictly inside (0, 1) on the valid
// domain |p_rel| > r.
template <typename Scalar>
Scalar cos_half_angle(const Vec2<Scalar>& p_rel, Scalar r) {
  return internal::tangent_leg(p_rel, r) / p_rel.norm();
}

// The collision-cone barrier candidate. Negative iff v_rel lies strictly
// inside the cone; zero on the cone boundary and whenever v_rel vanishes.
template <typename Scalar>
Scalar h_value(const Vec2<Scalar>& p_rel, const Vec2<Scalar>& v_rel, Scalar r) {
  return p_rel.dot(v_rel) + v_rel.norm() * internal::tangent_leg(p_rel, r);
}

}  // namespace c3bf
