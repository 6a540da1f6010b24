#pragma once

#include <Eigen/Core>

#include <cmath>

#include "c3bf/errors.hpp"

// The two acceleration-controlled reduced-order models the safety layer acts
// on: a planar unicycle with forward/yaw acceleration inputs (obstacles in the
// x-y plane) and a double integrator in the x-z plane (overhead obstacles).
// States are value types; dynamics are free functions returning the state
// derivative as a dense vector.

namespace c3bf {

// Wrap an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  constexpr Scalar pi = Scalar(M_PI);
  Scalar wrapped = std::remainder(theta, Scalar(2) * pi);
  if (wrapped <= -pi) wrapped += Scalar(2) * pi;
  return wrapped;
}

template <typename Scalar>
struct UnicycleStateT {
  Scalar x_p{0};    // m
  Scalar y_p{0};    // m
  Scalar theta{0};  // rad, kept in (-pi, pi] across integration steps
  Scalar v{0};      // m/s, forward speed
  Scalar omega{0};  // rad/s, yaw rate

  Eigen::Matrix<Scalar, 5, 1> vector() const {
    return Eigen::Matrix<Scalar, 5, 1>{x_p, y_p, theta, v, omega};
  }
  static UnicycleStateT from_vector(const Eigen::Matrix<Scalar, 5, 1>& s) {
    return {s[0], s[1], s[2], s[3], s[4]};
  }
};

template <typename Scalar>
struct UnicycleInputT {
  Scalar accel{0};  // m/s^2, forward acceleration
  Scalar alpha{0};  // rad/s^2, yaw acceleration
};

template <typename Scalar>
struct PlanarStateT {
  Scalar x_p{0};  // m
  Scalar z_p{0};  // m, height
  Scalar vx{0};   // m/s
  Scalar vz{0};   // m/s

  Eigen::Matrix<Scalar, 4, 1> vector() const {
    return Eigen::Matrix<Scalar, 4, 1>{x_p, z_p, vx, vz};
  }
  static PlanarStateT from_vector(const Eigen::Matrix<Scalar, 4, 1>& s) {
    return {s[0], s[1], s[2], s[3]};
  }
};

template <typename Scalar>
struct PlanarInputT {
  Scalar accel_x{0};  // m/s^2
  Scalar accel_z{0};  // m/s^2
};

// Body geometry: l is the body-center offset ahead of the differential-drive
// axis, width the lateral extent that inflates obstacle radii.
template <typename Scalar>
struct EgoParamsT {
  Scalar l{Scalar(0.2)};
  Scalar width{Scalar(0.4)};
};

using UnicycleState = UnicycleStateT<double>;
using UnicycleInput = UnicycleInputT<double>;
using PlanarState = PlanarStateT<double>;
using PlanarInput = PlanarInputT<double>;
using EgoParams = EgoParamsT<double>;

template <typename Scalar>
Eigen::Matrix<Scalar, 5, 1> unicycle_dynamics(const UnicycleStateT<Scalar>& s,
                                              const UnicycleInputT<Scalar>& u) {
  return Eigen::Matrix<Scalar, 5, 1>{s.v * std::cos(s.theta), s.v * std::sin(s.theta),
                                     s.omega, u.accel, u.alpha};
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> planar_dynamics(const PlanarStateT<Scalar>& s,
                                            const PlanarInputT<Scalar>& u) {
  return Eigen::Matrix<Scalar, 4, 1>{s.vx, s.vz, u.accel_x, u.accel_z};
}

enum class IntegrationMethod { kEuler, kRk4 };

namespace internal {

// One fixed step of x' = f(x) with the input held constant (zero-order hold).
template <typename StateVec, typename Deriv>
StateVec fixed_step(const StateVec& x0, Deriv&& f, typename StateVec::Scalar dt,
                    IntegrationMethod method) {
  using S = typename StateVec::Scalar;
  if (!(dt > S(0))) {
    throw GeometryError("step: dt must be positive");
  }
  if (method == IntegrationMethod::kEuler) {
    return x0 + dt * f(x0);
  }
  const StateVec k1 = f(x0);
  const StateVec k2 = f(x0 + (dt / 2) * k1);
  const StateVec k3 = f(x0 + (dt / 2) * k2);
  const StateVec k4 = f(x0 + dt * k3);
  return x0 + (dt / 6) * (k1 + S(2) * k2 + S(2) * k3 + k4);
}

}  // namespace internal

template <typename Scalar>
UnicycleStateT<Scalar> step(const UnicycleStateT<Scalar>& s, const UnicycleInputT<Scalar>& u,
                            Scalar dt, IntegrationMethod method = IntegrationMethod::kRk4) {
  auto deriv = [&u](const Eigen::Matrix<Scalar, 5, 1>& x) {
    return unicycle_dynamics(UnicycleStateT<Scalar>::from_vector(x), u);
  };
  auto next = UnicycleStateT<Scalar>::from_vector(
      internal::fixed_step(s.vector(), deriv, dt, method));
  next.theta = wrap_angle(next.theta);
  return next;
}

template <typename Scalar>
PlanarStateT<Scalar> step(const PlanarStateT<Scalar>& s, const PlanarInputT<Scalar>& u,
                          Scalar dt, IntegrationMethod method = IntegrationMethod::kRk4) {
  auto deriv = [&u](const Eigen::Matrix<Scalar, 4, 1>& x) {
    return planar_dynamics(PlanarStateT<Scalar>::from_vector(x), u);
  };
  return PlanarStateT<Scalar>::from_vector(
      internal::fixed_step(s.vector(), deriv, dt, method));
}

}  // namespace c3bf
