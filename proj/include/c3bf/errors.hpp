#pragma once

#include <stdexcept>
#include <string>

namespace c3bf {

// Invalid obstacle or ego geometry (nonpositive semi-axis, nonpositive radius).
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// The ego body center is inside the tangent circle of radius r; the collision
// cone is undefined there. Callers treat this as a safety violation, never as
// a value to clamp.
class PenetrationError : public std::runtime_error {
 public:
  PenetrationError(double distance, double radius)
      : std::runtime_error("penetration: |p_rel| = " + std::to_string(distance) +
                           " <= effective radius r = " + std::to_string(radius)),
        distance_(distance),
        radius_(radius) {}

  double distance() const { return distance_; }
  double radius() const { return radius_; }

 private:
  double distance_;
  double radius_;
};

// A constraint with a vanishing input row was handed to the closed-form filter.
class InvalidConstraintError : public std::runtime_error {
 public:
  explicit InvalidConstraintError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent scenario configuration. The message names the
// offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The constraint system admits no input inside the bounds. Carries the index
// of the most violated constraint for diagnosis; never relaxed silently.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(int worst_constraint, double violation)
      : std::runtime_error("safety constraints infeasible; worst constraint #" +
                           std::to_string(worst_constraint) + " violated by " +
                           std::to_string(violation)),
        worst_constraint_(worst_constraint),
        violation_(violation) {}

  int worst_constraint() const { return worst_constraint_; }
  double violation() const { return violation_; }

 private:
  int worst_constraint_;
  double violation_;
};

}  // namespace c3bf
