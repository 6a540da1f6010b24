#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "c3bf/cbf_constraints.hpp"
#include "c3bf/reduced_models.hpp"
#include "c3bf/safety_filter.hpp"

// Closed-loop scenario simulation: a PD reference controller tracking constant
// targets, per-step constraint evaluation and filtering, collision detection,
// and trajectory logging.

namespace c3bf {

enum class ScenarioMode { kVertical, kHorizontal };

struct PdGains {
  double kp{0};
  double kd{0};

  bool operator==(const PdGains&) const = default;
};

// Vertical mode: unicycle in the x-y plane tracking constant (v*, omega*).
// Both tracked states are rates, so proportional feedback already closes a
// first-order loop on each channel.
struct VerticalSetup {
  UnicycleState initial;
  double target_v{0};
  double target_omega{0};
  double speed_gain{1};  // forward acceleration per unit speed error
  double yaw_gain{1};    // yaw acceleration per unit yaw-rate error
};

// Horizontal mode: x-z double integrator tracking speed vx* and holding a
// nominal height z*. Height is double-integrated, hence the PD pair.
struct HorizontalSetup {
  PlanarState initial;
  double target_vx{0};
  double nominal_height{0};
  double speed_gain{1};
  PdGains height_gains;  // kp on height error, kd damping on vertical rate
};

// Declarative obstacle: axis-aligned ellipse with a constant-velocity center.
struct ObstacleSpec {
  Vec2d center{Vec2d::Zero()};
  Vec2d velocity{Vec2d::Zero()};
  double semi_axis_1{0.5};
  double semi_axis_2{0.5};
};

struct ScenarioConfig {
  int schema_version{1};
  EgoParams ego;
  std::variant<VerticalSetup, HorizontalSetup> setup;
  std::vector<ObstacleSpec> obstacles;  // may be empty (unconstrained tracking)
  double gamma{1.0};
  double dt{0.01};
  double duration{10.0};
  std::optional<InputBounds> bounds;
  std::uint64_t seed{0};
  IntegrationMethod integrator{IntegrationMethod::kRk4};

  ScenarioMode mode() const {
    return std::holds_alternative<VerticalSetup>(setup) ? ScenarioMode::kVertical
                                                        : ScenarioMode::kHorizontal;
  }
};

// Tracking of the constant targets; the height channel is PD, the rate
// channels are proportional.
UnicycleInput reference_controller(const UnicycleState& state, const VerticalSetup& setup);
PlanarInput reference_controller(const PlanarState& state, const HorizontalSetup& setup);

struct CollisionCheck {
  bool collided{false};
  int obstacle_index{-1};  // first offending obstacle when collided
};

// Contact test against the effective discs; the boundary |p_rel| == r counts.
CollisionCheck detect_collision(const UnicycleState& state, const EgoParams& ego,
                                const std::vector<ObstacleState>& obstacles);
CollisionCheck detect_collision(const PlanarState& state,
                                const std::vector<ObstacleState>& obstacles);

// Per-step, per-obstacle log entry. h and psi are NaN on the step where that
// obstacle's penetration guard fired (the cone is undefined there).
struct ObstacleSample {
  double h{0};
  double psi{0};
  double distance{0};       // |p_rel|
  bool filter_active{false};  // this constraint demanded filtering (psi < 0)
  bool degenerate{false};     // |v_rel| below the degeneracy threshold
};

struct TrajectoryRecord {
  double t{0};
  Eigen::VectorXd state;  // (x, y, theta, v, omega) vertical; (x, z, vx, vz) horizontal
  Vec2d u_ref{Vec2d::Zero()};
  Vec2d u_safe{Vec2d::Zero()};
  std::vector<ObstacleSample> obstacles;
  bool filter_active{false};  // the applied input differs from the reference
  bool violation{false};
};

struct RunSummary {
  bool completed{false};  // false when the run terminated on a violation
  long long steps{0};
  long long violation_count{0};
  long long collision_count{0};
  double min_h{0};         // over time and obstacles; +inf when never evaluated
  double min_distance{0};  // over time and obstacles; +inf when never evaluated
  std::vector<double> min_h_per_obstacle;
  std::vector<double> min_distance_per_obstacle;
  double filter_active_fraction{0};
  std::string message;  // diagnosis when not completed
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  RunSummary summary;
};

// Resolve an obstacle spec against the ego width: effective radius and the
// center at scenario time zero.
ObstacleState resolve_obstacle(const ObstacleSpec& spec, const EgoParams& ego);

// Simulate the closed loop. A penetration event is recorded and terminates the
// run with a failed summary; an infeasible constraint system propagates as
// InfeasibleError. Runs are deterministic functions of the config.
RunResult run(const ScenarioConfig& config);

}  // namespace c3bf
