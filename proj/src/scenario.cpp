#include "c3bf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "c3bf/errors.hpp"

namespace c3bf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<ObstacleState> obstacles_at(const std::vector<ObstacleState>& initial, double t) {
  std::vector<ObstacleState> out = initial;
  for (auto& obs : out) obs.center += t * obs.velocity;
  return out;
}


struct StepEval {
  std::vector<ObstacleSample> samples;
  std::vector<ConstraintEval> live;  // non-degenerate constraints, filter input
  bool violation{false};
  int violating_obstacle{-1};
  double violating_distance{0};
};

// Evaluates every obstacle constraint at the current state. A penetration
// guard firing marks the step as a violation instead of propagating.
template <typename State, typename Evaluator, typename RelState>
StepEval evaluate_step(const State& state, const std::vector<ObstacleState>& obstacles,
                       const Evaluator& eval, const RelState& rel, const ClassK& k,
                       const Vec2d& u_ref) {
  StepEval out;
  out.samples.reserve(obstacles.size());
  for (int i = 0; i < static_cast<int>(obstacles.size()); ++i) {
    const auto [p_rel, v_rel] = rel(state, obstacles[i]);
    ObstacleSample sample;
    sample.distance = p_rel.norm();
    try {
      if (auto c = eval(state, obstacles[i], k, u_ref)) {
        sample.h = c->h;
        sample.psi = c->psi;
        sample.filter_active = c->psi < 0;
        out.live.push_back(*c);
      } else {
        sample.h = h_value(p_rel, v_rel, obstacles[i].radius);
        sample.psi = kNaN;
        sample.degenerate = true;
      }
    } catch (const PenetrationError&) {
      sample.h = kNaN;
      sample.psi = kNaN;
      if (!out.violation) {
        out.violation = true;
        out.violating_obstacle = i;
        out.violating_distance = sample.distance;
      }
    }
    out.samples.push_back(sample);
  }
  return out;
}

FilterResult apply_filter(const Vec2d& u_ref, const std::vector<ConstraintEval>& live,
                          const std::optional<InputBounds>& bounds) {
  if (live.empty()) {
    FilterResult r;
    r.u_safe = u_ref;
    if (bounds) {
      for (int axis = 0; axis < 2; ++axis)
        r.u_safe[axis] = std::min(std::max(r.u_safe[axis], bounds->lower[axis]),
                                  bounds->upper[axis]);
      r.active = (r.u_safe.array() != u_ref.array()).any();
    }
    return r;
  }
  if (live.size() == 1 && !bounds) return filter_closed_form(u_ref, live.front());
  return filter_qp(u_ref, live, bounds ? *bounds : InputBounds{});
}

}  // namespace

UnicycleInput reference_controller(const UnicycleState& state, const VerticalSetup& setup) {
  return {setup.speed_gain * (setup.target_v - state.v),
          setup.yaw_gain * (setup.target_omega - state.omega)};
}

PlanarInput reference_controller(const PlanarState& state, const HorizontalSetup& setup) {
  return {setup.speed_gain * (setup.target_vx - state.vx),
          setup.height_gains.kp * (setup.nominal_height - state.z_p) -
              setup.height_gains.kd * state.vz};
}

CollisionCheck detect_collision(const UnicycleState& state, const EgoParams& ego,
                                const std::vector<ObstacleState>& obstacles) {
  for (int i = 0; i < static_cast<int>(obstacles.size()); ++i) {
    const auto [p_rel, v_rel] = relative_state_vertical(state, ego, obstacles[i]);
    if (p_rel.norm() <= obstacles[i].radius) return {true, i};
  }
  return {false, -1};
}

CollisionCheck detect_collision(const PlanarState& state,
                                const std::vector<ObstacleState>& obstacles) {
  for (int i = 0; i < static_cast<int>(obstacles.size()); ++i) {
    const auto [p_rel, v_rel] = relative_state_horizontal(state, obstacles[i]);
    if (p_rel.norm() <= obstacles[i].radius) return {true, i};
  }
  return {false, -1};
}

ObstacleState resolve_obstacle(const ObstacleSpec& spec, const EgoParams& ego) {
  ObstacleState out;
  out.center = spec.center;
  out.velocity = spec.velocity;
  out.radius = effective_radius(spec.semi_axis_1, spec.semi_axis_2, ego.width);
  return out;
}

RunResult run(const ScenarioConfig& config) {
  if (config.dt <= 0) throw GeometryError("run: dt must be positive");
  if (config.duration < 0) throw GeometryError("run: duration must be nonnegative");

  std::vector<ObstacleState> obstacles0;
  obstacles0.reserve(config.obstacles.size());
  for (const auto& spec : config.obstacles) obstacles0.push_back(resolve_obstacle(spec, config.ego));

  const ClassK k{config.gamma};
  const long long n_steps = std::llround(config.duration / config.dt);

  RunResult result;
  result.records.reserve(n_steps + 1);
  RunSummary& summary = result.summary;
  summary.min_h = kInf;
  summary.min_distance = kInf;
  summary.min_h_per_obstacle.assign(obstacles0.size(), kInf);
  summary.min_distance_per_obstacle.assign(obstacles0.size(), kInf);

  const bool vertical = config.mode() == ScenarioMode::kVertical;
  UnicycleState us = vertical ? std::get<VerticalSetup>(config.setup).initial : UnicycleState{};
  PlanarState ps = vertical ? PlanarState{} : std::get<HorizontalSetup>(config.setup).initial;

  long long active_steps = 0;
  for (long long step_index = 0; step_index <= n_steps; ++step_index) {
    const double t = step_index * config.dt;
    const auto obstacles = obstacles_at(obstacles0, t);

    TrajectoryRecord record;
    record.t = t;
    StepEval eval;
    if (vertical) {
      record.state = us.vector();
      const UnicycleInput u = reference_controller(us, std::get<VerticalSetup>(config.setup));
      record.u_ref = Vec2d(u.accel, u.alpha);
      eval = evaluate_step(
          us, obstacles,
          [&](const UnicycleState& s, const ObstacleState& o, const ClassK& kk, const Vec2d& ur) {
            return eval_constraint_vertical(s, config.ego, o, kk, UnicycleInput{ur.x(), ur.y()});
          },
          [&](const UnicycleState& s, const ObstacleState& o) {
            return relative_state_vertical(s, config.ego, o);
          },
          k, record.u_ref);
    } else {
      record.state = ps.vector();
      const PlanarInput u = reference_controller(ps, std::get<HorizontalSetup>(config.setup));
      record.u_ref = Vec2d(u.accel_x, u.accel_z);
      eval = evaluate_step(
          ps, obstacles,
          [&](const PlanarState& s, const ObstacleState& o, const ClassK& kk, const Vec2d& ur) {
            return eval_constraint_horizontal(s, o, kk, PlanarInput{ur.x(), ur.y()});
          },
          [&](const PlanarState& s, const ObstacleState& o) {
            return relative_state_horizontal(s, o);
          },
          k, record.u_ref);
    }

    record.obstacles = std::move(eval.samples);
    for (std::size_t i = 0; i < record.obstacles.size(); ++i) {
      const ObstacleSample& s = record.obstacles[i];
      if (std::isfinite(s.h) && s.h < summary.min_h_per_obstacle[i])
        summary.min_h_per_obstacle[i] = s.h;
      if (s.distance < summary.min_distance_per_obstacle[i])
        summary.min_distance_per_obstacle[i] = s.distance;
      summary.min_h = std::min(summary.min_h, summary.min_h_per_obstacle[i]);
      summary.min_distance = std::min(summary.min_distance, summary.min_distance_per_obstacle[i]);
    }

    if (eval.violation) {
      record.u_safe = record.u_ref;
      record.violation = true;
      result.records.push_back(std::move(record));
      ++summary.violation_count;
      if (eval.violating_distance <= obstacles[eval.violating_obstacle].radius)
        ++summary.collision_count;
      summary.steps = static_cast<long long>(result.records.size());
      summary.filter_active_fraction = static_cast<double>(active_steps) / summary.steps;
      std::ostringstream msg;
      msg << "obstacle " << eval.violating_obstacle << " penetrated the safety margin at t=" << t
          << " (distance " << eval.violating_distance << ")";
      summary.message = msg.str();
      return result;
    }

    const FilterResult filtered = apply_filter(record.u_ref, eval.live, config.bounds);
    record.u_safe = filtered.u_safe;
    record.filter_active = filtered.active;
    if (filtered.active) ++active_steps;
    result.records.push_back(std::move(record));

    if (step_index < n_steps) {
      if (vertical) {
        us = step(us, UnicycleInput{filtered.u_safe.x(), filtered.u_safe.y()}, config.dt,
                  config.integrator);
      } else {
        ps = step(ps, PlanarInput{filtered.u_safe.x(), filtered.u_safe.y()}, config.dt,
                  config.integrator);
      }
    }
  }

  summary.completed = true;
  summary.steps = static_cast<long long>(result.records.size());
  summary.filter_active_fraction = static_cast<double>(active_steps) / summary.steps;
  return result;
}

}  // namespace c3bf
