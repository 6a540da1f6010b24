#include "c3bf/verification.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "c3bf/reduced_models.hpp"
#include "c3bf/safety_filter.hpp"

namespace c3bf::verification {
namespace {

using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sampled instances keep |p_rel| = r (1 + margin) and |v_rel| well above the
// degeneracy guard, so every draw evaluates to a defined constraint.
struct HorizontalSample {
  PlanarState state;
  ObstacleState obs;
  PlanarInput u;
};

struct VerticalSample {
  UnicycleState state;
  EgoParams ego;
  ObstacleState obs;
  UnicycleInput u;
};

Vec2d unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

HorizontalSample draw_horizontal(std::mt19937_64& rng, double min_margin) {
  std::uniform_real_distribution<double> pos(-5, 5);
  std::uniform_real_distribution<double> vel(-3, 3);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> radius(0.2, 2.0);
  std::uniform_real_distribution<double> log_margin(std::log(min_margin), std::log(4.0));
  std::uniform_real_distribution<double> rel_speed(0.05, 5.0);
  std::uniform_real_distribution<double> input(-3, 3);

  HorizontalSample s;
  s.state = {pos(rng), pos(rng), vel(rng), vel(rng)};
  s.obs.radius = radius(rng);
  const double dist = s.obs.radius * (1.0 + std::exp(log_margin(rng)));
  const Vec2d ego_pos{s.state.x_p, s.state.z_p};
  const Vec2d ego_vel{s.state.vx, s.state.vz};
  s.obs.center = ego_pos + dist * unit(angle(rng));
  s.obs.velocity = ego_vel + rel_speed(rng) * unit(angle(rng));
  s.u = {input(rng), input(rng)};
  return s;
}

VerticalSample draw_vertical(std::mt19937_64& rng, double min_margin) {
  std::uniform_real_distribution<double> pos(-5, 5);
  std::uniform_real_distribution<double> speed(-2, 2);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> offset(0.05, 0.5);
  std::uniform_real_distribution<double> radius(0.2, 2.0);
  std::uniform_real_distribution<double> log_margin(std::log(min_margin), std::log(4.0));
  std::uniform_real_distribution<double> rel_speed(0.05, 5.0);
  std::uniform_real_distribution<double> input(-3, 3);

  VerticalSample s;
  s.state = {pos(rng), pos(rng), angle(rng), speed(rng), speed(rng)};
  s.ego.l = offset(rng);
  s.ego.width = 0;
  s.obs.radius = radius(rng);
  const double c = std::cos(s.state.theta);
  const double sn = std::sin(s.state.theta);
  const Vec2d body_center{s.state.x_p + s.ego.l * c, s.state.y_p + s.ego.l * sn};
  const Vec2d body_velocity{s.state.v * c - s.ego.l * s.state.omega * sn,
                            s.state.v * sn + s.ego.l * s.state.omega * c};
  const double dist = s.obs.radius * (1.0 + std::exp(log_margin(rng)));
  s.obs.center = body_center + dist * unit(angle(rng));
  s.obs.velocity = body_velocity + rel_speed(rng) * unit(angle(rng));
  s.u = {input(rng), input(rng)};
  return s;
}

ordered_json to_json(const PlanarState& s) {
  return {{"x", s.x_p}, {"z", s.z_p}, {"vx", s.vx}, {"vz", s.vz}};
}

ordered_json to_json(const UnicycleState& s) {
  return {{"x", s.x_p}, {"y", s.y_p}, {"theta", s.theta}, {"v", s.v}, {"omega", s.omega}};
}

ordered_json to_json(const ObstacleState& o) {
  return {{"center", {o.center.x(), o.center.y()}},
          {"velocity", {o.velocity.x(), o.velocity.y()}},
          {"radius", o.radius}};
}

void record_failure(SuiteResult& result, ordered_json detail) {
  ++result.failures;
  if (result.counterexample.empty()) {
    detail["suite"] = result.name;
    result.counterexample = detail.dump();
  }
}

ConstraintEval apply_tamper(const ConstraintTamper& tamper, const ConstraintEval& c) {
  return tamper ? tamper(c) : c;
}

// Relative error with a floor tied to the derivative's own scale, so samples
// where the true derivative happens to cross zero do not divide by zero.
double relative_error(double analytic, double fd, double scale) {
  const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-6 * scale});
  return std::abs(analytic - fd) / denom;
}

}  // namespace

SuiteResult check_lgh_nonvanishing_horizontal(long long samples, std::uint64_t seed) {
  SuiteResult result{.name = "lgh_nonvanishing_horizontal",
                     .samples = samples,
                     .worst = kInf,
                     .worst_description = "min |L_g h|"};
  std::mt19937_64 rng(seed);
  const ClassK k{1.0};
  for (long long i = 0; i < samples; ++i) {
    const HorizontalSample s = draw_horizontal(rng, 1e-4);
    const auto c = eval_constraint_horizontal(s.state, s.obs, k, s.u);
    const double norm = c ? c->lg_h.norm() : 0.0;
    result.worst = std::min(result.worst, norm);
    if (!c || norm <= 1e-12) {
      record_failure(result, {{"index", i},
                              {"state", to_json(s.state)},
                              {"obstacle", to_json(s.obs)},
                              {"lgh_norm", norm}});
    }
  }
  return result;
}

SuiteResult check_lgh_nonvanishing_vertical(long long samples, std::uint64_t seed) {
  SuiteResult result{.name = "lgh_nonvanishing_vertical",
                     .samples = samples,
                     .worst = kInf,
                     .worst_description = "min |L_g h|"};
  std::mt19937_64 rng(seed);
  const ClassK k{1.0};
  for (long long i = 0; i < samples; ++i) {
    const VerticalSample s = draw_vertical(rng, 1e-4);
    const auto c = eval_constraint_vertical(s.state, s.ego, s.obs, k, s.u);
    const double norm = c ? c->lg_h.norm() : 0.0;
    result.worst = std::min(result.worst, norm);
    if (!c || norm <= 1e-12) {
      record_failure(result, {{"index", i},
                              {"state", to_json(s.state)},
                              {"ego_l", s.ego.l},
                              {"obstacle", to_json(s.obs)},
                              {"lgh_norm", norm}});
    }
  }
  return result;
}

SuiteResult check_hdot_finite_difference_horizontal(long long samples, std::uint64_t seed,
                                                    const ConstraintTamper& tamper) {
  SuiteResult result{.name = "hdot_fd_horizontal",
                     .samples = samples,
                     .worst = 0,
                     .worst_description = "max relative error"};
  std::mt19937_64 rng(seed);
  const ClassK k{1.0};
  const double dt = 1e-6;
  for (long long i = 0; i < samples; ++i) {
    const HorizontalSample s = draw_horizontal(rng, 0.05);
    const PlanarState s1 = step(s.state, s.u, dt);
    const PlanarState s2 = step(s1, s.u, dt);
    ObstacleState o1 = s.obs;
    o1.center += dt * s.obs.velocity;
    ObstacleState o2 = s.obs;
    o2.center += 2 * dt * s.obs.velocity;

    const auto mid = eval_constraint_horizontal(s1, o1, k, s.u);
    const ConstraintEval c = apply_tamper(tamper, *mid);
    const Vec2d u_vec{s.u.accel_x, s.u.accel_z};
    const double analytic = c.lf_h + c.lg_h.dot(u_vec);

    const auto [p0, v0] = relative_state_horizontal(s.state, s.obs);
    const auto [p2, v2] = relative_state_horizontal(s2, o2);
    const double fd =
        (h_value(p2, v2, s.obs.radius) - h_value(p0, v0, s.obs.radius)) / (2 * dt);

    const double scale = 1 + std::abs(c.lf_h) + c.lg_h.norm() * u_vec.norm();
    const double rel = relative_error(analytic, fd, scale);
    result.worst = std::max(result.worst, rel);
    if (!(rel < 1e-4)) {
      record_failure(result, {{"index", i},
                              {"state", to_json(s.state)},
                              {"obstacle", to_json(s.obs)},
                              {"u", {s.u.accel_x, s.u.accel_z}},
                              {"analytic", analytic},
                              {"finite_difference", fd},
                              {"relative_error", rel}});
    }
  }
  return result;
}

SuiteResult check_hdot_finite_difference_vertical(long long samples, std::uint64_t seed,
                                                  const ConstraintTamper& tamper) {
  SuiteResult result{.name = "hdot_fd_vertical",
                     .samples = samples,
                     .worst = 0,
                     .worst_description = "max relative error"};
  std::mt19937_64 rng(seed);
  const ClassK k{1.0};
  const double dt = 1e-6;
  for (long long i = 0; i < samples; ++i) {
    const VerticalSample s = draw_vertical(rng, 0.05);
    const UnicycleState s1 = step(s.state, s.u, dt);
    const UnicycleState s2 = step(s1, s.u, dt);
    ObstacleState o1 = s.obs;
    o1.center += dt * s.obs.velocity;
    ObstacleState o2 = s.obs;
    o2.center += 2 * dt * s.obs.velocity;

    const auto mid = eval_constraint_vertical(s1, s.ego, o1, k, s.u);
    const ConstraintEval c = apply_tamper(tamper, *mid);
    const Vec2d u_vec{s.u.accel, s.u.alpha};
    const double analytic = c.lf_h + c.lg_h.dot(u_vec);

    const auto [p0, v0] = relative_state_vertical(s.state, s.ego, s.obs);
    const auto [p2, v2] = relative_state_vertical(s2, s.ego, o2);
    const double fd =
        (h_value(p2, v2, s.obs.radius) - h_value(p0, v0, s.obs.radius)) / (2 * dt);

    const double scale = 1 + std::abs(c.lf_h) + c.lg_h.norm() * u_vec.norm();
    const double rel = relative_error(analytic, fd, scale);
    result.worst = std::max(result.worst, rel);
    if (!(rel < 1e-4)) {
      record_failure(result, {{"index", i},
                              {"state", to_json(s.state)},
                              {"ego_l", s.ego.l},
                              {"obstacle", to_json(s.obs)},
                              {"u", {s.u.accel, s.u.alpha}},
                              {"analytic", analytic},
                              {"finite_difference", fd},
                              {"relative_error", rel}});
    }
  }
  return result;
}

namespace {

// Random single-constraint instance with a prescribed psi; lf_h is back-solved
// so the instance is internally consistent.
ConstraintEval synthetic_constraint(std::mt19937_64& rng, const Vec2d& u_ref, double gamma,
                                    double psi) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> row_norm(0.05, 5.0);
  std::uniform_real_distribution<double> h_range(-2.0, 5.0);
  ConstraintEval c;
  c.lg_h = row_norm(rng) * unit(angle(rng));
  c.h = h_range(rng);
  c.psi = psi;
  c.lf_h = psi - c.lg_h.dot(u_ref) - gamma * c.h;
  return c;
}

Vec2d draw_u_ref(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> input(-3, 3);
  return {input(rng), input(rng)};
}

}  // namespace

SuiteResult check_qp_matches_closed_form(long long samples, std::uint64_t seed) {
  SuiteResult result{.name = "qp_closed_form_equivalence",
                     .samples = samples,
                     .worst = 0,
                     .worst_description = "max(component deviation, boundary residual)"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_range(0.1, 3.0);
  std::uniform_real_distribution<double> psi_range(-5.0, 5.0);
  for (long long i = 0; i < samples; ++i) {
    const Vec2d u_ref = draw_u_ref(rng);
    const double gamma = gamma_range(rng);
    const ConstraintEval c = synthetic_constraint(rng, u_ref, gamma, psi_range(rng));

    const FilterResult closed = filter_closed_form(u_ref, c);
    const FilterResult qp = filter_qp(u_ref, std::vector<ConstraintEval>{c});

    const double deviation = (closed.u_safe - qp.u_safe).cwiseAbs().maxCoeff();
    double residual = 0;
    if (closed.active) {
      residual = std::abs(c.lf_h + c.lg_h.dot(qp.u_safe) + gamma * c.h);
    }
    const double metric = std::max(deviation, residual);
    result.worst = std::max(result.worst, metric);
    if (metric > 1e-8 || closed.active != qp.active) {
      record_failure(result, {{"index", i},
                              {"u_ref", {u_ref.x(), u_ref.y()}},
                              {"lg_h", {c.lg_h.x(), c.lg_h.y()}},
                              {"lf_h", c.lf_h},
                              {"h", c.h},
                              {"gamma", gamma},
                              {"psi", c.psi},
                              {"deviation", deviation},
                              {"boundary_residual", residual}});
    }
  }
  return result;
}

SuiteResult check_switching_continuity(long long samples, std::uint64_t seed) {
  SuiteResult result{.name = "switching_continuity",
                     .samples = samples,
                     .worst = 0,
                     .worst_description = "max correction for psi in [-1e-6, 0)"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_range(0.1, 3.0);
  std::uniform_real_distribution<double> slack_psi(0.0, 5.0);
  std::uniform_real_distribution<double> boundary_psi(-1e-6, 0.0);
  for (long long i = 0; i < samples; ++i) {
    const Vec2d u_ref = draw_u_ref(rng);
    const double gamma = gamma_range(rng);
    const bool below = (i % 2) == 0;
    const double psi = below ? boundary_psi(rng) : slack_psi(rng);
    const ConstraintEval c = synthetic_constraint(rng, u_ref, gamma, psi);
    const FilterResult filtered = filter_closed_form(u_ref, c);
    const double correction = (filtered.u_safe - u_ref).norm();
    bool bad = false;
    if (psi >= 0) {
      bad = correction != 0;
    } else {
      result.worst = std::max(result.worst, correction);
      bad = !(correction < 1e-4);
    }
    if (bad) {
      record_failure(result, {{"index", i},
                              {"psi", psi},
                              {"lg_h", {c.lg_h.x(), c.lg_h.y()}},
                              {"correction", correction}});
    }
  }
  return result;
}

SuiteResult check_correction_direction(long long samples, std::uint64_t seed) {
  SuiteResult result{.name = "correction_direction",
                     .samples = samples,
                     .worst = 0,
                     .worst_description = "max |sin(angle)| between correction and L_g h"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_range(0.1, 3.0);
  std::uniform_real_distribution<double> active_psi(-5.0, -1e-3);
  for (long long i = 0; i < samples; ++i) {
    const Vec2d u_ref = draw_u_ref(rng);
    const double gamma = gamma_range(rng);
    const ConstraintEval c = synthetic_constraint(rng, u_ref, gamma, active_psi(rng));
    double metric = 0;
    for (const FilterResult& filtered :
         {filter_closed_form(u_ref, c), filter_qp(u_ref, std::vector<ConstraintEval>{c})}) {
      const Vec2d delta = filtered.u_safe - u_ref;
      const double cross = std::abs(delta.x() * c.lg_h.y() - delta.y() * c.lg_h.x());
      metric = std::max(metric, cross / (delta.norm() * c.lg_h.norm()));
    }
    result.worst = std::max(result.worst, metric);
    if (!(metric <= 1e-8)) {
      record_failure(result, {{"index", i},
                              {"psi", c.psi},
                              {"lg_h", {c.lg_h.x(), c.lg_h.y()}},
                              {"sin_angle", metric}});
    }
  }
  return result;
}

std::vector<SuiteResult> run_all(long long samples, std::uint64_t seed,
                                 const ConstraintTamper& tamper) {
  std::vector<SuiteResult> results;
  results.push_back(check_lgh_nonvanishing_horizontal(10 * samples, seed + 1));
  results.push_back(check_lgh_nonvanishing_vertical(10 * samples, seed + 2));
  results.push_back(check_hdot_finite_difference_horizontal(samples, seed + 3, tamper));
  results.push_back(check_hdot_finite_difference_vertical(samples, seed + 4, tamper));
  results.push_back(check_qp_matches_closed_form(samples, seed + 5));
  results.push_back(check_switching_continuity(samples, seed + 6));
  results.push_back(check_correction_direction(samples, seed + 7));
  return results;
}

}  // namespace c3bf::verification
