// End-to-end acceptance checks: every release-gating property in one binary,
// one test (and one pass/fail line) per property, with the measured margins
// printed so regressions show up in the log even while still passing.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <variant>

#include "c3bf/cone_geometry.hpp"
#include "c3bf/scenario.hpp"
#include "c3bf/scenario_io.hpp"
#include "c3bf/verification.hpp"

using namespace c3bf;
namespace verif = c3bf::verification;

namespace {

ScenarioConfig bundled(const char* name) {
  return load_config(std::filesystem::path(C3BF_SCENARIO_DIR) / name);
}

void report(const verif::SuiteResult& r) {
  std::printf("  %-28s samples=%lld failures=%lld %s = %.3g\n", r.name.c_str(), r.samples,
              r.failures, r.worst_description.c_str(), r.worst);
}

}  // namespace

// Every bundled scenario stays on the safe side of the barrier at each tested
// step size, with no collisions and bounded wall time per run.
TEST(Acceptance, ForwardInvarianceAcrossStepSizes) {
  for (const char* name :
       {"static_vertical.json", "moving_vertical.json", "overhead_horizontal.json"}) {
    for (const double dt : {0.01, 0.005, 0.002}) {
      ScenarioConfig cfg = bundled(name);
      cfg.dt = dt;
      const auto start = std::chrono::steady_clock::now();
      const RunResult result = run(cfg);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("  %-26s dt=%.3f min_h=%.4g min_distance=%.4g wall=%.2fs\n", name, dt,
                  result.summary.min_h, result.summary.min_distance, seconds);
      EXPECT_TRUE(result.summary.completed) << name << " dt=" << dt;
      EXPECT_EQ(result.summary.violation_count, 0) << name << " dt=" << dt;
      EXPECT_EQ(result.summary.collision_count, 0) << name << " dt=" << dt;
      EXPECT_GE(result.summary.min_h, -1e-3) << name << " dt=" << dt;
      EXPECT_LT(seconds, 5.0) << name << " dt=" << dt;
    }
  }
}

// The input row of the constraint stays bounded away from zero over a large
// randomized sample of reachable states, in both obstacle geometries.
TEST(Acceptance, InputRowStaysNonvanishing) {
  const auto horizontal = verif::check_lgh_nonvanishing_horizontal(100000, 11);
  const auto vertical = verif::check_lgh_nonvanishing_vertical(100000, 12);
  report(horizontal);
  report(vertical);
  EXPECT_EQ(horizontal.failures, 0) << horizontal.counterexample;
  EXPECT_EQ(vertical.failures, 0) << vertical.counterexample;
  EXPECT_GT(horizontal.worst, 0.0);
  EXPECT_GT(vertical.worst, 0.0);
}

// The analytic barrier derivative agrees with a finite-difference oracle along
// simulated flows to a relative error under 1e-4.
TEST(Acceptance, DerivativeMatchesFiniteDifferenceOracle) {
  const auto horizontal = verif::check_hdot_finite_difference_horizontal(10000, 21);
  const auto vertical = verif::check_hdot_finite_difference_vertical(10000, 22);
  report(horizontal);
  report(vertical);
  EXPECT_EQ(horizontal.failures, 0) << horizontal.counterexample;
  EXPECT_EQ(vertical.failures, 0) << vertical.counterexample;
  EXPECT_LT(horizontal.worst, 1e-4);
  EXPECT_LT(vertical.worst, 1e-4);
}

// On single-constraint problems the QP path reproduces the closed-form
// switching law to 1e-8 per component, and active solutions land exactly on
// the constraint boundary.
TEST(Acceptance, ProjectionMatchesSwitchingLaw) {
  const auto r = verif::check_qp_matches_closed_form(10000, 31);
  report(r);
  EXPECT_EQ(r.failures, 0) << r.counterexample;
  EXPECT_LE(r.worst, 1e-8);
}

// The filter hands the reference through untouched on the slack side and its
// correction shrinks to zero with the constraint margin: no jump at psi = 0.
TEST(Acceptance, CorrectionsVanishAtTheSwitchingBoundary) {
  const auto r = verif::check_switching_continuity(10000, 41);
  report(r);
  EXPECT_EQ(r.failures, 0) << r.counterexample;
  EXPECT_LT(r.worst, 1e-4);
}

// The vertical scenarios steer around their obstacles (never inside the
// combined radius, visible lateral excursion, forward progress past the
// obstacle); the overhead scenario ducks under the beam and then settles back
// to its nominal height within 1% inside five seconds of clearing it.
TEST(Acceptance, ScenariosResolveAsIntended) {
  for (const char* name : {"static_vertical.json", "moving_vertical.json"}) {
    const ScenarioConfig cfg = bundled(name);
    const RunResult result = run(cfg);
    const ObstacleState obstacle = resolve_obstacle(cfg.obstacles[0], cfg.ego);
    ASSERT_TRUE(result.summary.completed) << name;
    EXPECT_GE(result.summary.min_distance, obstacle.radius) << name;

    double max_lateral = 0;
    for (const auto& rec : result.records) max_lateral = std::max(max_lateral, std::abs(rec.state[1]));
    const double final_x = result.records.back().state[0];
    std::printf("  %-26s min_distance=%.4g max|y|=%.3g final_x=%.3g\n", name,
                result.summary.min_distance, max_lateral, final_x);
    EXPECT_GT(max_lateral, 0.3) << name;
    EXPECT_GT(final_x, cfg.obstacles[0].center.x() + obstacle.radius) << name;
  }

  const ScenarioConfig cfg = bundled("overhead_horizontal.json");
  const RunResult result = run(cfg);
  ASSERT_TRUE(result.summary.completed);
  const auto& setup = std::get<HorizontalSetup>(cfg.setup);
  const ObstacleState obstacle = resolve_obstacle(cfg.obstacles[0], cfg.ego);
  const double z_star = setup.nominal_height;

  // Duck phase: while passing under the obstacle footprint the body stays
  // below nominal height.
  long long duck_samples = 0;
  double duck_max_z = -std::numeric_limits<double>::infinity();
  double clearance_time = -1;
  for (const auto& rec : result.records) {
    const double x = rec.state[0];
    const double z = rec.state[1];
    if (std::abs(x - cfg.obstacles[0].center.x()) <= cfg.obstacles[0].semi_axis_1) {
      ++duck_samples;
      duck_max_z = std::max(duck_max_z, z);
    }
    if (clearance_time < 0 && x > cfg.obstacles[0].center.x() + obstacle.radius) {
      clearance_time = rec.t;
    }
  }
  ASSERT_GT(duck_samples, 0);
  ASSERT_GE(clearance_time, 0.0);
  EXPECT_LT(duck_max_z, z_star);

  // Recovery phase: height back within 1% of nominal at most five seconds
  // after clearing the obstacle, and it stays there.
  double recovery_max_err = 0;
  long long tail_samples = 0;
  for (const auto& rec : result.records) {
    if (rec.t < clearance_time + 5.0) continue;
    ++tail_samples;
    recovery_max_err = std::max(recovery_max_err, std::abs(rec.state[1] - z_star));
  }
  ASSERT_GT(tail_samples, 0);
  std::printf("  overhead_horizontal.json   duck_max_z=%.4g clearance_t=%.2f tail_|z-z*|=%.3g\n",
              duck_max_z, clearance_time, recovery_max_err);
  EXPECT_LT(recovery_max_err, 0.01 * z_star);
}

// With no obstacles the filter is exactly inert, and whenever it does act the
// correction is parallel to the constraint's input row.
TEST(Acceptance, FilterInertWithoutObstacles) {
  ScenarioConfig cfg = bundled("static_vertical.json");
  cfg.obstacles.clear();
  const RunResult result = run(cfg);
  ASSERT_TRUE(result.summary.completed);
  EXPECT_EQ(result.summary.filter_active_fraction, 0.0);
  for (const auto& rec : result.records) {
    EXPECT_EQ(rec.u_safe.x(), rec.u_ref.x());
    EXPECT_EQ(rec.u_safe.y(), rec.u_ref.y());
    EXPECT_FALSE(rec.filter_active);
  }

  const auto direction = verif::check_correction_direction(10000, 51);
  report(direction);
  EXPECT_EQ(direction.failures, 0) << direction.counterexample;
  EXPECT_LE(direction.worst, 1e-8);
}
