#include "c3bf/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "c3bf/errors.hpp"
#include "c3bf/scenario_io.hpp"

using namespace c3bf;

namespace {

ScenarioConfig vertical_base() {
  ScenarioConfig cfg;
  VerticalSetup setup;
  setup.initial = UnicycleState{0, 0, 0.3, 0.8, 0};
  setup.target_v = 1.0;
  setup.target_omega = 0.0;
  setup.speed_gain = 2.0;
  setup.yaw_gain = 2.0;
  cfg.setup = setup;
  cfg.ego = EgoParams{0.2, 0.4};
  cfg.dt = 0.01;
  cfg.duration = 5.0;
  return cfg;
}

ScenarioConfig horizontal_base() {
  ScenarioConfig cfg;
  HorizontalSetup setup;
  setup.initial = PlanarState{0, 0.4, 0.5, 0};
  setup.target_vx = 0.8;
  setup.nominal_height = 0.6;
  setup.speed_gain = 2.0;
  setup.height_gains = PdGains{4.0, 4.0};
  cfg.setup = setup;
  cfg.ego = EgoParams{0.0, 0.3};
  cfg.dt = 0.01;
  cfg.duration = 5.0;
  return cfg;
}

}  // namespace

TEST(ReferenceController, VerticalOnTargetIsZero) {
  VerticalSetup setup;
  setup.target_v = 1.2;
  setup.target_omega = -0.4;
  setup.speed_gain = 3.0;
  setup.yaw_gain = 2.0;
  const auto u = reference_controller(UnicycleState{5, -1, 0.7, 1.2, -0.4}, setup);
  EXPECT_EQ(u.accel, 0.0);
  EXPECT_EQ(u.alpha, 0.0);
}

TEST(ReferenceController, ProportionalSpeedLaw) {
  HorizontalSetup setup;
  setup.target_vx = 1.0;
  setup.nominal_height = 0.5;
  setup.speed_gain = 2.0;
  setup.height_gains = PdGains{3.0, 1.0};
  const auto u = reference_controller(PlanarState{0, 0.5, 0, 0}, setup);
  EXPECT_DOUBLE_EQ(u.accel_x, 2.0);
  EXPECT_DOUBLE_EQ(u.accel_z, 0.0);  // on height, at rest
}

TEST(ReferenceController, HeightPdTerms) {
  HorizontalSetup setup;
  setup.target_vx = 0.0;
  setup.nominal_height = 1.0;
  setup.speed_gain = 1.0;
  setup.height_gains = PdGains{4.0, 2.0};
  const auto u = reference_controller(PlanarState{0, 0.5, 0, 0.3}, setup);
  EXPECT_DOUBLE_EQ(u.accel_z, 4.0 * 0.5 - 2.0 * 0.3);
}

TEST(DetectCollision, FarAndBoundary) {
  const EgoParams ego{0.2, 0.4};
  const std::vector<ObstacleState> far = {{Vec2d(10, 0), Vec2d(0, 0), 1.0}};
  EXPECT_FALSE(detect_collision(UnicycleState{0, 0, 0, 1, 0}, ego, far).collided);
  EXPECT_EQ(detect_collision(UnicycleState{0, 0, 0, 1, 0}, ego, far).obstacle_index, -1);

  // |p_rel| == r exactly counts as contact.
  const std::vector<ObstacleState> touching = {{Vec2d(1.2, 0), Vec2d(0, 0), 1.0}};
  const auto hit = detect_collision(UnicycleState{0, 0, 0, 1, 0}, ego, touching);
  EXPECT_TRUE(hit.collided);
  EXPECT_EQ(hit.obstacle_index, 0);

  const std::vector<ObstacleState> overhead = {{Vec2d(0, 1.5), Vec2d(0, 0), 1.0}};
  EXPECT_TRUE(detect_collision(PlanarState{0, 0.5, 0, 0}, overhead).collided);
  EXPECT_FALSE(detect_collision(PlanarState{0, 0.4, 0, 0}, overhead).collided);
}

TEST(Run, ObstacleFreeFilterStaysIdle) {
  ScenarioConfig cfg = vertical_base();
  const auto result = run(cfg);
  EXPECT_TRUE(result.summary.completed);
  EXPECT_EQ(result.summary.steps, 501);
  EXPECT_EQ(result.summary.violation_count, 0);
  EXPECT_EQ(result.summary.collision_count, 0);
  EXPECT_TRUE(std::isinf(result.summary.min_h));
  EXPECT_TRUE(std::isinf(result.summary.min_distance));
  EXPECT_EQ(result.summary.filter_active_fraction, 0.0);
  for (const auto& rec : result.records) {
    EXPECT_EQ(rec.u_safe.x(), rec.u_ref.x());
    EXPECT_EQ(rec.u_safe.y(), rec.u_ref.y());
    EXPECT_FALSE(rec.filter_active);
    EXPECT_TRUE(rec.obstacles.empty());
  }
  // Proportional tracking of both rate targets converges over the horizon.
  const auto& final_state = result.records.back().state;
  EXPECT_NEAR(final_state[3], 1.0, 1e-3);
  EXPECT_NEAR(final_state[4], 0.0, 1e-3);
}

TEST(Run, ObstacleFreeHorizontalRegainsHeight) {
  ScenarioConfig cfg = horizontal_base();
  const auto result = run(cfg);
  ASSERT_TRUE(result.summary.completed);
  const auto& final_state = result.records.back().state;
  EXPECT_NEAR(final_state[1], 0.6, 1e-3);
  EXPECT_NEAR(final_state[2], 0.8, 1e-3);
}

TEST(Run, BoundsClampWithoutObstacles) {
  ScenarioConfig cfg = vertical_base();
  std::get<VerticalSetup>(cfg.setup).initial.v = 0.0;
  std::get<VerticalSetup>(cfg.setup).target_v = 5.0;
  InputBounds bounds;
  bounds.lower = Vec2d(-1, -1);
  bounds.upper = Vec2d(1, 1);
  cfg.bounds = bounds;
  cfg.duration = 0.5;
  const auto result = run(cfg);
  ASSERT_TRUE(result.summary.completed);
  const auto& first = result.records.front();
  EXPECT_DOUBLE_EQ(first.u_ref.x(), 10.0);
  EXPECT_DOUBLE_EQ(first.u_safe.x(), 1.0);
  EXPECT_TRUE(first.filter_active);
}

TEST(Run, DeterministicForIdenticalConfig) {
  ScenarioConfig cfg = vertical_base();
  cfg.obstacles.push_back(ObstacleSpec{Vec2d(4, 0.3), Vec2d(0, 0), 0.5, 0.5});
  cfg.duration = 3.0;
  const auto a = run(cfg);
  const auto b = run(cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].t, b.records[i].t);
    EXPECT_TRUE((a.records[i].state.array() == b.records[i].state.array()).all());
    EXPECT_EQ(a.records[i].u_safe.x(), b.records[i].u_safe.x());
    EXPECT_EQ(a.records[i].u_safe.y(), b.records[i].u_safe.y());
  }
  EXPECT_EQ(a.summary.min_h, b.summary.min_h);
  EXPECT_EQ(a.summary.min_distance, b.summary.min_distance);
}

// Shifting the whole scene by a constant offset leaves the interaction
// geometry unchanged up to roundoff.
TEST(Run, TranslationInvariance) {
  ScenarioConfig cfg = vertical_base();
  cfg.obstacles.push_back(ObstacleSpec{Vec2d(4, 0.3), Vec2d(0, 0), 0.5, 0.5});
  cfg.duration = 3.0;
  const auto base = run(cfg);

  const Vec2d offset(10, -5);
  ScenarioConfig shifted = cfg;
  std::get<VerticalSetup>(shifted.setup).initial.x_p += offset.x();
  std::get<VerticalSetup>(shifted.setup).initial.y_p += offset.y();
  shifted.obstacles[0].center += offset;
  const auto moved = run(shifted);

  ASSERT_EQ(base.records.size(), moved.records.size());
  for (std::size_t i = 0; i < base.records.size(); ++i) {
    const auto& ra = base.records[i];
    const auto& rb = moved.records[i];
    EXPECT_NEAR(ra.state[0] + offset.x(), rb.state[0], 1e-9);
    EXPECT_NEAR(ra.state[1] + offset.y(), rb.state[1], 1e-9);
    EXPECT_NEAR(ra.u_safe.x(), rb.u_safe.x(), 1e-9);
    EXPECT_NEAR(ra.u_safe.y(), rb.u_safe.y(), 1e-9);
    ASSERT_EQ(ra.obstacles.size(), rb.obstacles.size());
    EXPECT_NEAR(ra.obstacles[0].h, rb.obstacles[0].h, 1e-9);
  }
}

TEST(Run, PenetratingStartTerminatesWithViolation) {
  ScenarioConfig cfg = vertical_base();
  std::get<VerticalSetup>(cfg.setup).initial = UnicycleState{0, 0, 0, 1, 0};
  cfg.obstacles.push_back(ObstacleSpec{Vec2d(0.5, 0.2), Vec2d(0, 0), 0.5, 0.5});
  const auto result = run(cfg);

  ASSERT_EQ(result.records.size(), 1u);
  const auto& rec = result.records.front();
  EXPECT_TRUE(rec.violation);
  EXPECT_EQ(rec.u_safe.x(), rec.u_ref.x());
  ASSERT_EQ(rec.obstacles.size(), 1u);
  EXPECT_TRUE(std::isnan(rec.obstacles[0].h));
  EXPECT_TRUE(std::isnan(rec.obstacles[0].psi));
  EXPECT_NEAR(rec.obstacles[0].distance, std::sqrt(0.3 * 0.3 + 0.2 * 0.2), 1e-12);

  const auto& s = result.summary;
  EXPECT_FALSE(s.completed);
  EXPECT_EQ(s.steps, 1);
  EXPECT_EQ(s.violation_count, 1);
  EXPECT_EQ(s.collision_count, 1);  // distance is below the effective radius
  EXPECT_NE(s.message.find("obstacle 0 penetrated"), std::string::npos);
  EXPECT_LT(s.min_distance, 0.7);
  EXPECT_TRUE(std::isinf(s.min_h));  // h was never defined
}

TEST(Run, MovingObstacleAdvancesExactly) {
  ScenarioConfig cfg = vertical_base();
  cfg.obstacles.push_back(ObstacleSpec{Vec2d(20, 3), Vec2d(-0.4, 0.2), 0.5, 0.5});
  cfg.duration = 0.5;
  const auto result = run(cfg);
  ASSERT_TRUE(result.summary.completed);

  const ObstacleState resolved = resolve_obstacle(cfg.obstacles[0], cfg.ego);
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    const auto& rec = result.records[k];
    EXPECT_EQ(rec.t, static_cast<double>(k) * cfg.dt);
    ObstacleState at_t = resolved;
    at_t.center += rec.t * resolved.velocity;
    const auto state = UnicycleState::from_vector(Eigen::Matrix<double, 5, 1>(rec.state));
    const auto [p_rel, v_rel] = relative_state_vertical(state, cfg.ego, at_t);
    EXPECT_EQ(p_rel.norm(), rec.obstacles[0].distance);
  }
}

TEST(Run, RejectsBadTimeParameters) {
  ScenarioConfig cfg = vertical_base();
  cfg.dt = 0.0;
  EXPECT_THROW(run(cfg), GeometryError);
  cfg.dt = -0.1;
  EXPECT_THROW(run(cfg), GeometryError);
}

TEST(Run, BundledStaticScenarioPassesTheObstacle) {
  const auto cfg =
      load_config(std::filesystem::path(C3BF_SCENARIO_DIR) / "static_vertical.json");
  const auto result = run(cfg);
  const auto& s = result.summary;
  EXPECT_TRUE(s.completed);
  EXPECT_EQ(s.violation_count, 0);
  EXPECT_EQ(s.collision_count, 0);
  EXPECT_GT(s.min_h, 0.0);
  EXPECT_GE(s.min_distance, 0.7);  // effective radius of the bundled obstacle
  EXPECT_GT(s.filter_active_fraction, 0.01);

  // The robot actually gets past the obstacle rather than stalling.
  EXPECT_GT(result.records.back().state[0], 5.0);

  // Post-run sweep with the collision test: contact-free at every step.
  std::vector<ObstacleState> resolved;
  for (const auto& spec : cfg.obstacles) resolved.push_back(resolve_obstacle(spec, cfg.ego));
  for (const auto& rec : result.records) {
    auto at_t = resolved;
    for (auto& obs : at_t) obs.center += rec.t * obs.velocity;
    const auto state = UnicycleState::from_vector(Eigen::Matrix<double, 5, 1>(rec.state));
    EXPECT_FALSE(detect_collision(state, cfg.ego, at_t).collided);
  }
}
