#include "c3bf/scenario_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "c3bf/errors.hpp"

namespace c3bf {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

const ordered_json& member(const ordered_json& obj, const std::string& path,
                           const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

void expect_object(const ordered_json& j, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(path + "." + key, "unknown field");
  }
}

double get_number(const ordered_json& obj, const std::string& path, const std::string& key) {
  const ordered_json& j = member(obj, path, key);
  if (!j.is_number()) fail(path + "." + key, "expected a number");
  return j.get<double>();
}

double get_number_or(const ordered_json& obj, const std::string& path, const std::string& key,
                     double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, path, key);
}

Vec2d get_vec2(const ordered_json& obj, const std::string& path, const std::string& key) {
  const ordered_json& j = member(obj, path, key);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path + "." + key, "expected an array of two numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

PlanarState parse_planar_state(const ordered_json& j, const std::string& path) {
  expect_object(j, path, {"x", "z", "vx", "vz"});
  PlanarState s;
  s.x_p = get_number(j, path, "x");
  s.z_p = get_number(j, path, "z");
  s.vx = get_number(j, path, "vx");
  s.vz = get_number(j, path, "vz");
  return s;
}

UnicycleState parse_unicycle_state(const ordered_json& j, const std::string& path) {
  expect_object(j, path, {"x", "y", "theta", "v", "omega"});
  UnicycleState s;
  s.x_p = get_number(j, path, "x");
  s.y_p = get_number(j, path, "y");
  s.theta = get_number(j, path, "theta");
  s.v = get_number(j, path, "v");
  s.omega = get_number(j, path, "omega");
  return s;
}

VerticalSetup parse_vertical_setup(const ordered_json& root) {
  VerticalSetup setup;
  setup.initial = parse_unicycle_state(member(root, "config", "initial_state"), "initial_state");
  const ordered_json& target = member(root, "config", "target");
  expect_object(target, "target", {"v", "omega"});
  setup.target_v = get_number(target, "target", "v");
  setup.target_omega = get_number(target, "target", "omega");
  const ordered_json& gains = member(root, "config", "gains");
  expect_object(gains, "gains", {"speed", "yaw_rate"});
  setup.speed_gain = get_number(gains, "gains", "speed");
  setup.yaw_gain = get_number(gains, "gains", "yaw_rate");
  return setup;
}

HorizontalSetup parse_horizontal_setup(const ordered_json& root) {
  HorizontalSetup setup;
  setup.initial = parse_planar_state(member(root, "config", "initial_state"), "initial_state");
  const ordered_json& target = member(root, "config", "target");
  expect_object(target, "target", {"vx", "z"});
  setup.target_vx = get_number(target, "target", "vx");
  setup.nominal_height = get_number(target, "target", "z");
  const ordered_json& gains = member(root, "config", "gains");
  expect_object(gains, "gains", {"speed", "height"});
  setup.speed_gain = get_number(gains, "gains", "speed");
  const ordered_json& height = member(gains, "gains", "height");
  expect_object(height, "gains.height", {"kp", "kd"});
  setup.height_gains.kp = get_number(height, "gains.height", "kp");
  setup.height_gains.kd = get_number_or(height, "gains.height", "kd", 0.0);
  return setup;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  expect_object(root, "config",
                {"schema_version", "mode", "seed", "gamma", "dt", "duration", "integrator", "ego",
                 "initial_state", "target", "gains", "obstacles", "bounds"});

  ScenarioConfig cfg;
  if (root.contains("schema_version")) {
    const ordered_json& v = root["schema_version"];
    if (!v.is_number_integer() || v.get<long long>() != 1)
      fail("schema_version", "unsupported version (expected 1)");
  }
  cfg.schema_version = 1;

  const ordered_json& mode = member(root, "config", "mode");
  if (!mode.is_string()) fail("mode", "expected \"vertical\" or \"horizontal\"");
  const std::string mode_name = mode.get<std::string>();

  if (root.contains("seed")) {
    const ordered_json& seed = root["seed"];
    if (!seed.is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    cfg.seed = seed.get<std::uint64_t>();
  }

  cfg.gamma = get_number_or(root, "config", "gamma", 1.0);
  if (!(cfg.gamma > 0) || !std::isfinite(cfg.gamma)) fail("gamma", "must be positive and finite");
  cfg.dt = get_number(root, "config", "dt");
  if (!(cfg.dt > 0) || !std::isfinite(cfg.dt)) fail("dt", "must be positive and finite");
  cfg.duration = get_number(root, "config", "duration");
  if (!(cfg.duration > 0) || !std::isfinite(cfg.duration))
    fail("duration", "must be positive and finite");

  if (root.contains("integrator")) {
    const ordered_json& integ = root["integrator"];
    if (integ.is_string() && integ.get<std::string>() == "rk4")
      cfg.integrator = IntegrationMethod::kRk4;
    else if (integ.is_string() && integ.get<std::string>() == "euler")
      cfg.integrator = IntegrationMethod::kEuler;
    else
      fail("integrator", "expected \"rk4\" or \"euler\"");
  }

  const ordered_json& ego = member(root, "config", "ego");
  expect_object(ego, "ego", {"l", "width"});
  cfg.ego.l = get_number(ego, "ego", "l");
  if (cfg.ego.l < 0) fail("ego.l", "must be nonnegative");
  cfg.ego.width = get_number(ego, "ego", "width");
  if (cfg.ego.width < 0) fail("ego.width", "must be nonnegative");

  if (mode_name == "vertical")
    cfg.setup = parse_vertical_setup(root);
  else if (mode_name == "horizontal")
    cfg.setup = parse_horizontal_setup(root);
  else
    fail("mode", "expected \"vertical\" or \"horizontal\"");

  const ordered_json& obstacles = member(root, "config", "obstacles");
  if (!obstacles.is_array()) fail("obstacles", "expected an array");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string path = "obstacles[" + std::to_string(i) + "]";
    const ordered_json& o = obstacles[i];
    expect_object(o, path, {"center", "velocity", "semi_axes"});
    ObstacleSpec spec;
    spec.center = get_vec2(o, path, "center");
    spec.velocity = o.contains("velocity") ? get_vec2(o, path, "velocity") : Vec2d::Zero().eval();
    const Vec2d axes = get_vec2(o, path, "semi_axes");
    if (!(axes.x() > 0) || !(axes.y() > 0)) fail(path + ".semi_axes", "entries must be positive");
    spec.semi_axis_1 = axes.x();
    spec.semi_axis_2 = axes.y();
    cfg.obstacles.push_back(spec);
  }

  if (root.contains("bounds")) {
    const ordered_json& b = root["bounds"];
    expect_object(b, "bounds", {"lower", "upper"});
    InputBounds bounds;
    bounds.lower = get_vec2(b, "bounds", "lower");
    bounds.upper = get_vec2(b, "bounds", "upper");
    for (int axis = 0; axis < 2; ++axis) {
      if (!(bounds.lower[axis] <= bounds.upper[axis]))
        fail("bounds", "lower must not exceed upper on axis " + std::to_string(axis));
    }
    cfg.bounds = bounds;
  }

  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ScenarioConfig& config) {
  ordered_json root;
  root["schema_version"] = config.schema_version;
  const bool vertical = config.mode() == ScenarioMode::kVertical;
  root["mode"] = vertical ? "vertical" : "horizontal";
  root["seed"] = config.seed;
  root["gamma"] = config.gamma;
  root["dt"] = config.dt;
  root["duration"] = config.duration;
  root["integrator"] = config.integrator == IntegrationMethod::kRk4 ? "rk4" : "euler";
  root["ego"] = {{"l", config.ego.l}, {"width", config.ego.width}};
  if (vertical) {
    const auto& s = std::get<VerticalSetup>(config.setup);
    root["initial_state"] = {{"x", s.initial.x_p},
                             {"y", s.initial.y_p},
                             {"theta", s.initial.theta},
                             {"v", s.initial.v},
                             {"omega", s.initial.omega}};
    root["target"] = {{"v", s.target_v}, {"omega", s.target_omega}};
    root["gains"] = {{"speed", s.speed_gain}, {"yaw_rate", s.yaw_gain}};
  } else {
    const auto& s = std::get<HorizontalSetup>(config.setup);
    root["initial_state"] = {
        {"x", s.initial.x_p}, {"z", s.initial.z_p}, {"vx", s.initial.vx}, {"vz", s.initial.vz}};
    root["target"] = {{"vx", s.target_vx}, {"z", s.nominal_height}};
    root["gains"] = {{"speed", s.speed_gain},
                     {"height", {{"kp", s.height_gains.kp}, {"kd", s.height_gains.kd}}}};
  }
  root["obstacles"] = ordered_json::array();
  for (const auto& o : config.obstacles) {
    root["obstacles"].push_back({{"center", {o.center.x(), o.center.y()}},
                                 {"velocity", {o.velocity.x(), o.velocity.y()}},
                                 {"semi_axes", {o.semi_axis_1, o.semi_axis_2}}});
  }
  if (config.bounds) {
    root["bounds"] = {{"lower", {config.bounds->lower.x(), config.bounds->lower.y()}},
                      {"upper", {config.bounds->upper.x(), config.bounds->upper.y()}}};
  }
  return root.dump(2);
}

void save_config(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot open file for writing");
  out << serialize_config(config) << "\n";
}

void write_trajectory_csv(const ScenarioConfig& config, const RunResult& result,
                          std::ostream& out) {
  const bool vertical = config.mode() == ScenarioMode::kVertical;
  out << "t,";
  out << (vertical ? "x,y,theta,v,omega,u_ref_accel,u_ref_alpha,u_safe_accel,u_safe_alpha"
                   : "x,z,vx,vz,u_ref_ax,u_ref_az,u_safe_ax,u_safe_az");
  for (std::size_t i = 0; i < config.obstacles.size(); ++i) {
    const std::string tag = "obs" + std::to_string(i);
    out << "," << tag << "_h," << tag << "_psi," << tag << "_distance," << tag << "_active," << tag
        << "_degenerate";
  }
  out << ",filter_active,violation\n";

  for (const auto& rec : result.records) {
    out << num(rec.t);
    for (Eigen::Index i = 0; i < rec.state.size(); ++i) out << "," << num(rec.state[i]);
    out << "," << num(rec.u_ref.x()) << "," << num(rec.u_ref.y());
    out << "," << num(rec.u_safe.x()) << "," << num(rec.u_safe.y());
    for (const auto& obs : rec.obstacles) {
      out << "," << num(obs.h) << "," << num(obs.psi) << "," << num(obs.distance) << ","
          << (obs.filter_active ? 1 : 0) << "," << (obs.degenerate ? 1 : 0);
    }
    out << "," << (rec.filter_active ? 1 : 0) << "," << (rec.violation ? 1 : 0) << "\n";
  }
}

void write_trajectory_jsonl(const ScenarioConfig& config, const RunResult& result,
                            std::ostream& out) {
  const bool vertical = config.mode() == ScenarioMode::kVertical;
  for (const auto& rec : result.records) {
    ordered_json line;
    line["t"] = rec.t;
    if (vertical) {
      line["state"] = {{"x", rec.state[0]},
                       {"y", rec.state[1]},
                       {"theta", rec.state[2]},
                       {"v", rec.state[3]},
                       {"omega", rec.state[4]}};
    } else {
      line["state"] = {
          {"x", rec.state[0]}, {"z", rec.state[1]}, {"vx", rec.state[2]}, {"vz", rec.state[3]}};
    }
    line["u_ref"] = {rec.u_ref.x(), rec.u_ref.y()};
    line["u_safe"] = {rec.u_safe.x(), rec.u_safe.y()};
    line["obstacles"] = ordered_json::array();
    for (const auto& obs : rec.obstacles) {
      line["obstacles"].push_back({{"h", obs.h},
                                   {"psi", obs.psi},
                                   {"distance", obs.distance},
                                   {"active", obs.filter_active},
                                   {"degenerate", obs.degenerate}});
    }
    line["filter_active"] = rec.filter_active;
    line["violation"] = rec.violation;
    out << line.dump() << "\n";
  }
}

void write_summary_json(const RunSummary& summary, std::ostream& out) {
  ordered_json line;
  line["completed"] = summary.completed;
  line["steps"] = summary.steps;
  line["violations"] = summary.violation_count;
  line["collisions"] = summary.collision_count;
  line["min_h"] = summary.min_h;
  line["min_distance"] = summary.min_distance;
  line["filter_active_fraction"] = summary.filter_active_fraction;
  line["per_obstacle"] = ordered_json::array();
  for (std::size_t i = 0; i < summary.min_h_per_obstacle.size(); ++i) {
    line["per_obstacle"].push_back({{"min_h", summary.min_h_per_obstacle[i]},
                                    {"min_distance", summary.min_distance_per_obstacle[i]}});
  }
  line["message"] = summary.message;
  out << line.dump() << "\n";
}

}  // namespace c3bf
