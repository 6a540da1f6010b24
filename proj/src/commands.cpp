#include "c3bf/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "c3bf/errors.hpp"
#include "c3bf/scenario.hpp"
#include "c3bf/scenario_io.hpp"
#include "c3bf/svg_plot.hpp"

namespace c3bf {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScenarioConfig load_with_overrides(const std::filesystem::path& config_file,
                                   const RunFlags& flags) {
  ScenarioConfig config = load_config(config_file);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.dt) {
    if (!(*flags.dt > 0)) throw ConfigError("--dt: must be positive");
    config.dt = *flags.dt;
  }
  if (flags.duration) {
    if (!(*flags.duration > 0)) throw ConfigError("--duration: must be positive");
    config.duration = *flags.duration;
  }
  return config;
}

void write_run_outputs(const ScenarioConfig& config, const RunResult& result,
                       const std::filesystem::path& dir, const RunFlags& flags) {
  std::filesystem::create_directories(dir);
  save_config(config, dir / "config.echo");
  const bool jsonl = flags.format == "jsonl";
  {
    std::ofstream out(dir / (jsonl ? "trajectory.jsonl" : "trajectory.csv"));
    if (!out) throw ConfigError((dir / "trajectory").string() + ": cannot open for writing");
    if (jsonl)
      write_trajectory_jsonl(config, result, out);
    else
      write_trajectory_csv(config, result, out);
  }
  {
    std::ofstream out(dir / "summary.jsonl");
    if (!out) throw ConfigError((dir / "summary.jsonl").string() + ": cannot open for writing");
    write_summary_json(result.summary, out);
  }
  if (flags.plots) write_plots(config, result, dir / "plots");
}

void print_summary(const RunSummary& summary, std::ostream& out) {
  out << "steps=" << summary.steps << " min_h=" << num(summary.min_h)
      << " min_distance=" << num(summary.min_distance)
      << " filter_active_fraction=" << num(summary.filter_active_fraction)
      << " violations=" << summary.violation_count << " collisions=" << summary.collision_count
      << "\n";
  if (!summary.message.empty()) out << summary.message << "\n";
}

}  // namespace

int cmd_run(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
            const RunFlags& flags, std::ostream& out, std::ostream& err) {
  if (flags.format != "csv" && flags.format != "jsonl") {
    err << "--format: expected csv or jsonl\n";
    return kExitConfig;
  }
  ScenarioConfig config;
  try {
    config = load_with_overrides(config_file, flags);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const RunResult result = run(config);
    write_run_outputs(config, result, out_dir, flags);
    print_summary(result.summary, out);
    const RunSummary& s = result.summary;
    if (!s.completed || s.violation_count > 0 || s.collision_count > 0) {
      err << "safety violation: " << (s.message.empty() ? "collision detected" : s.message)
          << "\n";
      return kExitViolation;
    }
    return kExitOk;
  } catch (const InfeasibleError& e) {
    std::filesystem::create_directories(out_dir);
    save_config(config, out_dir / "config.echo");
    err << e.what() << "\n";
    return kExitInfeasible;
  }
}

int cmd_verify(long long samples, std::uint64_t seed, std::ostream& out, std::ostream& err,
               const verification::ConstraintTamper& tamper) {
  if (samples <= 0) {
    err << "--samples: must be positive\n";
    return kExitConfig;
  }
  const auto results = verification::run_all(samples, seed, tamper);
  bool all_passed = true;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%-30s samples=%-8lld failures=%-6lld %s = %.6g",
                  r.name.c_str(), r.samples, r.failures, r.worst_description.c_str(), r.worst);
    out << line << (r.passed() ? "" : "  FAIL") << "\n";
    if (!r.passed()) {
      all_passed = false;
      err << "counterexample: " << r.counterexample << "\n";
    }
  }
  out << (all_passed ? "all suites passed" : "suite failures detected") << "\n";
  return all_passed ? kExitOk : kExitViolation;
}

namespace {

struct SweepCell {
  double gamma{0};
  std::optional<double> obstacle_speed;
  double target_speed{0};
  RunSummary summary;
  int status{kExitOk};  // kExitOk, kExitViolation or kExitInfeasible
};

ScenarioConfig cell_config(const ScenarioConfig& base, const SweepCell& cell) {
  ScenarioConfig config = base;
  config.gamma = cell.gamma;
  if (cell.obstacle_speed) {
    for (auto& obs : config.obstacles) {
      const double speed = obs.velocity.norm();
      if (speed > 0) obs.velocity *= *cell.obstacle_speed / speed;
    }
  }
  if (config.mode() == ScenarioMode::kVertical)
    std::get<VerticalSetup>(config.setup).target_v = cell.target_speed;
  else
    std::get<HorizontalSetup>(config.setup).target_vx = cell.target_speed;
  return config;
}

}  // namespace

int cmd_sweep(const std::filesystem::path& config_file, const SweepRanges& ranges,
              const std::filesystem::path& out_dir, const RunFlags& flags, std::ostream& out,
              std::ostream& err) {
  if (flags.format != "csv" && flags.format != "jsonl") {
    err << "--format: expected csv or jsonl\n";
    return kExitConfig;
  }
  if (ranges.empty()) {
    err << "empty parameter range: provide at least one of --gamma, --obstacle-speed, "
           "--target-speed\n";
    return kExitConfig;
  }
  ScenarioConfig base;
  try {
    base = load_with_overrides(config_file, flags);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  const double base_target = base.mode() == ScenarioMode::kVertical
                                 ? std::get<VerticalSetup>(base.setup).target_v
                                 : std::get<HorizontalSetup>(base.setup).target_vx;
  const std::vector<double> gammas = ranges.gamma.empty() ? std::vector<double>{base.gamma}
                                                          : ranges.gamma;
  const std::vector<double> targets = ranges.target_speed.empty()
                                          ? std::vector<double>{base_target}
                                          : ranges.target_speed;
  for (double g : gammas) {
    if (!(g > 0)) {
      err << "--gamma: values must be positive\n";
      return kExitConfig;
    }
  }

  std::vector<SweepCell> cells;
  for (double g : gammas) {
    if (ranges.obstacle_speed.empty()) {
      for (double t : targets) cells.push_back({g, std::nullopt, t});
    } else {
      for (double os : ranges.obstacle_speed)
        for (double t : targets) cells.push_back({g, os, t});
    }
  }

  std::filesystem::create_directories(out_dir);

  // Bounded worker pool; each cell writes only into its own directory.
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::string worker_error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      SweepCell& cell = cells[i];
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", i);
      const std::filesystem::path cell_dir = out_dir / name;
      const ScenarioConfig config = cell_config(base, cell);
      try {
        const RunResult result = run(config);
        write_run_outputs(config, result, cell_dir, flags);
        cell.summary = result.summary;
        const RunSummary& s = cell.summary;
        cell.status = (!s.completed || s.violation_count > 0 || s.collision_count > 0)
                          ? kExitViolation
                          : kExitOk;
      } catch (const InfeasibleError& e) {
        std::filesystem::create_directories(cell_dir);
        save_config(config, cell_dir / "config.echo");
        cell.summary.completed = false;
        cell.summary.message = e.what();
        cell.status = kExitInfeasible;
      } catch (const std::exception& e) {
        std::scoped_lock lock(err_mutex);
        if (worker_error.empty()) worker_error = e.what();
        return;
      }
    }
  };
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t pool = std::min<std::size_t>(std::max(1u, hw ? hw : 1u),
                                                 std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (!worker_error.empty()) {
    err << worker_error << "\n";
    return kExitConfig;
  }

  // Aggregate table, written once, in grid order.
  {
    std::ofstream agg(out_dir / "sweep.csv");
    if (!agg) {
      err << (out_dir / "sweep.csv").string() << ": cannot open for writing\n";
      return kExitConfig;
    }
    agg << "index,gamma,obstacle_speed,target_speed,completed,steps,violations,collisions,"
           "min_h,min_distance,filter_active_fraction,status\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const SweepCell& c = cells[i];
      const char* status = c.status == kExitOk          ? "ok"
                           : c.status == kExitViolation ? "violation"
                                                        : "infeasible";
      agg << i << "," << num(c.gamma) << ","
          << (c.obstacle_speed ? num(*c.obstacle_speed) : std::string{}) << ","
          << num(c.target_speed) << "," << (c.summary.completed ? 1 : 0) << ","
          << c.summary.steps << "," << c.summary.violation_count << ","
          << c.summary.collision_count << "," << num(c.summary.min_h) << ","
          << num(c.summary.min_distance) << "," << num(c.summary.filter_active_fraction) << ","
          << status << "\n";
    }
  }

  int exit_code = kExitOk;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    out << "cell " << i << ": gamma=" << num(c.gamma);
    if (c.obstacle_speed) out << " obstacle_speed=" << num(*c.obstacle_speed);
    out << " target_speed=" << num(c.target_speed) << " min_h=" << num(c.summary.min_h)
        << " min_distance=" << num(c.summary.min_distance) << " status="
        << (c.status == kExitOk ? "ok" : c.status == kExitViolation ? "VIOLATION" : "INFEASIBLE")
        << "\n";
    if (c.status == kExitInfeasible)
      exit_code = kExitInfeasible;
    else if (c.status == kExitViolation && exit_code != kExitInfeasible)
      exit_code = kExitViolation;
  }
  return exit_code;
}

}  // namespace c3bf
