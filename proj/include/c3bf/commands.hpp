#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "c3bf/verification.hpp"

// Command implementations behind the CLI verbs, separated from argument
// parsing so tests can drive them directly.

namespace c3bf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;

struct RunFlags {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<double> dt;
  std::optional<double> duration;
  bool plots{false};
  std::string format{"csv"};  // trajectory export: "csv" or "jsonl"
};

// Simulates one config. Writes config.echo, trajectory.{csv|jsonl},
// summary.jsonl and optionally plots/*.svg into out_dir.
int cmd_run(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
            const RunFlags& flags, std::ostream& out, std::ostream& err);

// Runs the randomized property suites; prints counts and worst residuals.
// samples <= 0 is invalid (exit 2). The tamper hook exists for fault-injection
// tests of the failure path.
int cmd_verify(long long samples, std::uint64_t seed, std::ostream& out, std::ostream& err,
               const verification::ConstraintTamper& tamper = {});

// Cartesian grid over the provided dimensions; an empty dimension keeps the
// config value. All three empty counts as an empty range (exit 2).
struct SweepRanges {
  std::vector<double> gamma;
  std::vector<double> obstacle_speed;  // rescales nonzero obstacle velocities
  std::vector<double> target_speed;    // target v (vertical) or vx (horizontal)

  bool empty() const { return gamma.empty() && obstacle_speed.empty() && target_speed.empty(); }
};

// Runs the grid across a bounded worker pool, one subdirectory per cell, and
// writes an aggregate sweep.csv in grid order.
int cmd_sweep(const std::filesystem::path& config_file, const SweepRanges& ranges,
              const std::filesystem::path& out_dir, const RunFlags& flags, std::ostream& out,
              std::ostream& err);

}  // namespace c3bf
