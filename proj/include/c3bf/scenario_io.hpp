#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "c3bf/scenario.hpp"

// JSON scenario configs and run logs. Configs round-trip exactly: parsing the
// serialized form reproduces the in-memory config bit for bit.

namespace c3bf {

// Throws ConfigError naming the offending field (or the parse position for
// syntactically malformed input). Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

// Canonical indented JSON echo of a config.
std::string serialize_config(const ScenarioConfig& config);
void save_config(const ScenarioConfig& config, const std::filesystem::path& path);

// One row per record; floating point columns use full round-trip precision,
// flags are 0/1, undefined values print as nan.
void write_trajectory_csv(const ScenarioConfig& config, const RunResult& result,
                          std::ostream& out);

// One JSON object per line with named state fields; non-finite values are
// serialized as null.
void write_trajectory_jsonl(const ScenarioConfig& config, const RunResult& result,
                            std::ostream& out);

// Single-line JSON run summary.
void write_summary_json(const RunSummary& summary, std::ostream& out);

}  // namespace c3bf
