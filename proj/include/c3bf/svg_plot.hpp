#pragma once

#include <filesystem>

#include "c3bf/scenario.hpp"

// Self-contained SVG renderings of a run, written without any plotting
// dependency. Intended for quick inspection of scenario behavior.

namespace c3bf {

// Writes the standard plot set into `dir` (created if missing):
//   path.svg        body-center trajectory with obstacle footprints and
//                   effective discs
//   barrier.svg     h(t) per obstacle
//   constraint.svg  psi(t) per obstacle
//   inputs.svg      reference vs applied input, both axes
void write_plots(const ScenarioConfig& config, const RunResult& result,
                 const std::filesystem::path& dir);

}  // namespace c3bf
