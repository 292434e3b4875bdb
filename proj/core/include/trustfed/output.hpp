#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trustfed/engine.hpp"

namespace trustfed {

// Which artifact families to write. The manifest is always written.
struct OutputSelection {
  bool csv = true;
  bool json = true;
  bool plot = true;
};

// Parses a comma-separated list like "csv,json" or "plot". Rejects unknown
// and duplicate entries.
OutputSelection parse_output_selection(const std::string& list);

// Writes the run record for one experiment into out_dir:
//   manifest.json   config echo, resolved parameters, file inventory
//   series.csv      one row per round of the realization-averaged series
//   summary.json    final metrics, settling stats, bounds, per-realization
//   regret.svg, violation.svg   rendered from the same series as the CSV
// The directory is probed for writability before anything is emitted.
// Returns the names of the files written, manifest first.
std::vector<std::string> emit_outputs(const SimConfig& config,
                                      const ExperimentResult& result,
                                      const std::filesystem::path& out_dir,
                                      const OutputSelection& selection = {});

// Side-by-side record for a proposed run and its baseline: each gets its
// own subdirectory (proposed/, baseline/), and with plots enabled the
// overlaid compare_regret.svg / compare_violation.svg are added on top.
std::vector<std::string> emit_comparison(
    const SimConfig& proposed_config, const ExperimentResult& proposed,
    const SimConfig& baseline_config, const ExperimentResult& baseline,
    const std::filesystem::path& out_dir, const OutputSelection& selection = {});

}  // namespace trustfed
