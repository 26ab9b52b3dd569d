#pragma once

#include <filesystem>
#include <ostream>

#include "lbto/spec.hpp"

namespace lbto {

/// Writes a dataset as a run directory: provenance.json, stats.csv,
/// messages.csv and interval_NNNN/rank_NNNN.lbfm. Timing is not written here so
/// that run directories stay reproducible.
void write_run(const FlowMapDataset& dataset, const ExperimentSpec& spec, const std::filesystem::path& dir);

struct LoadedRun {
  ExperimentSpec spec;
  FlowMapDataset dataset;
};

LoadedRun read_run(const std::filesystem::path& dir);

/// Exit codes: 0 success, 1 usage or validation error, 2 runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lbto
