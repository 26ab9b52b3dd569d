#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lbto/extract.hpp"
#include "lbto/reconstruct.hpp"

namespace lbto {

struct FieldSpec {
  FieldKind kind = FieldKind::AnalyticABC;
  double cycle_dt = 0.002;
  AbcParams abc;           // abc.period <= 0 means "total simulated time"
  DoubleGyreParams gyre;
  LinearParams linear;
  std::string velocity_dir;  // gridded: directory of per-cycle velocity files
  Box domain;                // resolved at load

  bool operator==(const FieldSpec&) const;
};

struct ExperimentSpec {
  FieldSpec field;
  Index3 grid_dims{48, 48, 48};
  Index3 layout{2, 2, 2};
  int interval = 25;
  int reduction = 8;
  int total_cycles = 100;
  std::uint64_t rng_seed = 0;
  int workers = -1;
  std::vector<Strategy> strategies{Strategy::Exchange, Strategy::Bto};
  ReconMode recon_mode = ReconMode::GridFill;
  std::vector<std::string> metrics{"accuracy", "discard"};
  int pathline_seeds_per_axis = 4;
  int bench_repetitions = 1;
  std::string output_dir = "run";

  // Directory the spec was loaded from; relative paths resolve against it.
  std::filesystem::path base_dir;

  int dims() const { return field.domain.dims; }
  std::filesystem::path output_path() const;
  std::filesystem::path velocity_path() const;
  bool wants_metric(const std::string& name) const;

  bool operator==(const ExperimentSpec& o) const;
};

/// Parses and validates a JSON experiment spec. Syntax and type problems raise
/// ParseError naming the line or field; invariant violations raise
/// ValidationError.
ExperimentSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentSpec load_spec(const std::filesystem::path& path);
void validate_spec(const ExperimentSpec& spec);
/// Every field with defaults resolved, stable key order.
std::string serialize_spec(const ExperimentSpec& spec);

/// ABC period actually used (the configured one, or the total simulated time).
double effective_period(const ExperimentSpec& spec);
TimeField make_field(const ExperimentSpec& spec);
BlockDecomposition make_decomposition(const ExperimentSpec& spec);
SnapshotLoader make_loader(const ExperimentSpec& spec);
ExtractionConfig make_extraction_config(const ExperimentSpec& spec, Strategy strategy);

/// Evenly spaced interior points, n per axis, used as pathline seeds.
std::vector<Vec> pathline_seeds(const ExperimentSpec& spec);

}  // namespace lbto
