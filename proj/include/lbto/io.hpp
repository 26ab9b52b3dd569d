#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lbto/extract.hpp"
#include "lbto/ftle.hpp"
#include "lbto/metrics.hpp"

namespace lbto {

namespace fs = std::filesystem;

// Binary containers are little-endian with a four-byte magic and a u32 version.
inline constexpr std::uint32_t kFormatVersion = 1;

/// Basis-flow container ("LBFM"): 48-byte header, then one record per flow of
/// u64 id, dims f64 seed, dims f64 end, u8 valid and 7 pad bytes.
std::string encode_basis_flows(const BasisFlowSet& set);
BasisFlowSet decode_basis_flows(std::string_view bytes);
void write_basis_flows(const BasisFlowSet& set, const fs::path& path);
BasisFlowSet read_basis_flows(const fs::path& path);

/// Scalar lattice ("LSFD"): u8 dims, 3 reserved bytes, u32 count per axis,
/// f64 spacing per axis, f64 duration, u64 degenerate count, then x-fastest f64 values.
std::string encode_scalar_field(const FtleField& field);
FtleField decode_scalar_field(std::string_view bytes);
void write_scalar_field(const FtleField& field, const fs::path& path);
FtleField read_scalar_field(const fs::path& path);

/// One cycle of gridded velocity ("LVEL"): u8 dims, u32 grid dims per axis,
/// f64 lo then hi per axis, u32 cycle, then x-fastest vectors of dims f64.
std::string encode_velocity(const GridSnapshot& snap);
GridSnapshot decode_velocity(std::string_view bytes);
void write_velocity(const GridSnapshot& snap, const fs::path& path);
GridSnapshot read_velocity(const fs::path& path);
/// File name used for cycle `cycle` inside a velocity directory.
std::string velocity_file_name(int cycle);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view bytes);

/// 6 significant digits; scientific below 1e-3 in magnitude.
std::string format_metric(double x);

struct MetricsRow {
  int interval = 0;
  int reduction = 1;
  std::string strategy;
  int ranks = 1;
  double bto_s = 0;
  double exchange_s = 0;
  double speedup = 0;
  double discarded_pct = 0;
  double greatest_max_l2 = 0;
  double avg_max_l2 = 0;
  double total_avg_l2 = 0;
  double accuracy_pct = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "interval,reduction,strategy,ranks,bto_s,exchange_s,speedup,discarded_pct,greatest_max_l2,avg_max_l2,"
    "total_avg_l2,accuracy_pct";

std::string metrics_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);
void emit_metrics(std::span<const MetricsRow> rows, const fs::path& path);

std::string timing_csv(std::span<const TimingRecord> timing);
std::string messages_csv(std::span<const MessageRecord> log);
std::vector<MessageRecord> parse_messages_csv(std::string_view text);
/// One row per (interval, rank) with the set's accounting.
std::string stats_csv(const FlowMapDataset& dataset);
std::vector<std::vector<FlowStats>> parse_stats_csv(std::string_view text);
std::string interval_accuracy_csv(std::span<const IntervalAccuracy> rows);
std::string pathlines_csv(std::span<const Pathline> lines);

}  // namespace lbto
