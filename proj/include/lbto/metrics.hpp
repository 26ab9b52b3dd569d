#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lbto/reconstruct.hpp"

namespace lbto {

/// Mean pairwise L2 distance between index-aligned position lists.
double total_avg_l2(std::span<const Vec> a, std::span<const Vec> b);

/// (C - L) / C * 100. Negative when L exceeds the cell side; reported as is.
double accuracy_pct(double avg_l2, double cell_side);

struct MaxL2Stats {
  double greatest = 0;
  double average = 0;
};

/// Greatest and mean of the per-interval maximum errors.
MaxL2Stats max_l2_stats(std::span<const double> per_interval_max);

struct PathlineError {
  double mean_l2 = 0;
  std::size_t common_samples = 0;  // prefix length compared
};

/// Mean distance over the common sample prefix. Sample times must agree.
PathlineError pathline_error(const Pathline& interp, const Pathline& truth);

struct IntervalAccuracy {
  int interval = 0;
  double avg_l2 = 0;
  double max_l2 = 0;
  std::size_t compared = 0;
  std::size_t excluded = 0;  // reconstruction (or reference) unavailable
};

/// Errors of `got` against `want`; pairs where either side is missing are
/// excluded and counted.
IntervalAccuracy interval_accuracy(std::span<const std::optional<Vec>> got, std::span<const std::optional<Vec>> want);

struct AccuracyReport {
  double total_avg_l2 = 0;   // mean of the per-interval averages
  double pooled_avg_l2 = 0;  // mean over every compared flow of every interval
  double greatest_max_l2 = 0;
  double avg_max_l2 = 0;
  double accuracy_pct = 0;
  double cell_side = 0;
  std::vector<IntervalAccuracy> per_interval;
  std::size_t excluded_count = 0;
};

AccuracyReport summarize(std::vector<IntervalAccuracy> per_interval, double cell_side);

/// Reconstructs `candidate` at every stored seed of `reference` and compares the
/// interpolated ends with the reference ends, interval by interval.
AccuracyReport compare_datasets(const FlowMapDataset& reference, const FlowMapDataset& candidate, ReconMode mode);

/// Share of seeded particles that were discarded over all intervals, in percent.
double discarded_pct(const FlowMapDataset& dataset);

/// Mean wall time per cycle, excluding write cycles. A cycle's time is the
/// slowest rank's Advect + Manage + Communicate total, since ranks run
/// concurrently between barriers.
double mean_cycle_seconds(std::span<const TimingRecord> timing);

}  // namespace lbto
