#include "lbto/metrics.hpp"

#include <algorithm>
#include <map>

namespace lbto {

double total_avg_l2(std::span<const Vec> a, std::span<const Vec> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "position lists differ in length");
  if (a.empty()) throw Error(ErrorCode::Empty, "no positions to compare");
  double sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += distance(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

double accuracy_pct(double avg_l2, double cell_side) {
  if (!(cell_side > 0)) throw Error(ErrorCode::NonpositiveCell, "cell side must be positive");
  return (cell_side - avg_l2) / cell_side * 100.0;
}

MaxL2Stats max_l2_stats(std::span<const double> per_interval_max) {
  if (per_interval_max.empty()) throw Error(ErrorCode::Empty, "no intervals");
  MaxL2Stats s;
  s.greatest = *std::max_element(per_interval_max.begin(), per_interval_max.end());
  double sum = 0;
  for (double m : per_interval_max) sum += m;
  s.average = sum / static_cast<double>(per_interval_max.size());
  return s;
}

PathlineError pathline_error(const Pathline& interp, const Pathline& truth) {
  const std::size_t n = std::min(interp.samples.size(), truth.samples.size());
  if (n == 0) throw Error(ErrorCode::NoCommonSamples, "pathlines share no samples");
  PathlineError e;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = interp.samples[i];
    const auto& b = truth.samples[i];
    if (std::abs(a.time - b.time) > 1e-9 * std::max(1.0, std::abs(b.time)))
      throw Error(ErrorCode::NoCommonSamples, "pathline sample times disagree");
    sum += distance(a.pos, b.pos);
  }
  e.mean_l2 = sum / static_cast<double>(n);
  e.common_samples = n;
  return e;
}

IntervalAccuracy interval_accuracy(std::span<const std::optional<Vec>> got, std::span<const std::optional<Vec>> want) {
  if (got.size() != want.size()) throw Error(ErrorCode::LengthMismatch, "position lists differ in length");
  IntervalAccuracy r;
  double sum = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (!got[i] || !want[i]) {
      ++r.excluded;
      continue;
    }
    const double d = distance(*got[i], *want[i]);
    sum += d;
    r.max_l2 = std::max(r.max_l2, d);
    ++r.compared;
  }
  r.avg_l2 = r.compared ? sum / static_cast<double>(r.compared) : 0.0;
  return r;
}

AccuracyReport summarize(std::vector<IntervalAccuracy> per_interval, double cell_side) {
  AccuracyReport rep;
  rep.cell_side = cell_side;
  std::vector<double> maxima;
  double avg_sum = 0, pooled_sum = 0;
  std::size_t pooled_n = 0;
  for (const auto& iv : per_interval) {
    rep.excluded_count += iv.excluded;
    if (iv.compared == 0) continue;
    maxima.push_back(iv.max_l2);
    avg_sum += iv.avg_l2;
    pooled_sum += iv.avg_l2 * static_cast<double>(iv.compared);
    pooled_n += iv.compared;
  }
  if (maxima.empty()) throw Error(ErrorCode::Empty, "no interval had comparable flows");
  const auto mx = max_l2_stats(maxima);
  rep.greatest_max_l2 = mx.greatest;
  rep.avg_max_l2 = mx.average;
  rep.total_avg_l2 = avg_sum / static_cast<double>(maxima.size());
  rep.pooled_avg_l2 = pooled_sum / static_cast<double>(pooled_n);
  rep.accuracy_pct = accuracy_pct(rep.total_avg_l2, cell_side);
  rep.per_interval = std::move(per_interval);
  return rep;
}

AccuracyReport compare_datasets(const FlowMapDataset& reference, const FlowMapDataset& candidate, ReconMode mode) {
  if (reference.sets.size() != candidate.sets.size())
    throw Error(ErrorCode::LengthMismatch, "datasets hold different interval counts");
  const Reconstructor recon(candidate, mode);
  std::vector<IntervalAccuracy> per_interval;
  for (std::size_t k = 0; k < reference.sets.size(); ++k) {
    std::vector<Vec> seeds;
    std::vector<std::optional<Vec>> want;
    for (const auto& set : reference.sets[k])
      for (const auto& f : set.flows) {
        seeds.push_back(f.seed);
        want.emplace_back(f.end);
      }
    const auto got = reconstruct_flowmap(recon, seeds, static_cast<int>(k));
    auto iv = interval_accuracy(got.ends, want);
    iv.interval = static_cast<int>(k);
    per_interval.push_back(iv);
  }
  return summarize(std::move(per_interval), reference.config.decomp.cell_side());
}

double discarded_pct(const FlowMapDataset& dataset) {
  std::uint64_t seeded = 0, discarded = 0;
  for (int k = 0; k < static_cast<int>(dataset.sets.size()); ++k) {
    const FlowStats s = dataset.interval_stats(k);
    seeded += s.seeded;
    discarded += s.discarded;
  }
  return seeded ? 100.0 * static_cast<double>(discarded) / static_cast<double>(seeded) : 0.0;
}

double mean_cycle_seconds(std::span<const TimingRecord> timing) {
  std::map<std::pair<int, int>, double> per_rank_cycle;
  for (const auto& t : timing)
    if (!t.write_cycle) per_rank_cycle[{t.cycle, t.rank}] += t.wall_seconds;
  std::map<int, double> per_cycle;
  for (const auto& [key, secs] : per_rank_cycle) {
    double& slot = per_cycle[key.first];
    slot = std::max(slot, secs);
  }
  if (per_cycle.empty()) throw Error(ErrorCode::Empty, "no non-write timing rows");
  double sum = 0;
  for (const auto& [cycle, secs] : per_cycle) sum += secs;
  return sum / static_cast<double>(per_cycle.size());
}

}  // namespace lbto
