#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lbto/fields.hpp"

namespace lbto {

enum class StepStatus : std::uint8_t {
  Ok,
  LeftDomain,  // a stage sample or the candidate left the global domain
  LeftRegion,  // ... stayed in the domain but left the caller's region
};

struct StepResult {
  Vec pos;
  StepStatus status;
};

/// Classical RK4 over one cycle. Stage samples are taken at cycle fractions
/// 0, 1/2, 1/2, 1. If any stage sample or the candidate leaves the global domain
/// or fails `in_region`, the step is aborted and `pos` is the input position.
template <class Region>
StepResult rk4_step(const TimeField& field, const Vec& x, int cycle, double dt, const Region& in_region) {
  const Box& domain = field.domain();
  auto check = [&](const Vec& p) {
    if (!domain.contains(p)) return StepStatus::LeftDomain;
    if (!in_region(p)) return StepStatus::LeftRegion;
    return StepStatus::Ok;
  };
  if (auto s = check(x); s != StepStatus::Ok) return {x, s};
  const Vec k1 = field.eval_unchecked(x, cycle, 0.0);
  const Vec p2 = x + (0.5 * dt) * k1;
  if (auto s = check(p2); s != StepStatus::Ok) return {x, s};
  const Vec k2 = field.eval_unchecked(p2, cycle, 0.5);
  const Vec p3 = x + (0.5 * dt) * k2;
  if (auto s = check(p3); s != StepStatus::Ok) return {x, s};
  const Vec k3 = field.eval_unchecked(p3, cycle, 0.5);
  const Vec p4 = x + dt * k3;
  if (auto s = check(p4); s != StepStatus::Ok) return {x, s};
  const Vec k4 = field.eval_unchecked(p4, cycle, 1.0);
  Vec next;
  for (int a = 0; a < 3; ++a) next[a] = x[a] + dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
  if (auto s = check(next); s != StepStatus::Ok) return {x, s};
  return {next, StepStatus::Ok};
}

inline StepResult rk4_step(const TimeField& field, const Vec& x, int cycle, double dt) {
  return rk4_step(field, x, cycle, dt, [](const Vec&) { return true; });
}

/// Supplies the gridded snapshot for a cycle; unused for analytic fields.
using SnapshotLoader = std::function<GridSnapshot(int cycle)>;

/// Ground-truth pathlines: RK4 at the full temporal resolution over the whole
/// domain, no decomposition and no interval resets. Samples are recorded at
/// every `sample_every` cycles starting at `first_cycle`.
std::vector<Pathline> ground_truth_pathlines(TimeField field, const SnapshotLoader& loader,
                                             std::span<const Vec> seeds, int first_cycle, int cycles,
                                             int sample_every);

/// Ground-truth flow map over [first_cycle, first_cycle + cycles): end position
/// per seed, or nullopt when the seed leaves the domain.
std::vector<std::optional<Vec>> ground_truth_flow_map(TimeField field, const SnapshotLoader& loader,
                                                      std::span<const Vec> seeds, int first_cycle, int cycles);

}  // namespace lbto
