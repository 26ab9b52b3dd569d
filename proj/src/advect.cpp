#include "lbto/advect.hpp"

#include <optional>

namespace lbto {

namespace {

void prepare_cycle(TimeField& field, const SnapshotLoader& loader, int cycle) {
  if (field.kind() != FieldKind::Gridded) return;
  if (!loader) throw Error(ErrorCode::CycleUnavailable, "gridded field without a snapshot loader");
  if (field.loaded_cycle() != cycle) field.load_cycle(loader(cycle));
}

}  // namespace

std::vector<Pathline> ground_truth_pathlines(TimeField field, const SnapshotLoader& loader,
                                             std::span<const Vec> seeds, int first_cycle, int cycles,
                                             int sample_every) {
  if (sample_every < 1) throw Error(ErrorCode::InvalidArgument, "sample_every must be >= 1");
  const double dt = field.cycle_dt();
  std::vector<Pathline> lines(seeds.size());
  std::vector<Vec> pos(seeds.begin(), seeds.end());
  std::vector<bool> alive(seeds.size(), true);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    lines[i].seed = seeds[i];
    if (field.domain().contains(seeds[i])) {
      lines[i].samples.push_back({first_cycle * dt, seeds[i]});
    } else {
      alive[i] = false;
      lines[i].status = Pathline::Status::TruncatedOutOfDomain;
    }
  }
  for (int c = first_cycle; c < first_cycle + cycles; ++c) {
    prepare_cycle(field, loader, c);
    const bool sample = (c + 1 - first_cycle) % sample_every == 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (!alive[i]) continue;
      const StepResult r = rk4_step(field, pos[i], c, dt);
      if (r.status != StepStatus::Ok) {
        alive[i] = false;
        lines[i].status = Pathline::Status::TruncatedOutOfDomain;
        continue;
      }
      pos[i] = r.pos;
      if (sample) lines[i].samples.push_back({(c + 1) * dt, pos[i]});
    }
  }
  return lines;
}

std::vector<std::optional<Vec>> ground_truth_flow_map(TimeField field, const SnapshotLoader& loader,
                                                      std::span<const Vec> seeds, int first_cycle, int cycles) {
  std::vector<std::optional<Vec>> out(seeds.begin(), seeds.end());
  const double dt = field.cycle_dt();
  for (auto& p : out)
    if (!field.domain().contains(*p)) p.reset();
  for (int c = first_cycle; c < first_cycle + cycles; ++c) {
    prepare_cycle(field, loader, c);
    for (auto& p : out) {
      if (!p) continue;
      const StepResult r = rk4_step(field, *p, c, dt);
      if (r.status != StepStatus::Ok)
        p.reset();
      else
        *p = r.pos;
    }
  }
  return out;
}

}  // namespace lbto
