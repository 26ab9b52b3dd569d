#include "lbto/extract.hpp"

#include <algorithm>
#include <chrono>

#include "lbto/worker_pool.hpp"

namespace lbto {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Advection phase: RK4 candidates for the active particles of a rank.
template <class Region>
void advect_active(const RankState& state, const TimeField& field, int cycle, const Region& region,
                   std::vector<StepResult>& out) {
  const double dt = field.cycle_dt();
  out.resize(state.particles.size());
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    const Particle& p = state.particles[i];
    out[i] = p.status == ParticleStatus::Active ? rk4_step(field, p.pos, cycle, dt, region)
                                                : StepResult{p.pos, StepStatus::Ok};
  }
}

void manage_bto(RankState& state, const std::vector<StepResult>& results) {
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    Particle& p = state.particles[i];
    if (p.status != ParticleStatus::Active) continue;
    switch (results[i].status) {
      case StepStatus::Ok: p.pos = results[i].pos; break;
      case StepStatus::LeftDomain: p.status = ParticleStatus::ExitedDomain; break;
      case StepStatus::LeftRegion: p.status = ParticleStatus::TerminatedBoundary; break;
    }
  }
}

void manage_exchange(RankState& state, const std::vector<StepResult>& results, Mailboxes& mail,
                     const BlockDecomposition& decomp) {
  std::size_t keep = 0;
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    Particle p = state.particles[i];
    if (p.status == ParticleStatus::Active) {
      if (results[i].status != StepStatus::Ok) {
        p.status = ParticleStatus::ExitedDomain;
      } else {
        p.pos = results[i].pos;
        const int owner = *decomp.owner_of(p.pos);
        if (owner != state.rank) {
          mail.send(state.rank, owner, p);
          continue;
        }
      }
    }
    state.particles[keep++] = p;
  }
  state.particles.resize(keep);
}

std::vector<MessageRecord> collect_messages(const Mailboxes& mail, int cycle, bool is_return) {
  std::vector<MessageRecord> out;
  for (int from = 0; from < mail.ranks(); ++from)
    for (int to = 0; to < mail.ranks(); ++to)
      if (const auto n = mail.pending(from, to); n > 0) out.push_back({cycle, from, to, n, is_return});
  return out;
}

}  // namespace

const char* to_string(Strategy s) { return s == Strategy::Bto ? "bto" : "exchange"; }

Strategy parse_strategy(const std::string& name) {
  if (name == "bto") return Strategy::Bto;
  if (name == "exchange") return Strategy::Exchange;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + name + "' (expected bto or exchange)");
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Advect: return "advect";
    case Phase::Manage: return "manage";
    case Phase::Communicate: return "communicate";
  }
  return "unknown";
}

void ExtractionConfig::validate() const {
  if (interval < 1) throw Error(ErrorCode::ValidationError, "interval must be >= 1");
  if (total_cycles < 1) throw Error(ErrorCode::ValidationError, "total_cycles must be >= 1");
  if (total_cycles % interval != 0)
    throw Error(ErrorCode::ValidationError, "interval " + std::to_string(interval) + " does not divide total_cycles " +
                                                std::to_string(total_cycles));
  if (reduction < 1) throw Error(ErrorCode::ValidationError, "reduction must be >= 1");
  if (!(field.cycle_dt() > 0)) throw Error(ErrorCode::ValidationError, "cycle_dt must be positive");
  if (field.dims() != decomp.dims()) throw Error(ErrorCode::ValidationError, "field and decomposition dims differ");
  for (int a = 0; a < field.dims(); ++a)
    if (field.domain().lo[a] != decomp.domain().lo[a] || field.domain().hi[a] != decomp.domain().hi[a])
      throw Error(ErrorCode::ValidationError, "field and decomposition domains differ");
  if (field.kind() == FieldKind::Gridded && !loader)
    throw Error(ErrorCode::ValidationError, "gridded field requires a snapshot loader");
}

std::uint64_t FlowMapDataset::total_messages() const {
  std::uint64_t n = 0;
  for (const auto& m : message_log) n += m.count;
  return n;
}

FlowStats FlowMapDataset::interval_stats(int interval) const {
  FlowStats s;
  for (const auto& set : sets.at(static_cast<std::size_t>(interval))) {
    s.seeded += set.stats.seeded;
    s.stored += set.stats.stored;
    s.discarded += set.stats.discarded;
    s.terminated_boundary += set.stats.terminated_boundary;
    s.exited_domain += set.stats.exited_domain;
  }
  return s;
}

void Mailboxes::deliver(RankState& state) {
  for (int from = 0; from < ranks_; ++from) {
    auto& q = box(from, state.rank);
    state.particles.insert(state.particles.end(), q.begin(), q.end());
    q.clear();
  }
}

RankState seed_rank(const BlockDecomposition& decomp, int rank, int reduction) {
  const SeedSet seeds = seed_uniform(decomp, rank, reduction);
  RankState state;
  state.rank = rank;
  state.particles.reserve(seeds.positions.size());
  for (std::size_t i = 0; i < seeds.positions.size(); ++i) {
    Particle p;
    p.id = make_particle_id(rank, static_cast<std::uint32_t>(i));
    p.seed = p.pos = seeds.positions[i];
    p.origin_rank = rank;
    state.particles.push_back(p);
  }
  return state;
}

void step_bto(RankState& state, const BlockDecomposition& decomp, const TimeField& field, int cycle) {
  const Block& blk = decomp.block(state.rank);
  std::vector<StepResult> results;
  advect_active(state, field, cycle, [&blk](const Vec& x) { return blk.owns(x); }, results);
  manage_bto(state, results);
}

void exchange_advect(RankState& state, Mailboxes& mail, const BlockDecomposition& decomp, const TimeField& field,
                     int cycle) {
  std::vector<StepResult> results;
  advect_active(state, field, cycle, [](const Vec&) { return true; }, results);
  manage_exchange(state, results, mail, decomp);
}

std::vector<MessageRecord> step_exchange(std::span<RankState> states, Mailboxes& mail,
                                         const BlockDecomposition& decomp, const TimeField& field, int cycle) {
  for (auto& s : states) exchange_advect(s, mail, decomp, field, cycle);
  auto log = collect_messages(mail, cycle, false);
  for (auto& s : states) mail.deliver(s);
  return log;
}

std::vector<MessageRecord> return_to_origin(std::span<RankState> states, Mailboxes& mail, int cycle) {
  for (auto& s : states) {
    std::size_t keep = 0;
    for (const Particle& p : s.particles) {
      if (p.origin_rank != s.rank)
        mail.send(s.rank, p.origin_rank, p);
      else
        s.particles[keep++] = p;
    }
    s.particles.resize(keep);
  }
  auto log = collect_messages(mail, cycle, true);
  for (auto& s : states) mail.deliver(s);
  return log;
}

BasisFlowSet finalize_rank(const RankState& state, std::uint64_t seeded, int interval_index, double t_start,
                           double t_end, int dims, Strategy strategy) {
  BasisFlowSet set;
  set.interval_index = interval_index;
  set.t_start = t_start;
  set.t_end = t_end;
  set.rank = state.rank;
  set.dims = dims;
  set.strategy = strategy;
  set.stats.seeded = seeded;
  std::vector<const Particle*> held;
  held.reserve(state.particles.size());
  for (const Particle& p : state.particles) {
    if (p.origin_rank != state.rank)
      throw Error(ErrorCode::InvalidArgument, "finalize_rank: particle held away from its origin rank");
    held.push_back(&p);
  }
  std::sort(held.begin(), held.end(), [](const Particle* a, const Particle* b) { return a->id < b->id; });
  for (const Particle* p : held) {
    switch (p->status) {
      case ParticleStatus::Active:
        set.flows.push_back({p->id, p->seed, p->pos, true, p->origin_rank});
        ++set.stats.stored;
        break;
      case ParticleStatus::TerminatedBoundary: ++set.stats.terminated_boundary; break;
      case ParticleStatus::ExitedDomain: ++set.stats.exited_domain; break;
    }
  }
  set.stats.discarded = set.stats.terminated_boundary + set.stats.exited_domain;
  return set;
}

FlowMapDataset run_extraction(const ExtractionConfig& config) {
  config.validate();
  const BlockDecomposition& decomp = config.decomp;
  const int ranks = decomp.rank_count();
  const int n_intervals = config.interval_count();
  const double dt = config.field.cycle_dt();
  TimeField field = config.field;

  WorkerPool pool(resolve_worker_count(config.workers, ranks));

  FlowMapDataset ds;
  ds.config = config;
  ds.sets.resize(static_cast<std::size_t>(n_intervals));

  std::vector<RankState> states(static_cast<std::size_t>(ranks));
  std::vector<std::uint64_t> seeded(static_cast<std::size_t>(ranks));
  std::vector<std::vector<StepResult>> scratch(static_cast<std::size_t>(ranks));
  std::vector<std::vector<TimingRecord>> timing(static_cast<std::size_t>(ranks));
  std::vector<Clock::time_point> advect_done(static_cast<std::size_t>(ranks));
  Mailboxes mail(ranks);

  auto record = [&](int rank, int cycle, Phase phase, double secs) {
    if (!config.record_timing) return;
    const bool write = (cycle + 1) % config.interval == 0;
    timing[static_cast<std::size_t>(rank)].push_back({rank, cycle, phase, secs, write});
  };
  auto load = [&](int cycle) {
    if (field.kind() == FieldKind::Gridded && field.loaded_cycle() != cycle) field.load_cycle(config.loader(cycle));
  };

  auto bto_cycle = [&](int r, int cycle) {
    RankState& st = states[static_cast<std::size_t>(r)];
    const Block& blk = decomp.block(r);
    const auto t0 = Clock::now();
    advect_active(st, field, cycle, [&blk](const Vec& x) { return blk.owns(x); }, scratch[static_cast<std::size_t>(r)]);
    const auto t1 = Clock::now();
    manage_bto(st, scratch[static_cast<std::size_t>(r)]);
    const auto t2 = Clock::now();
    record(r, cycle, Phase::Advect, seconds_between(t0, t1));
    record(r, cycle, Phase::Manage, seconds_between(t1, t2));
  };

  for (int k = 0; k < n_intervals; ++k) {
    const int first = k * config.interval;
    const int last = first + config.interval - 1;
    pool.run(ranks, [&](int r) {
      states[static_cast<std::size_t>(r)] = seed_rank(decomp, r, config.reduction);
      seeded[static_cast<std::size_t>(r)] = states[static_cast<std::size_t>(r)].particles.size();
    });

    if (config.strategy == Strategy::Bto) {
      if (field.kind() == FieldKind::Gridded) {
        for (int c = first; c <= last; ++c) {
          load(c);
          pool.run(ranks, [&](int r) { bto_cycle(r, c); });
        }
      } else {
        // No inter-rank dependencies: each rank runs its whole interval alone.
        pool.run(ranks, [&](int r) {
          for (int c = first; c <= last; ++c) bto_cycle(r, c);
        });
      }
    } else {
      for (int c = first; c <= last; ++c) {
        load(c);
        pool.run(ranks, [&](int r) {
          RankState& st = states[static_cast<std::size_t>(r)];
          const auto t0 = Clock::now();
          advect_active(st, field, c, [](const Vec&) { return true; }, scratch[static_cast<std::size_t>(r)]);
          const auto t1 = Clock::now();
          manage_exchange(st, scratch[static_cast<std::size_t>(r)], mail, decomp);
          const auto t2 = Clock::now();
          advect_done[static_cast<std::size_t>(r)] = t2;
          record(r, c, Phase::Advect, seconds_between(t0, t1));
          record(r, c, Phase::Manage, seconds_between(t1, t2));
        });
        const auto barrier = Clock::now();
        auto log = collect_messages(mail, c, false);
        ds.message_log.insert(ds.message_log.end(), log.begin(), log.end());
        pool.run(ranks, [&](int r) {
          const auto t0 = Clock::now();
          mail.deliver(states[static_cast<std::size_t>(r)]);
          const auto t1 = Clock::now();
          // Communication includes the wait at the post-advection barrier.
          record(r, c, Phase::Communicate,
                 seconds_between(advect_done[static_cast<std::size_t>(r)], barrier) + seconds_between(t0, t1));
        });
      }
      // Write cycle: route every particle back to its origin rank.
      const auto t0 = Clock::now();
      auto log = return_to_origin(states, mail, last);
      const auto t1 = Clock::now();
      ds.message_log.insert(ds.message_log.end(), log.begin(), log.end());
      for (int r = 0; r < ranks; ++r) record(r, last, Phase::Communicate, seconds_between(t0, t1) / ranks);
    }

    auto& sets = ds.sets[static_cast<std::size_t>(k)];
    sets.resize(static_cast<std::size_t>(ranks));
    pool.run(ranks, [&](int r) {
      sets[static_cast<std::size_t>(r)] =
          finalize_rank(states[static_cast<std::size_t>(r)], seeded[static_cast<std::size_t>(r)], k, first * dt,
                        (last + 1) * dt, decomp.dims(), config.strategy);
    });
  }

  for (auto& t : timing) ds.timing.insert(ds.timing.end(), t.begin(), t.end());
  return ds;
}

}  // namespace lbto
