#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lbto/advect.hpp"
#include "lbto/domain.hpp"
#include "lbto/fields.hpp"

namespace lbto {

enum class Strategy : std::uint8_t { Exchange = 0, Bto = 1 };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

enum class ParticleStatus : std::uint8_t { Active, TerminatedBoundary, ExitedDomain };

/// Globally unique particle id: origin rank in the high word, seed index in the low word.
inline std::uint64_t make_particle_id(int origin_rank, std::uint32_t seed_index) {
  return (static_cast<std::uint64_t>(origin_rank) << 32) | seed_index;
}

struct Particle {
  std::uint64_t id = 0;
  Vec seed{};
  Vec pos{};
  ParticleStatus status = ParticleStatus::Active;
  int origin_rank = 0;
};

struct BasisFlow {
  std::uint64_t id = 0;
  Vec seed{};
  Vec end{};
  bool valid = true;
  int origin_rank = 0;

  bool operator==(const BasisFlow&) const = default;
};

struct FlowStats {
  std::uint64_t seeded = 0;
  std::uint64_t stored = 0;
  std::uint64_t discarded = 0;
  std::uint64_t terminated_boundary = 0;
  std::uint64_t exited_domain = 0;

  bool operator==(const FlowStats&) const = default;
};

struct BasisFlowSet {
  int interval_index = 0;
  double t_start = 0;
  double t_end = 0;
  int rank = 0;
  int dims = 3;
  Strategy strategy = Strategy::Exchange;
  std::vector<BasisFlow> flows;  // stored (valid) flows, ascending id
  FlowStats stats;
};

enum class Phase : std::uint8_t { Advect, Manage, Communicate };
const char* to_string(Phase p);

struct TimingRecord {
  int rank = 0;
  int cycle = 0;
  Phase phase = Phase::Advect;
  double wall_seconds = 0;
  bool write_cycle = false;
};

/// Particles moved between ranks in one cycle. Return-to-origin traffic at write
/// cycles is flagged.
struct MessageRecord {
  int cycle = 0;
  int from = 0;
  int to = 0;
  std::uint64_t count = 0;
  bool is_return = false;

  bool operator==(const MessageRecord&) const = default;
};

struct ExtractionConfig {
  TimeField field;
  BlockDecomposition decomp;
  int interval = 25;
  int reduction = 8;
  int total_cycles = 100;
  Strategy strategy = Strategy::Bto;
  std::uint64_t rng_seed = 0;  // reserved; extraction is deterministic
  int workers = -1;            // see resolve_worker_count
  bool record_timing = false;
  SnapshotLoader loader;       // required for gridded fields

  int interval_count() const { return total_cycles / interval; }
  void validate() const;
};

struct FlowMapDataset {
  ExtractionConfig config;
  std::vector<std::vector<BasisFlowSet>> sets;  // [interval][rank]
  std::vector<MessageRecord> message_log;
  std::vector<TimingRecord> timing;

  std::uint64_t total_messages() const;
  FlowStats interval_stats(int interval) const;
};

struct RankState {
  int rank = 0;
  std::vector<Particle> particles;
};

/// Per-(sender, receiver) FIFO queues between simulated ranks.
class Mailboxes {
 public:
  explicit Mailboxes(int ranks)
      : ranks_(ranks), boxes_(static_cast<std::size_t>(ranks) * static_cast<std::size_t>(ranks)) {}

  int ranks() const { return ranks_; }
  void send(int from, int to, const Particle& p) { box(from, to).push_back(p); }
  std::size_t pending(int from, int to) const { return boxes_[index(from, to)].size(); }
  /// Moves everything addressed to `state.rank` into it, in sender order.
  void deliver(RankState& state);

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(ranks_) + static_cast<std::size_t>(to);
  }
  std::vector<Particle>& box(int from, int to) { return boxes_[index(from, to)]; }

  int ranks_;
  std::vector<std::vector<Particle>> boxes_;
};

/// Seeds a rank's particles for a new interval.
RankState seed_rank(const BlockDecomposition& decomp, int rank, int reduction);

/// One BTO cycle for a rank: particles whose step would leave the owning block
/// are terminated in place. Produces no messages.
void step_bto(RankState& state, const BlockDecomposition& decomp, const TimeField& field, int cycle);

/// Advection half of an Exchange cycle for one rank: particles landing in
/// another block are posted to that rank's mailbox.
void exchange_advect(RankState& state, Mailboxes& mail, const BlockDecomposition& decomp, const TimeField& field,
                     int cycle);

/// A full Exchange cycle over all ranks: advect, then deliver. Returns the
/// per-pair transfer counts of this cycle.
std::vector<MessageRecord> step_exchange(std::span<RankState> states, Mailboxes& mail,
                                         const BlockDecomposition& decomp, const TimeField& field, int cycle);

/// Exchange write-cycle routing: every particle held away from its origin rank
/// is sent home. Returns the transfer counts (flagged as returns).
std::vector<MessageRecord> return_to_origin(std::span<RankState> states, Mailboxes& mail, int cycle);

/// Builds a rank's BasisFlowSet from the particles it holds at a write cycle.
BasisFlowSet finalize_rank(const RankState& state, std::uint64_t seeded, int interval_index, double t_start,
                           double t_end, int dims, Strategy strategy);

FlowMapDataset run_extraction(const ExtractionConfig& config);

}  // namespace lbto
