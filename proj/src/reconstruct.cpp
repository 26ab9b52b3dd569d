#include "lbto/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace lbto {

namespace {

std::vector<Vec> seeds_of(const std::vector<BasisFlow>& flows) {
  std::vector<Vec> out;
  out.reserve(flows.size());
  for (const auto& f : flows) out.push_back(f.seed);
  return out;
}

// Snaps lattice coordinates onto nodes so that node queries are exact.
double snap(double u) {
  const double r = std::round(u);
  return std::abs(u - r) < 1e-9 ? r : u;
}

}  // namespace

const char* to_string(ReconMode m) { return m == ReconMode::Delaunay ? "delaunay" : "gridfill"; }

ReconMode parse_recon_mode(const std::string& name) {
  if (name == "delaunay") return ReconMode::Delaunay;
  if (name == "gridfill") return ReconMode::GridFill;
  throw Error(ErrorCode::InvalidArgument, "unknown reconstruction mode '" + name + "' (expected delaunay or gridfill)");
}

std::optional<Vec> interpolate_end(std::span<const BasisFlow> flows, const Triangulation& tri, const Vec& x) {
  const auto loc = tri.locate(x);
  if (!loc) return std::nullopt;
  Vec out{0, 0, 0};
  for (int k = 0; k <= tri.dims(); ++k) {
    const double w = loc->weights[k];
    if (w == 0.0) continue;
    const Vec& e = flows[static_cast<std::size_t>(loc->vertices[k])].end;
    for (int a = 0; a < 3; ++a) out[a] += w * e[a];
  }
  return out;
}

DelaunayInterpolator::DelaunayInterpolator(std::vector<BasisFlow> flows, int dims)
    : flows_(std::move(flows)), tri_(Triangulation::build(seeds_of(flows_), dims)) {}

std::optional<Vec> DelaunayInterpolator::end_of(const Vec& x) const { return interpolate_end(flows_, tri_, x); }

std::size_t LatticeMap::missing() const {
  return static_cast<std::size_t>(std::count(state.begin(), state.end(), NodeState::Missing));
}

FillReport fill_holes(LatticeMap& map) {
  FillReport report;
  const std::size_t n = map.size();
  std::vector<std::size_t> holes;
  bool any_valid = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (map.state[i] == NodeState::Missing) holes.push_back(i);
    if (map.state[i] == NodeState::Valid) any_valid = true;
  }
  if (holes.empty()) return report;
  if (!any_valid) throw Error(ErrorCode::UnfillableHole, "lattice has no valid node to fill from");

  const std::vector<NodeState> original = map.state;
  auto coords = [&](std::size_t i) {
    Index3 k;
    k[0] = static_cast<int>(i % map.count[0]);
    k[1] = static_cast<int>((i / map.count[0]) % map.count[1]);
    k[2] = static_cast<int>(i / (static_cast<std::size_t>(map.count[0]) * map.count[1]));
    return k;
  };

  std::vector<std::size_t> unbounded;
  for (std::size_t h : holes) {
    const Index3 k = coords(h);
    Vec sum{0, 0, 0};
    int axes = 0;
    for (int a = 0; a < map.dims; ++a) {
      std::optional<std::size_t> lo, hi;
      for (Index3 j = k; --j[a] >= 0;)
        if (original[map.index(j)] == NodeState::Valid) {
          lo = map.index(j);
          break;
        }
      for (Index3 j = k; ++j[a] < map.count[a];)
        if (original[map.index(j)] == NodeState::Valid) {
          hi = map.index(j);
          break;
        }
      if (!lo || !hi) continue;
      const double x0 = map.seeds[*lo][a], x1 = map.seeds[*hi][a], x = map.seeds[h][a];
      for (int c = 0; c < 3; ++c) sum[c] += lerp_nodes(x0, map.ends[*lo][c], x1, map.ends[*hi][c], x);
      ++axes;
    }
    if (axes == 0) {
      unbounded.push_back(h);
      continue;
    }
    map.ends[h] = (1.0 / axes) * sum;
    map.state[h] = NodeState::Synthetic;
    ++report.filled;
  }

  for (std::size_t h : unbounded) {
    // Breadth-first search over lattice neighbors for the closest valid node.
    const Index3 start = coords(h);
    std::vector<char> seen(n, 0);
    std::deque<Index3> queue{start};
    seen[h] = 1;
    std::optional<std::size_t> found;
    while (!queue.empty() && !found) {
      const Index3 cur = queue.front();
      queue.pop_front();
      for (int a = 0; a < map.dims && !found; ++a)
        for (int s : {-1, 1}) {
          Index3 nb = cur;
          nb[a] += s;
          if (nb[a] < 0 || nb[a] >= map.count[a]) continue;
          const std::size_t id = map.index(nb);
          if (seen[id]) continue;
          seen[id] = 1;
          if (original[id] == NodeState::Valid) {
            found = id;
            break;
          }
          queue.push_back(nb);
        }
    }
    map.ends[h] = map.ends[*found];
    map.state[h] = NodeState::NearestCopy;
    ++report.unfillable;
  }
  return report;
}

LatticeMap lattice_map_from_flows(const BlockDecomposition& decomp, const SeedLattice& lattice,
                                  std::span<const BasisFlow* const> flows, const Index3& first, const Index3& last) {
  LatticeMap map;
  map.dims = lattice.dims;
  map.first = first;
  for (int a = 0; a < 3; ++a) map.count[a] = a < lattice.dims ? last[a] - first[a] + 1 : 1;
  for (int a = 0; a < 3; ++a)
    if (map.count[a] < 1) throw Error(ErrorCode::InvalidArgument, "empty lattice range");
  map.seeds.resize(map.size());
  map.ends.resize(map.size());
  map.state.assign(map.size(), NodeState::Missing);
  for (int k = 0; k < map.count[2]; ++k)
    for (int j = 0; j < map.count[1]; ++j)
      for (int i = 0; i < map.count[0]; ++i) {
        const Index3 local{i, j, k};
        const Index3 global{first[0] + i, first[1] + j, first[2] + k};
        map.seeds[map.index(local)] = lattice.position(decomp, global);
      }
  for (const BasisFlow* f : flows) {
    if (!f->valid) continue;
    const auto g = lattice.index_of(decomp, f->seed);
    if (!g) throw Error(ErrorCode::InvalidArgument, "basis flow seed is not on the seed lattice");
    Index3 local{0, 0, 0};
    bool inside = true;
    for (int a = 0; a < lattice.dims; ++a) {
      local[a] = (*g)[a] - first[a];
      inside = inside && local[a] >= 0 && local[a] < map.count[a];
    }
    if (!inside) continue;
    const std::size_t id = map.index(local);
    map.ends[id] = f->end;
    map.state[id] = NodeState::Valid;
  }
  return map;
}

GridFillInterpolator::GridFillInterpolator(LatticeMap map, const BlockDecomposition& decomp,
                                           const SeedLattice& lattice)
    : map_(std::move(map)) {
  report_ = fill_holes(map_);
  origin_ = lattice.position(decomp, map_.first);
  for (int a = 0; a < map_.dims; ++a)
    step_[a] = decomp.domain().extent(a) / (decomp.global_dims()[a] - 1) * lattice.stride;
}

std::optional<Vec> GridFillInterpolator::end_of(const Vec& x) const {
  const int d = map_.dims;
  Index3 cell{0, 0, 0};
  Vec f{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const double u = snap((x[a] - origin_[a]) / step_[a]);
    const int n = map_.count[a];
    if (u < 0 || u > n - 1) return std::nullopt;
    if (n == 1) {
      if (u != 0) return std::nullopt;
      cell[a] = 0;
      f[a] = 0;
      continue;
    }
    cell[a] = std::min(static_cast<int>(std::floor(u)), n - 2);
    f[a] = u - cell[a];
  }

  // Corner offsets (bit a = axis a) and weights of the containing simplex.
  std::array<int, 4> corner{};
  std::array<double, 4> w{};
  int m = 0;
  if (d == 2) {
    if (f[0] >= f[1]) {
      corner = {0b00, 0b01, 0b11, 0};
      w = {1.0 - f[0], f[0] - f[1], f[1], 0};
    } else {
      corner = {0b00, 0b10, 0b11, 0};
      w = {1.0 - f[1], f[1] - f[0], f[0], 0};
    }
    m = 3;
  } else {
    const bool even = ((cell[0] + cell[1] + cell[2]) & 1) == 0;
    const std::array<int, 4> cut = even ? std::array<int, 4>{0b000, 0b011, 0b101, 0b110}
                                        : std::array<int, 4>{0b001, 0b010, 0b100, 0b111};
    bool found = false;
    for (int c : cut) {
      Vec g;
      for (int a = 0; a < 3; ++a) g[a] = (c >> a) & 1 ? 1.0 - f[a] : f[a];
      if (g[0] + g[1] + g[2] <= 1.0) {
        corner = {c, c ^ 0b001, c ^ 0b010, c ^ 0b100};
        w = {1.0 - g[0] - g[1] - g[2], g[0], g[1], g[2]};
        found = true;
        break;
      }
    }
    if (!found) {
      const double x0 = f[0], y0 = f[1], z0 = f[2];
      if (even) {
        const double w111 = 0.5 * (x0 + y0 + z0 - 1.0);
        corner = {0b001, 0b010, 0b100, 0b111};
        w = {x0 - w111, y0 - w111, z0 - w111, w111};
      } else {
        corner = {0b000, 0b011, 0b101, 0b110};
        w = {1.0 - 0.5 * (x0 + y0 + z0), 0.5 * (x0 + y0 - z0), 0.5 * (x0 - y0 + z0), 0.5 * (-x0 + y0 + z0)};
      }
    }
    m = 4;
  }

  Vec out{0, 0, 0};
  for (int v = 0; v < m; ++v) {
    if (w[v] == 0.0) continue;
    Index3 node = cell;
    for (int a = 0; a < d; ++a) node[a] += (corner[v] >> a) & 1;
    const Vec& e = map_.ends[map_.index(node)];
    for (int c = 0; c < 3; ++c) out[c] += w[v] * e[c];
  }
  return out;
}

Reconstructor::Reconstructor(const FlowMapDataset& dataset, ReconMode mode)
    : ds_(dataset), mode_(mode), lattice_(SeedLattice::for_decomposition(dataset.config.decomp, dataset.config.reduction)) {}

const FlowInterpolator& Reconstructor::neighborhood(int interval, int rank) const {
  std::lock_guard lock(mutex_);
  auto& slot = cache_[{interval, rank}];
  if (slot) return *slot;

  const BlockDecomposition& decomp = ds_.config.decomp;
  const auto& sets = ds_.sets.at(static_cast<std::size_t>(interval));
  const std::vector<int> loaded = decomp.neighborhood(rank);
  if (mode_ == ReconMode::Delaunay) {
    std::vector<BasisFlow> flows;
    for (int r : loaded)
      for (const auto& f : sets.at(static_cast<std::size_t>(r)).flows)
        if (f.valid) flows.push_back(f);
    slot = std::make_unique<DelaunayInterpolator>(std::move(flows), decomp.dims());
  } else {
    std::vector<const BasisFlow*> flows;
    Index3 first{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    Index3 last{-1, -1, -1};
    for (int r : loaded) {
      for (const auto& f : sets.at(static_cast<std::size_t>(r)).flows) flows.push_back(&f);
      const auto [lo, hi] = lattice_.block_range(decomp.block(r));
      for (int a = 0; a < 3; ++a) {
        first[a] = std::min(first[a], lo[a]);
        last[a] = std::max(last[a], hi[a]);
      }
    }
    slot = std::make_unique<GridFillInterpolator>(lattice_map_from_flows(decomp, lattice_, flows, first, last), decomp,
                                                  lattice_);
  }
  return *slot;
}

std::optional<Vec> Reconstructor::end_of(int interval, const Vec& x) const {
  const auto owner = ds_.config.decomp.owner_of(x);
  if (!owner) return std::nullopt;
  return neighborhood(interval, *owner).end_of(x);
}

Pathline trace_pathline(const Reconstructor& recon, const Vec& seed, int start_interval, int end_interval) {
  const FlowMapDataset& ds = recon.dataset();
  const Box& domain = ds.config.decomp.domain();
  const double interval_time = ds.config.interval * ds.config.field.cycle_dt();
  Pathline line;
  line.seed = seed;
  if (!domain.contains(seed)) {
    line.status = Pathline::Status::TruncatedOutOfDomain;
    return line;
  }
  line.samples.push_back({start_interval * interval_time, seed});
  Vec x = seed;
  for (int k = start_interval; k < end_interval; ++k) {
    const auto owner = ds.config.decomp.owner_of(x);
    if (!owner) {
      line.status = Pathline::Status::TruncatedOutOfDomain;
      break;
    }
    const auto end = recon.neighborhood(k, *owner).end_of(x);
    if (!end) {
      line.status = Pathline::Status::TruncatedOutOfHull;
      break;
    }
    if (!domain.contains(*end)) {
      line.status = Pathline::Status::TruncatedOutOfDomain;
      break;
    }
    x = *end;
    line.samples.push_back({(k + 1) * interval_time, x});
  }
  return line;
}

Pathline trace_pathline(const FlowMapDataset& dataset, const Vec& seed, int start_interval, int end_interval,
                        ReconMode mode) {
  const Reconstructor recon(dataset, mode);
  return trace_pathline(recon, seed, start_interval, end_interval);
}

FlowMapReconstruction reconstruct_flowmap(const Reconstructor& recon, std::span<const Vec> reference_seeds,
                                          int interval) {
  FlowMapReconstruction out;
  out.ends.reserve(reference_seeds.size());
  for (const Vec& s : reference_seeds) {
    out.ends.push_back(recon.end_of(interval, s));
    if (!out.ends.back()) ++out.outside;
  }
  return out;
}

FlowMapReconstruction reconstruct_flowmap(const FlowMapDataset& dataset, std::span<const Vec> reference_seeds,
                                          int interval, ReconMode mode) {
  const Reconstructor recon(dataset, mode);
  return reconstruct_flowmap(recon, reference_seeds, interval);
}

LatticeMap global_lattice_map(const FlowMapDataset& dataset, int interval, FillReport* report) {
  const BlockDecomposition& decomp = dataset.config.decomp;
  const SeedLattice lattice = SeedLattice::for_decomposition(decomp, dataset.config.reduction);
  std::vector<const BasisFlow*> flows;
  for (const auto& set : dataset.sets.at(static_cast<std::size_t>(interval)))
    for (const auto& f : set.flows) flows.push_back(&f);
  Index3 last{0, 0, 0};
  for (int a = 0; a < 3; ++a) last[a] = lattice.count[a] - 1;
  LatticeMap map = lattice_map_from_flows(decomp, lattice, flows, {0, 0, 0}, last);
  const FillReport r = fill_holes(map);
  if (report) *report = r;
  return map;
}

}  // namespace lbto
