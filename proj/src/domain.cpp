#include "lbto/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbto {

BlockDecomposition BlockDecomposition::decompose(const Box& domain, const Index3& global_dims,
                                                 const Index3& rank_layout) {
  if (!domain.valid()) throw Error(ErrorCode::InvalidArgument, "decomposition needs a valid domain");
  BlockDecomposition d;
  d.domain_ = domain;
  d.global_dims_ = global_dims;
  d.layout_ = rank_layout;
  for (int a = domain.dims; a < 3; ++a) {
    d.global_dims_[a] = 1;
    if (rank_layout[a] != 1) throw Error(ErrorCode::InvalidLayout, "layout must be 1 along unused axes");
    d.layout_[a] = 1;
  }
  for (int a = 0; a < 3; ++a) {
    const int n = d.global_dims_[a];
    const int parts = d.layout_[a];
    if (a < domain.dims && n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs >= 2 nodes per axis");
    if (parts < 1 || parts > n)
      throw Error(ErrorCode::InvalidLayout, "axis " + std::to_string(a) + " splits " + std::to_string(n) +
                                                " nodes into " + std::to_string(parts) + " blocks");
    auto& splits = d.node_splits_[a];
    auto& faces = d.face_coords_[a];
    splits.assign(static_cast<std::size_t>(parts) + 1, 0);
    faces.assign(static_cast<std::size_t>(parts) + 1, 0.0);
    const int base = n / parts;
    const int rem = n % parts;
    for (int b = 0; b < parts; ++b) splits[b + 1] = splits[b] + base + (b < rem ? 1 : 0);
    if (a < domain.dims) {
      for (int b = 0; b <= parts; ++b)
        faces[b] = b == parts ? domain.hi[a]
                              : domain.lo[a] + domain.extent(a) * (static_cast<double>(splits[b]) / n);
    }
  }

  d.blocks_.resize(static_cast<std::size_t>(d.layout_[0]) * d.layout_[1] * d.layout_[2]);
  for (int bz = 0; bz < d.layout_[2]; ++bz)
    for (int by = 0; by < d.layout_[1]; ++by)
      for (int bx = 0; bx < d.layout_[0]; ++bx) {
        const Index3 c{bx, by, bz};
        Block& blk = d.blocks_[static_cast<std::size_t>(d.rank_of(c))];
        blk.rank = d.rank_of(c);
        blk.coord = c;
        blk.box.dims = domain.dims;
        for (int a = 0; a < 3; ++a) {
          blk.node_begin[a] = d.node_splits_[a][c[a]];
          blk.node_end[a] = d.node_splits_[a][c[a] + 1];
          blk.closed_hi[a] = c[a] == d.layout_[a] - 1;
          if (a < domain.dims) {
            blk.box.lo[a] = d.face_coords_[a][c[a]];
            blk.box.hi[a] = d.face_coords_[a][c[a] + 1];
          }
        }
      }
  return d;
}

double BlockDecomposition::node_coord(int axis, int index) const {
  const int n = global_dims_[axis];
  if (index == n - 1) return domain_.hi[axis];
  return domain_.lo[axis] + domain_.extent(axis) * (static_cast<double>(index) / (n - 1));
}

std::optional<int> BlockDecomposition::owner_of(const Vec& x) const {
  if (!domain_.contains(x)) return std::nullopt;
  Index3 c{0, 0, 0};
  for (int a = 0; a < domain_.dims; ++a) {
    const auto& faces = face_coords_[a];
    // Last interior face <= x; the global upper face belongs to the last block.
    const auto it = std::upper_bound(faces.begin() + 1, faces.end() - 1, x[a]);
    c[a] = static_cast<int>(it - (faces.begin() + 1));
  }
  return rank_of(c);
}

std::vector<int> BlockDecomposition::neighborhood(int rank) const {
  const Index3 c = block(rank).coord;
  std::vector<int> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Index3 n{c[0] + dx, c[1] + dy, c[2] + dz};
        bool ok = true;
        for (int a = 0; a < 3; ++a) ok = ok && n[a] >= 0 && n[a] < layout_[a];
        if (ok) out.push_back(rank_of(n));
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, double>> BlockDecomposition::internal_faces() const {
  std::vector<std::pair<int, double>> out;
  for (int a = 0; a < domain_.dims; ++a)
    for (int b = 1; b < layout_[a]; ++b) out.emplace_back(a, face_coords_[a][b]);
  return out;
}

double BlockDecomposition::distance_to_internal_face(const Vec& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [axis, coord] : internal_faces()) best = std::min(best, std::abs(x[axis] - coord));
  return best;
}

double BlockDecomposition::cell_side() const {
  double c = std::numeric_limits<double>::infinity();
  for (int a = 0; a < domain_.dims; ++a) c = std::min(c, domain_.extent(a) / (global_dims_[a] - 1));
  return c;
}

int reduction_stride(int reduction, int dims) {
  if (reduction < 1) throw Error(ErrorCode::InvalidArgument, "reduction must be >= 1");
  int s = 1;
  auto power = [dims](long long v) {
    long long p = 1;
    for (int i = 0; i < dims; ++i) p *= v;
    return p;
  };
  while (power(s) < reduction) ++s;
  return s;
}

SeedLattice SeedLattice::for_decomposition(const BlockDecomposition& decomp, int reduction) {
  SeedLattice lat;
  lat.dims = decomp.dims();
  lat.stride = reduction_stride(reduction, lat.dims);
  for (int a = 0; a < 3; ++a) {
    if (a >= lat.dims) {
      lat.offset[a] = 0;
      lat.count[a] = 1;
      continue;
    }
    const int n = decomp.global_dims()[a];
    lat.offset[a] = ((n - 1) % lat.stride) / 2;
    lat.count[a] = (n - 1 - lat.offset[a]) / lat.stride + 1;
  }
  return lat;
}

Vec SeedLattice::position(const BlockDecomposition& decomp, const Index3& k) const {
  Vec x{0, 0, 0};
  for (int a = 0; a < dims; ++a) x[a] = decomp.node_coord(a, node_of(a, k[a]));
  return x;
}

std::optional<Index3> SeedLattice::index_of(const BlockDecomposition& decomp, const Vec& x) const {
  Index3 k{0, 0, 0};
  for (int a = 0; a < dims; ++a) {
    const double h = decomp.domain().extent(a) / (decomp.global_dims()[a] - 1);
    const double node = (x[a] - decomp.domain().lo[a]) / h;
    const double kk = (node - offset[a]) / stride;
    const double r = std::round(kk);
    if (std::abs(kk - r) > 1e-6 || r < 0 || r >= count[a]) return std::nullopt;
    k[a] = static_cast<int>(r);
  }
  return k;
}

std::pair<Index3, Index3> SeedLattice::block_range(const Block& block) const {
  Index3 first{0, 0, 0};
  Index3 last{0, 0, 0};
  for (int a = 0; a < dims; ++a) {
    // Smallest k with offset + k*stride >= node_begin, largest with < node_end.
    const int lo = block.node_begin[a] - offset[a];
    const int hi = block.node_end[a] - 1 - offset[a];
    first[a] = lo <= 0 ? 0 : (lo + stride - 1) / stride;
    last[a] = hi < 0 ? -1 : std::min(hi / stride, count[a] - 1);
  }
  return {first, last};
}

SeedSet seed_uniform(const BlockDecomposition& decomp, int rank, int reduction) {
  const Block& blk = decomp.block(rank);
  if (blk.node_count() == 0) throw Error(ErrorCode::EmptyBlock, "rank " + std::to_string(rank) + " owns no nodes");
  const SeedLattice lat = SeedLattice::for_decomposition(decomp, reduction);
  const auto [first, last] = lat.block_range(blk);
  SeedSet set;
  set.owner_rank = rank;
  set.reduction = reduction;
  for (int k = first[2]; k <= last[2]; ++k)
    for (int j = first[1]; j <= last[1]; ++j)
      for (int i = first[0]; i <= last[0]; ++i) {
        const Index3 idx{i, j, k};
        set.positions.push_back(lat.position(decomp, idx));
        set.lattice_index.push_back(idx);
      }
  return set;
}

}  // namespace lbto
