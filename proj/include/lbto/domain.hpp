#pragma once

#include <optional>
#include <vector>

#include "lbto/types.hpp"

namespace lbto {

/// One rank's block. Ownership is half-open [lo, hi) per axis, except on the
/// global upper boundary, which the block owns (closed).
struct Block {
  int rank = 0;
  Index3 coord{0, 0, 0};
  Index3 node_begin{0, 0, 0};  // first grid node owned on each axis
  Index3 node_end{1, 1, 1};    // one past the last owned node
  Box box;
  std::array<bool, 3> closed_hi{true, true, true};

  bool owns(const Vec& x) const {
    for (int a = 0; a < box.dims; ++a) {
      if (!(x[a] >= box.lo[a])) return false;
      if (closed_hi[a] ? !(x[a] <= box.hi[a]) : !(x[a] < box.hi[a])) return false;
    }
    return true;
  }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < box.dims; ++a) n *= static_cast<std::size_t>(node_end[a] - node_begin[a]);
    return n;
  }
};

/// Partition of a uniform node grid into rank_layout blocks. Node counts are
/// split as evenly as possible with the remainder going to low-index blocks;
/// the face between blocks sits at the domain fraction begin_node / node_count.
class BlockDecomposition {
 public:
  static BlockDecomposition decompose(const Box& domain, const Index3& global_dims, const Index3& rank_layout);

  const Box& domain() const { return domain_; }
  int dims() const { return domain_.dims; }
  const Index3& global_dims() const { return global_dims_; }
  const Index3& layout() const { return layout_; }
  int rank_count() const { return static_cast<int>(blocks_.size()); }
  const Block& block(int rank) const { return blocks_.at(static_cast<std::size_t>(rank)); }
  const std::vector<Block>& blocks() const { return blocks_; }

  int rank_of(const Index3& block_coord) const {
    return block_coord[0] + layout_[0] * (block_coord[1] + layout_[1] * block_coord[2]);
  }

  /// Coordinate of grid node `index` along `axis`.
  double node_coord(int axis, int index) const;

  std::optional<int> owner_of(const Vec& x) const;

  /// Ranks whose blocks touch `rank` across a face, edge or corner, plus `rank`
  /// itself, ascending.
  std::vector<int> neighborhood(int rank) const;

  /// Interior block faces as (axis, coordinate) pairs.
  std::vector<std::pair<int, double>> internal_faces() const;
  /// Distance from x to the nearest internal face (infinity for one block).
  double distance_to_internal_face(const Vec& x) const;

  /// Smallest cell side over the axes in use.
  double cell_side() const;

 private:
  Box domain_;
  Index3 global_dims_{1, 1, 1};
  Index3 layout_{1, 1, 1};
  std::array<std::vector<int>, 3> node_splits_;    // layout[a] + 1 entries
  std::array<std::vector<double>, 3> face_coords_;  // layout[a] + 1 entries
  std::vector<Block> blocks_;
};

/// Per-axis stride for a 1:X reduction: the smallest s with s^dims >= X.
int reduction_stride(int reduction, int dims);

/// The global seed lattice: every stride-th grid node on each axis, starting at
/// a centring offset of ((n - 1) mod stride) / 2.
struct SeedLattice {
  int dims = 3;
  int stride = 1;
  Index3 offset{0, 0, 0};
  Index3 count{1, 1, 1};

  static SeedLattice for_decomposition(const BlockDecomposition& decomp, int reduction);

  int node_of(int axis, int k) const { return offset[axis] + k * stride; }
  std::size_t size() const {
    return static_cast<std::size_t>(count[0]) * count[1] * count[2];
  }
  std::size_t linear(const Index3& k) const {
    return static_cast<std::size_t>(k[0]) + static_cast<std::size_t>(count[0]) * (k[1] + static_cast<std::size_t>(count[1]) * k[2]);
  }
  Vec position(const BlockDecomposition& decomp, const Index3& k) const;
  /// Lattice index of a seed position, if it lies on the lattice.
  std::optional<Index3> index_of(const BlockDecomposition& decomp, const Vec& x) const;
  /// Lattice index range [first, last] per axis falling inside the block; empty
  /// axes have first > last.
  std::pair<Index3, Index3> block_range(const Block& block) const;
};

struct SeedSet {
  int owner_rank = 0;
  int reduction = 1;
  std::vector<Vec> positions;
  std::vector<Index3> lattice_index;
};

SeedSet seed_uniform(const BlockDecomposition& decomp, int rank, int reduction);

}  // namespace lbto
