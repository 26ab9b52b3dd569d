#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "lbto/extract.hpp"
#include "lbto/triangulation.hpp"

namespace lbto {

enum class ReconMode { Delaunay, GridFill };

const char* to_string(ReconMode m);
ReconMode parse_recon_mode(const std::string& name);

/// Linear interpolation between (x0, f0) and (x1, f1) evaluated at x.
inline double lerp_nodes(double x0, double f0, double x1, double f1, double x) {
  return (x - x0) / (x1 - x0) * f1 + (x1 - x) / (x1 - x0) * f0;
}

/// Interpolated end position of a basis-flow neighborhood at x.
class FlowInterpolator {
 public:
  virtual ~FlowInterpolator() = default;
  virtual std::optional<Vec> end_of(const Vec& x) const = 0;
};

/// Barycentric interpolation over a triangulation of the flow seeds. The
/// triangulation must have been built over exactly these seeds, in order.
std::optional<Vec> interpolate_end(std::span<const BasisFlow> flows, const Triangulation& tri, const Vec& x);

class DelaunayInterpolator final : public FlowInterpolator {
 public:
  DelaunayInterpolator(std::vector<BasisFlow> flows, int dims);
  std::optional<Vec> end_of(const Vec& x) const override;
  const Triangulation& triangulation() const { return tri_; }

 private:
  std::vector<BasisFlow> flows_;
  Triangulation tri_;
};

enum class NodeState : std::uint8_t { Valid, Missing, Synthetic, NearestCopy };

/// Flow-map values on a box of the seed lattice. Local index (0,0,0) is global
/// lattice index `first`; ordering is x-fastest.
struct LatticeMap {
  int dims = 3;
  Index3 first{0, 0, 0};
  Index3 count{1, 1, 1};
  std::vector<Vec> seeds;
  std::vector<Vec> ends;
  std::vector<NodeState> state;

  std::size_t size() const { return static_cast<std::size_t>(count[0]) * count[1] * count[2]; }
  std::size_t index(const Index3& k) const {
    return static_cast<std::size_t>(k[0]) + static_cast<std::size_t>(count[0]) * (k[1] + static_cast<std::size_t>(count[1]) * k[2]);
  }
  std::size_t missing() const;
};

struct FillReport {
  std::size_t filled = 0;      // set by axis interpolation
  std::size_t unfillable = 0;  // copied from the nearest valid node instead
};

/// Fills every Missing node from the nearest Valid nodes along each lattice
/// axis: distance-weighted linear interpolation per axis with valid nodes on
/// both sides, averaged over those axes. Nodes with no bounded axis take the
/// nearest valid node's value and are flagged NearestCopy. Only originally
/// valid values feed the interpolation.
FillReport fill_holes(LatticeMap& map);

/// Builds the lattice map for global lattice indices [first, last] from the
/// stored flows; nodes without a flow are Missing.
LatticeMap lattice_map_from_flows(const BlockDecomposition& decomp, const SeedLattice& lattice,
                                  std::span<const BasisFlow* const> flows, const Index3& first, const Index3& last);

/// Piecewise-linear interpolation on a complete lattice: 2 triangles per cell in
/// 2D, 5 tetrahedra per cell in 3D (mirrored on alternate cells so shared faces
/// agree).
class GridFillInterpolator final : public FlowInterpolator {
 public:
  GridFillInterpolator(LatticeMap map, const BlockDecomposition& decomp, const SeedLattice& lattice);
  std::optional<Vec> end_of(const Vec& x) const override;
  const LatticeMap& map() const { return map_; }
  const FillReport& fill_report() const { return report_; }

 private:
  LatticeMap map_;
  FillReport report_;
  Vec origin_{};  // position of local node (0,0,0)
  Vec step_{1, 1, 1};
};

/// Post hoc access to a dataset's flow maps. Each (interval, rank) neighborhood
/// is assembled from the rank's own basis flows and those of every adjacent
/// rank, built on first use and cached.
class Reconstructor {
 public:
  Reconstructor(const FlowMapDataset& dataset, ReconMode mode);

  const FlowMapDataset& dataset() const { return ds_; }
  ReconMode mode() const { return mode_; }
  const SeedLattice& lattice() const { return lattice_; }

  const FlowInterpolator& neighborhood(int interval, int rank) const;
  /// End of the interval's flow map at x, using x's owning rank neighborhood.
  std::optional<Vec> end_of(int interval, const Vec& x) const;

 private:
  const FlowMapDataset& ds_;
  ReconMode mode_;
  SeedLattice lattice_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<FlowInterpolator>> cache_;
};

/// Stitches a pathline from `seed` over intervals [start_interval, end_interval).
Pathline trace_pathline(const Reconstructor& recon, const Vec& seed, int start_interval, int end_interval);
Pathline trace_pathline(const FlowMapDataset& dataset, const Vec& seed, int start_interval, int end_interval,
                        ReconMode mode);

struct FlowMapReconstruction {
  std::vector<std::optional<Vec>> ends;  // nullopt where the seed is outside every hull
  std::size_t outside = 0;
};

FlowMapReconstruction reconstruct_flowmap(const Reconstructor& recon, std::span<const Vec> reference_seeds,
                                          int interval);
FlowMapReconstruction reconstruct_flowmap(const FlowMapDataset& dataset, std::span<const Vec> reference_seeds,
                                          int interval, ReconMode mode);

/// Whole-domain lattice of one interval's flow map with holes filled (FTLE input).
LatticeMap global_lattice_map(const FlowMapDataset& dataset, int interval, FillReport* report = nullptr);

}  // namespace lbto
