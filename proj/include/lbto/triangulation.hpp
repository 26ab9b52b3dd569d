#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lbto/types.hpp"

namespace lbto {

/// Tolerances used by the geometric predicates, on coordinates normalized to
/// the unit bounding box of the input.
inline constexpr double kGeomEps = 1e-10;
inline constexpr double kBaryEps = 1e-9;
inline constexpr double kVolumeEps = 1e-12;

struct SimplexLocation {
  int simplex = -1;
  std::array<int, 4> vertices{-1, -1, -1, -1};
  std::array<double, 4> weights{0, 0, 0, 0};
};

/// Delaunay triangulation (2D or 3D) built by incremental Bowyer-Watson.
///
/// Points at infinity close the hull during construction, so the finite
/// simplices tile the convex hull of the input exactly. Points on a circumsphere
/// are not treated as inside it. Duplicate points are skipped.
class Triangulation {
 public:
  static Triangulation build(std::span<const Vec> points, int dims);

  int dims() const { return dims_; }
  const std::vector<Vec>& points() const { return points_; }
  std::size_t simplex_count() const { return simplices_.size(); }
  /// Vertex indices into points(); entries beyond dims() are -1.
  const std::array<int, 4>& simplex(std::size_t i) const { return simplices_[i]; }
  /// Neighbor opposite vertex j, or -1 on the hull.
  const std::array<int, 4>& neighbors(std::size_t i) const { return neighbors_[i]; }
  /// Input indices that were not inserted (duplicates).
  const std::vector<int>& skipped() const { return skipped_; }

  /// Containing simplex and barycentric weights, or nullopt outside the hull.
  std::optional<SimplexLocation> locate(const Vec& x) const;

  /// Barycentric weights of x in simplex i (unclamped).
  std::array<double, 4> barycentric(std::size_t i, const Vec& x) const;

 private:
  void build_locator();

  int dims_ = 3;
  std::vector<Vec> points_;
  std::vector<std::array<int, 4>> simplices_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<int> skipped_;

  // Uniform bucket grid over the bounding box for point location.
  Vec box_lo_{};
  Vec bucket_size_{1, 1, 1};
  Index3 bucket_dims_{1, 1, 1};
  std::vector<std::vector<int>> buckets_;
};

}  // namespace lbto
