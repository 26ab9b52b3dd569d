#pragma once

#include "lbto/reconstruct.hpp"

namespace lbto {

struct FtleField {
  int dims = 3;
  Index3 count{1, 1, 1};
  Vec spacing{1, 1, 1};
  double duration = 1;
  std::vector<double> values;  // x-fastest
  std::size_t degenerate = 0;  // nodes where the largest Cauchy-Green eigenvalue was not positive

  std::size_t index(const Index3& k) const {
    return static_cast<std::size_t>(k[0]) + static_cast<std::size_t>(count[0]) * (k[1] + static_cast<std::size_t>(count[1]) * k[2]);
  }
};

/// Largest eigenvalue of a symmetric matrix (upper-left dims x dims block used).
double largest_symmetric_eigenvalue(const std::array<std::array<double, 3>, 3>& m, int dims);

/// FTLE of a complete lattice flow map: central differences in the interior,
/// one-sided at the lattice edges, ln(sqrt(lambda_max(C))) / |T|.
FtleField compute_ftle(const LatticeMap& map, const Vec& spacing, double duration);

}  // namespace lbto
