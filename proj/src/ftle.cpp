#include "lbto/ftle.hpp"

#include <algorithm>
#include <cmath>

namespace lbto {

double largest_symmetric_eigenvalue(const std::array<std::array<double, 3>, 3>& m, int dims) {
  if (dims == 1) return m[0][0];
  if (dims == 2) {
    const double tr = m[0][0] + m[1][1];
    const double diff = m[0][0] - m[1][1];
    return 0.5 * tr + 0.5 * std::sqrt(diff * diff + 4.0 * m[0][1] * m[0][1]);
  }
  // Cyclic Jacobi rotations until the off-diagonal mass is negligible.
  auto a = m;
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off <= 1e-24 * std::max(diag, 1e-300)) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  return std::max({a[0][0], a[1][1], a[2][2]});
}

FtleField compute_ftle(const LatticeMap& map, const Vec& spacing, double duration) {
  if (!(duration != 0)) throw Error(ErrorCode::InvalidArgument, "FTLE duration must be nonzero");
  if (map.missing() != 0) throw Error(ErrorCode::InvalidArgument, "FTLE needs a complete lattice; fill holes first");
  const int d = map.dims;
  FtleField out;
  out.dims = d;
  out.count = map.count;
  out.spacing = spacing;
  out.duration = duration;
  out.values.assign(map.size(), 0.0);

  for (int k = 0; k < map.count[2]; ++k)
    for (int j = 0; j < map.count[1]; ++j)
      for (int i = 0; i < map.count[0]; ++i) {
        const Index3 node{i, j, k};
        // grad[c][a] = d end_c / d x_a
        std::array<std::array<double, 3>, 3> grad{};
        for (int a = 0; a < d; ++a) {
          const int n = map.count[a];
          if (n < 2) continue;
          Index3 lo = node, hi = node;
          if (node[a] > 0) --lo[a];
          if (node[a] < n - 1) ++hi[a];
          const double span = (hi[a] - lo[a]) * spacing[a];
          const Vec& e_lo = map.ends[map.index(lo)];
          const Vec& e_hi = map.ends[map.index(hi)];
          for (int c = 0; c < d; ++c) grad[c][a] = (e_hi[c] - e_lo[c]) / span;
        }
        std::array<std::array<double, 3>, 3> cg{};
        for (int r = 0; r < d; ++r)
          for (int s = 0; s < d; ++s)
            for (int c = 0; c < d; ++c) cg[r][s] += grad[c][r] * grad[c][s];
        const double lmax = largest_symmetric_eigenvalue(cg, d);
        double& v = out.values[map.index(node)];
        if (!(lmax > 0)) {
          v = 0.0;
          ++out.degenerate;
        } else {
          v = std::log(std::sqrt(lmax)) / std::abs(duration);
        }
      }
  return out;
}

}  // namespace lbto
