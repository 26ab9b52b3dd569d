#include <doctest.h>

#include <numbers>
#include <random>

#include "lbto/ftle.hpp"

using namespace lbto;

namespace {

using Mat = std::array<std::array<double, 3>, 3>;

// n^dims lattice on [0, 1]^dims with end = A seed + b.
LatticeMap linear_map(int dims, int n, const Mat& a, const Vec& b) {
  LatticeMap m;
  m.dims = dims;
  m.count = {n, n, dims == 3 ? n : 1};
  const double h = 1.0 / (n - 1);
  for (int k = 0; k < m.count[2]; ++k)
    for (int j = 0; j < m.count[1]; ++j)
      for (int i = 0; i < m.count[0]; ++i) {
        const Vec s{i * h, j * h, k * h};
        Vec e = b;
        for (int r = 0; r < dims; ++r)
          for (int c = 0; c < dims; ++c) e[r] += a[r][c] * s[c];
        m.seeds.push_back(s);
        m.ends.push_back(e);
        m.state.push_back(NodeState::Valid);
      }
  return m;
}

Vec spacing_of(int n) {
  const double h = 1.0 / (n - 1);
  return {h, h, h};
}

Mat identity() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

// Largest root of the characteristic cubic of a symmetric 3x3 matrix via the
// trigonometric form.
double cubic_oracle(const Mat& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) + (a[2][2] - q) * (a[2][2] - q) + 2 * p1;
  const double p = std::sqrt(p2 / 6);
  Mat b;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b[r][c] = (a[r][c] - (r == c ? q : 0)) / p;
  const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                     b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double phi = std::acos(std::clamp(det / 2, -1.0, 1.0)) / 3;
  return q + 2 * p * std::cos(phi);
}

}  // namespace

TEST_CASE("identity and translation give zero") {
  for (int dims : {2, 3}) {
    for (const Vec& shift : {Vec{0, 0, 0}, Vec{0.3, -1.2, 0.7}}) {
      const auto f = compute_ftle(linear_map(dims, 7, identity(), shift), spacing_of(7), 1.0);
      CHECK(f.values.size() == (dims == 3 ? 343u : 49u));
      for (double v : f.values) CHECK(std::abs(v) < 1e-9);
      CHECK(f.degenerate == 0);
    }
  }
}

TEST_CASE("diagonal stretch") {
  Mat a{};
  a[0][0] = 2;
  a[1][1] = 0.5;
  const auto f = compute_ftle(linear_map(2, 9, a, {0, 0, 0}), spacing_of(9), 1.0);
  for (double v : f.values) CHECK(v == doctest::Approx(std::numbers::ln2).epsilon(1e-12));

  Mat b{};
  b[0][0] = 0.5;
  b[1][1] = 3;
  b[2][2] = 0.2;
  const auto g = compute_ftle(linear_map(3, 6, b, {1, 1, 1}), spacing_of(6), 2.0);
  for (double v : g.values) CHECK(v == doctest::Approx(std::log(3.0) / 2).epsilon(1e-12));
  CHECK(g.duration == 2.0);

  // Negative duration uses |T|.
  const auto back = compute_ftle(linear_map(2, 9, a, {0, 0, 0}), spacing_of(9), -1.0);
  CHECK(back.values[40] == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("constant shift does not change the field") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  LatticeMap m = linear_map(3, 6, identity(), {0, 0, 0});
  for (auto& e : m.ends) e = Vec{std::sin(3 * e[0]) + e[1] * e[2], e[1] * e[1] + e[0], std::cos(e[2]) + 0.5 * e[0]};
  const auto base = compute_ftle(m, spacing_of(6), 1.0);
  const Vec shift{u(rng), u(rng), u(rng)};
  for (auto& e : m.ends) e = e + shift;
  const auto moved = compute_ftle(m, spacing_of(6), 1.0);
  for (std::size_t i = 0; i < base.values.size(); ++i) CHECK(moved.values[i] == doctest::Approx(base.values[i]).epsilon(1e-12));
}

TEST_CASE("central differences are exact on quadratic data in the interior") {
  // end = (x^2, y): gradient diag(2x, 1) exactly under central differences.
  const int n = 11;
  LatticeMap m = linear_map(2, n, identity(), {0, 0, 0});
  for (auto& e : m.ends) e[0] = e[0] * e[0];
  const auto f = compute_ftle(m, spacing_of(n), 1.0);
  for (int j = 0; j < n; ++j)
    for (int i = 1; i < n - 1; ++i) {
      const double x = i / double(n - 1);
      const double want = std::log(std::max(2 * x, 1.0));
      CHECK(f.values[f.index({i, j, 0})] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("largest eigenvalue of symmetric matrices") {
  Mat two{};
  two[0][0] = 2;
  two[0][1] = two[1][0] = 1;
  two[1][1] = 2;
  CHECK(largest_symmetric_eigenvalue(two, 2) == doctest::Approx(3.0));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    Mat a{};
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) a[r][c] = a[c][r] = u(rng);
    CHECK(largest_symmetric_eigenvalue(a, 3) == doctest::Approx(cubic_oracle(a)).epsilon(1e-10));
  }
}

TEST_CASE("collapsed maps are counted as degenerate") {
  Mat zero{};
  const auto f = compute_ftle(linear_map(2, 5, zero, {0.5, 0.5, 0}), spacing_of(5), 1.0);
  CHECK(f.degenerate == 25);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("incomplete lattices are rejected") {
  auto m = linear_map(2, 5, identity(), {0, 0, 0});
  m.state[7] = NodeState::Missing;
  CHECK_THROWS_AS(compute_ftle(m, spacing_of(5), 1.0), Error);
  m.state[7] = NodeState::Synthetic;
  CHECK_NOTHROW(compute_ftle(m, spacing_of(5), 1.0));
  CHECK_THROWS_AS(compute_ftle(m, spacing_of(5), 0.0), Error);
}
