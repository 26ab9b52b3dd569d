#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "lbto/domain.hpp"

using namespace lbto;
using lbto::test::unit_box;

namespace {

// Half-open containment written out independently of Block::owns.
bool brute_contains(const BlockDecomposition& d, const Block& b, const Vec& x) {
  for (int a = 0; a < d.dims(); ++a) {
    if (x[a] < b.box.lo[a]) return false;
    const bool global_hi = b.box.hi[a] == d.domain().hi[a];
    if (global_hi ? x[a] > b.box.hi[a] : x[a] >= b.box.hi[a]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("halving the unit cube") {
  const auto d = BlockDecomposition::decompose(unit_box(), {64, 64, 64}, {2, 1, 1});
  REQUIRE(d.rank_count() == 2);
  CHECK(d.block(0).box.lo[0] == 0.0);
  CHECK(d.block(0).box.hi[0] == 0.5);
  CHECK(d.block(1).box.lo[0] == 0.5);
  CHECK(d.block(1).box.hi[0] == 1.0);
  CHECK(d.owner_of({0.5, 0.2, 0.2}) == 1);
  CHECK(d.owner_of({0.4999, 0.2, 0.2}) == 0);
  CHECK(d.owner_of({1.0, 1.0, 1.0}) == 1);
  CHECK(d.owner_of({0.0, 0.0, 0.0}) == 0);
  CHECK_FALSE(d.owner_of({1.0001, 0.5, 0.5}).has_value());
  CHECK(d.internal_faces().size() == 1);
}

TEST_CASE("a single block is the whole domain") {
  const Box box{{-1, 2, 0}, {3, 5, 1}, 3};
  const auto d = BlockDecomposition::decompose(box, {10, 11, 12}, {1, 1, 1});
  REQUIRE(d.rank_count() == 1);
  CHECK(d.block(0).box.lo == box.lo);
  CHECK(d.block(0).box.hi == box.hi);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) CHECK(d.owner_of(test::random_point(rng, box)) == 0);
  CHECK(d.neighborhood(0) == std::vector<int>{0});
}

TEST_CASE("remainder nodes go to low-index blocks") {
  const auto d = BlockDecomposition::decompose(unit_box(), {10, 4, 4}, {3, 1, 1});
  CHECK(d.block(0).node_end[0] - d.block(0).node_begin[0] == 4);
  CHECK(d.block(1).node_end[0] - d.block(1).node_begin[0] == 3);
  CHECK(d.block(2).node_end[0] - d.block(2).node_begin[0] == 3);
  // Exhaustive ownership count of the grid nodes agrees with the split.
  std::vector<int> owned(3, 0);
  for (int i = 0; i < 10; ++i) ++owned[static_cast<std::size_t>(*d.owner_of({d.node_coord(0, i), 0.5, 0.5}))];
  CHECK(owned == std::vector<int>{4, 3, 3});
}

TEST_CASE("layouts larger than the grid are rejected") {
  try {
    BlockDecomposition::decompose(unit_box(), {4, 4, 4}, {5, 1, 1});
    FAIL("expected InvalidLayout");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidLayout);
  }
  CHECK_THROWS_AS(BlockDecomposition::decompose(unit_box(), {4, 4, 4}, {0, 1, 1}), Error);
}

TEST_CASE("owner_of agrees with a brute-force containment scan") {
  const Box box{{0, 0, 0}, {2, 3, 1}, 3};
  const auto d = BlockDecomposition::decompose(box, {17, 20, 9}, {2, 2, 2});
  std::mt19937_64 rng(8);
  auto check_point = [&](const Vec& x) {
    std::vector<int> hits;
    for (const Block& b : d.blocks())
      if (brute_contains(d, b, x)) hits.push_back(b.rank);
    REQUIRE(hits.size() == 1);
    CHECK(d.owner_of(x) == hits[0]);
    CHECK(d.block(hits[0]).owns(x));
  };
  for (int i = 0; i < 500; ++i) check_point(test::random_point(rng, box));
  // Points exactly on faces, edges and corners.
  for (const Block& b : d.blocks()) {
    check_point(b.box.lo);
    check_point(b.box.hi);
    check_point({b.box.lo[0], b.box.hi[1], b.box.lo[2]});
  }
}

TEST_CASE("blocks tile the domain") {
  const auto d = BlockDecomposition::decompose(unit_box(), {13, 7, 9}, {3, 2, 2});
  double volume = 0;
  for (const Block& b : d.blocks()) volume += b.box.extent(0) * b.box.extent(1) * b.box.extent(2);
  CHECK(volume == doctest::Approx(1.0).epsilon(1e-14));
  std::size_t nodes = 0;
  for (const Block& b : d.blocks()) nodes += b.node_count();
  CHECK(nodes == 13u * 7u * 9u);
}

TEST_CASE("neighborhoods include corner neighbours") {
  const auto d = BlockDecomposition::decompose(unit_box(), {12, 12, 12}, {3, 3, 3});
  CHECK(d.neighborhood(13).size() == 27);
  CHECK(d.neighborhood(0).size() == 8);
  const auto n = d.neighborhood(0);
  CHECK(std::is_sorted(n.begin(), n.end()));
  const auto d2 = BlockDecomposition::decompose(unit_box(2), {12, 12, 1}, {3, 3, 1});
  CHECK(d2.neighborhood(4).size() == 9);
}

TEST_CASE("reduction strides") {
  CHECK(reduction_stride(1, 3) == 1);
  CHECK(reduction_stride(8, 3) == 2);
  CHECK(reduction_stride(27, 3) == 3);
  CHECK(reduction_stride(64, 3) == 4);
  CHECK(reduction_stride(9, 3) == 3);
  CHECK(reduction_stride(4, 2) == 2);
  CHECK(reduction_stride(8, 2) == 3);
}

TEST_CASE("1:1 seeding places one seed per block node") {
  const auto d = BlockDecomposition::decompose(unit_box(), {64, 64, 64}, {1, 1, 1});
  CHECK(seed_uniform(d, 0, 1).positions.size() == 262144);
}

TEST_CASE("1:8 seeding uses stride 2") {
  const auto d = BlockDecomposition::decompose(unit_box(), {128, 128, 128}, {2, 2, 2});
  for (int r = 0; r < d.rank_count(); ++r) CHECK(seed_uniform(d, r, 8).positions.size() == 32u * 32u * 32u);
}

TEST_CASE("1:27 seeds lie in their block") {
  const auto d = BlockDecomposition::decompose(unit_box(), {64, 64, 64}, {2, 2, 2});
  for (int r = 0; r < d.rank_count(); ++r) {
    const SeedSet s = seed_uniform(d, r, 27);
    CHECK(s.owner_rank == r);
    for (const Vec& p : s.positions) {
      CHECK(d.block(r).owns(p));
      CHECK(d.owner_of(p) == r);
    }
  }
}

TEST_CASE("seed counts follow the block size per axis") {
  const auto d = BlockDecomposition::decompose(unit_box(), {30, 23, 17}, {3, 2, 2});
  for (int X : {1, 8, 27, 64}) {
    const int s = reduction_stride(X, 3);
    for (int r = 0; r < d.rank_count(); ++r) {
      const Block& b = d.block(r);
      const SeedSet set = seed_uniform(d, r, X);
      const auto lat = SeedLattice::for_decomposition(d, X);
      const auto [first, last] = lat.block_range(b);
      std::size_t expect = 1;
      for (int a = 0; a < 3; ++a) {
        const int per_axis = last[a] - first[a] + 1;
        const double nominal = static_cast<double>(b.node_end[a] - b.node_begin[a]) / s;
        CHECK(std::abs(per_axis - nominal) <= 1.0);
        expect *= static_cast<std::size_t>(std::max(per_axis, 0));
      }
      CHECK(set.positions.size() == expect);
    }
  }
}

TEST_CASE("1:1 seeds of all ranks reproduce the grid exactly") {
  const auto d = BlockDecomposition::decompose(unit_box(), {11, 9, 7}, {3, 2, 2});
  std::set<std::array<int, 3>> seen;
  std::size_t total = 0;
  for (int r = 0; r < d.rank_count(); ++r) {
    const SeedSet s = seed_uniform(d, r, 1);
    total += s.positions.size();
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      seen.insert(s.lattice_index[i]);
      CHECK(d.owner_of(s.positions[i]) == r);
    }
  }
  CHECK(total == 11u * 9u * 7u);
  CHECK(seen.size() == total);
}

TEST_CASE("seeding is deterministic and lattice lookups invert positions") {
  const auto d = BlockDecomposition::decompose(Box{{0, 0, 0}, {6.283185307179586, 6.283185307179586, 6.283185307179586}, 3},
                                               {48, 48, 48}, {2, 2, 2});
  const auto lat = SeedLattice::for_decomposition(d, 8);
  for (int r = 0; r < d.rank_count(); ++r) {
    const SeedSet a = seed_uniform(d, r, 8), b = seed_uniform(d, r, 8);
    CHECK(a.positions == b.positions);
    for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK(lat.index_of(d, a.positions[i]) == a.lattice_index[i]);
  }
  CHECK_FALSE(lat.index_of(d, {0.05, 0.05, 0.05}).has_value());
}

TEST_CASE("2D decomposition keeps the third axis trivial") {
  const auto d = BlockDecomposition::decompose(unit_box(2), {9, 5, 1}, {2, 1, 1});
  CHECK(d.dims() == 2);
  CHECK(d.rank_count() == 2);
  const SeedSet s = seed_uniform(d, 0, 4);
  for (const Vec& p : s.positions) CHECK(p[2] == 0.0);
  CHECK(d.cell_side() == doctest::Approx(0.125));
}
