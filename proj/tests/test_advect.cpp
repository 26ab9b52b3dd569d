#include <doctest.h>

#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "lbto/advect.hpp"

using namespace lbto;
using lbto::test::constant_field;
using lbto::test::unit_box;

namespace {

// Forward Euler with n substeps over one cycle, evaluating at exact times.
Vec euler(const TimeField& f, Vec x, int cycle, int n) {
  const double h = f.cycle_dt() / n;
  for (int s = 0; s < n; ++s) {
    const Vec v = f.eval_unchecked(x, cycle, static_cast<double>(s) / n);
    for (int a = 0; a < 3; ++a) x[a] += h * v[a];
  }
  return x;
}

Vec integrate(const TimeField& f, Vec x, int cycles) {
  for (int c = 0; c < cycles; ++c) x = rk4_step(f, x, c, f.cycle_dt()).pos;
  return x;
}

}  // namespace

TEST_CASE("zero field leaves particles in place") {
  const TimeField f = constant_field({0, 0, 0}, 0.1, unit_box());
  const StepResult r = rk4_step(f, {0.3, 0.3, 0.3}, 0, 0.1);
  CHECK(r.status == StepStatus::Ok);
  CHECK(r.pos == Vec{0.3, 0.3, 0.3});
}

TEST_CASE("RK4 is exact on a constant field") {
  const TimeField f = constant_field({1, 0, 0}, 0.1, unit_box());
  const StepResult r = rk4_step(f, {0.3, 0.3, 0.3}, 0, 0.1);
  CHECK(r.status == StepStatus::Ok);
  CHECK(r.pos[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r.pos[1] == 0.3);
  CHECK(r.pos[2] == 0.3);
}

TEST_CASE("one ABC step matches a fine-step Euler oracle") {
  AbcParams p;
  p.period = 1.0;
  const TimeField f = TimeField::abc(p, 0.01);
  const Vec x{1, 1, 1};
  const Vec got = rk4_step(f, x, 0, 0.01).pos;
  // 1000 Euler substeps carry an O(h) error of ~1e-7; one Richardson step removes it.
  const Vec coarse = euler(f, x, 0, 1000), fine = euler(f, x, 0, 2000);
  for (int a = 0; a < 3; ++a) {
    const double oracle = 2 * fine[a] - coarse[a];
    CHECK(std::abs(got[a] - oracle) < 1e-8);
  }
}

TEST_CASE("RK4 converges at fourth order on ABC") {
  const double span = 0.4;
  AbcParams p;
  p.period = span;
  const Vec x{1, 2, 3};
  const TimeField ref_field = TimeField::abc(p, span / 4000);
  const Vec ref = integrate(ref_field, x, 4000);
  double prev = 0;
  for (int n : {10, 20, 40}) {
    const Vec got = integrate(TimeField::abc(p, span / n), x, n);
    const double err = distance(got, ref);
    if (prev > 0) {
      const double order = std::log2(prev / err);
      CHECK(order >= 3.5);
      CHECK(order <= 4.5);
    }
    prev = err;
  }
}

TEST_CASE("a candidate outside the domain aborts the step") {
  const TimeField f = constant_field({1, 0, 0}, 0.1, unit_box());
  const StepResult r = rk4_step(f, {0.95, 0.5, 0.5}, 0, 0.1);
  CHECK(r.status == StepStatus::LeftDomain);
  CHECK(r.pos == Vec{0.95, 0.5, 0.5});
}

TEST_CASE("a stage sample outside the region aborts the step") {
  const TimeField f = constant_field({1, 0, 0}, 0.1, unit_box());
  // Only the half-step stage lands in the excluded slab.
  auto region = [](const Vec& p) { return !(p[0] > 0.52 && p[0] < 0.58); };
  const StepResult r = rk4_step(f, {0.5, 0.5, 0.5}, 0, 0.1, region);
  CHECK(r.status == StepStatus::LeftRegion);
  CHECK(r.pos == Vec{0.5, 0.5, 0.5});
  const StepResult ok = rk4_step(f, {0.6, 0.5, 0.5}, 0, 0.1, region);
  CHECK(ok.status == StepStatus::Ok);
}

TEST_CASE("rk4_step is bitwise reproducible") {
  const TimeField f = TimeField::abc({}, 0.002);
  const Vec x{0.4, 5.1, 2.2};
  const Vec a = rk4_step(f, x, 17, 0.002).pos, b = rk4_step(f, x, 17, 0.002).pos;
  CHECK(std::memcmp(a.data(), b.data(), sizeof a) == 0);
}

TEST_CASE("ground truth on a zero field is the identity") {
  const TimeField f = constant_field({0, 0, 0}, 0.1, unit_box());
  const std::vector<Vec> seeds{{0.1, 0.2, 0.3}, {0.9, 0.9, 0.9}};
  const auto lines = ground_truth_pathlines(f, {}, seeds, 0, 20, 5);
  REQUIRE(lines.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(lines[i].status == Pathline::Status::Complete);
    REQUIRE(lines[i].samples.size() == 5);
    for (const auto& s : lines[i].samples) CHECK(s.pos == seeds[i]);
    CHECK(lines[i].samples.back().time == doctest::Approx(2.0));
  }
  const auto ends = ground_truth_flow_map(f, {}, seeds, 0, 20);
  CHECK(*ends[0] == seeds[0]);
}

TEST_CASE("ground truth truncates at the domain boundary") {
  const TimeField f = constant_field({1, 0, 0}, 0.1, unit_box());
  const std::vector<Vec> seeds{{0.45, 0.5, 0.5}};
  const auto lines = ground_truth_pathlines(f, {}, seeds, 0, 10, 5);
  CHECK(lines[0].status == Pathline::Status::TruncatedOutOfDomain);
  REQUIRE(lines[0].samples.size() == 2);
  CHECK(lines[0].samples[1].pos[0] == doctest::Approx(0.95));
  CHECK_FALSE(ground_truth_flow_map(f, {}, seeds, 0, 10)[0].has_value());
}

TEST_CASE("ground truth on a gridded field loads one snapshot per cycle") {
  const TimeField analytic = constant_field({0.5, 0, 0}, 0.1, unit_box());
  std::vector<int> loaded;
  SnapshotLoader loader = [&](int cycle) {
    loaded.push_back(cycle);
    return sample_to_grid(analytic, {3, 3, 3}, cycle);
  };
  const std::vector<Vec> seeds{{0.1, 0.5, 0.5}};
  const auto ends = ground_truth_flow_map(TimeField::gridded(unit_box(), {3, 3, 3}, 0.1), loader, seeds, 2, 4);
  CHECK(loaded == std::vector<int>{2, 3, 4, 5});
  CHECK((*ends[0])[0] == doctest::Approx(0.3));
}
