#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "lbto/metrics.hpp"

using namespace lbto;

namespace {

std::vector<Vec> random_positions(std::mt19937_64& rng, int n) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(test::random_point(rng, test::unit_box()));
  return out;
}

ExtractionConfig abc_config(Strategy s) {
  ExtractionConfig c;
  c.field = TimeField::abc(AbcParams{}, 0.002);
  c.decomp = BlockDecomposition::decompose(c.field.domain(), {48, 48, 48}, {2, 2, 2});
  c.interval = 25;
  c.reduction = 8;
  c.total_cycles = 100;
  c.strategy = s;
  return c;
}

}  // namespace

TEST_CASE("total average L2 norm") {
  std::mt19937_64 rng(1);
  const auto a = random_positions(rng, 100);
  CHECK(total_avg_l2(a, a) == 0.0);

  std::vector<Vec> shifted;
  for (const Vec& p : a) shifted.push_back(p + Vec{3, 4, 0});
  CHECK(total_avg_l2(a, shifted) == doctest::Approx(5.0).epsilon(1e-14));

  // Independent oracle: long double, reversed order.
  const auto b = random_positions(rng, 100);
  long double sum = 0;
  for (std::size_t i = a.size(); i-- > 0;) {
    long double s = 0;
    for (int c = 0; c < 3; ++c) s += static_cast<long double>(a[i][c] - b[i][c]) * (a[i][c] - b[i][c]);
    sum += std::sqrt(s);
  }
  CHECK(std::abs(total_avg_l2(a, b) - static_cast<double>(sum / 100)) <= 1e-12);

  // Consistent reindexing leaves the mean unchanged.
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Vec> pa, pb;
  for (auto i : perm) {
    pa.push_back(a[i]);
    pb.push_back(b[i]);
  }
  CHECK(total_avg_l2(pa, pb) == doctest::Approx(total_avg_l2(a, b)).epsilon(1e-14));

  CHECK_THROWS_AS(total_avg_l2(a, std::span<const Vec>(b).first(50)), Error);
  CHECK_THROWS_AS(total_avg_l2(std::span<const Vec>{}, std::span<const Vec>{}), Error);
}

TEST_CASE("accuracy percentage") {
  CHECK(accuracy_pct(0, 0.1) == 100.0);
  CHECK(accuracy_pct(0.1, 0.1) == 0.0);
  CHECK(accuracy_pct(0.2, 0.1) == doctest::Approx(-100.0));
  const double c = 2 * std::numbers::pi / 255;
  CHECK(accuracy_pct(1.09e-3, c) == doctest::Approx(95.6).epsilon(1e-3));
  CHECK_THROWS_AS(accuracy_pct(0.1, 0), Error);
  CHECK_THROWS_AS(accuracy_pct(0.1, -1), Error);
  double prev = 101;
  for (int i = 0; i <= 50; ++i) {
    const double acc = accuracy_pct(i * 0.01, 0.3);
    CHECK(acc < prev);
    prev = acc;
  }
}

TEST_CASE("max L2 statistics") {
  const std::vector<double> one{0.7};
  CHECK(max_l2_stats(one).greatest == max_l2_stats(one).average);
  const std::vector<double> two{1, 3};
  CHECK(max_l2_stats(two).greatest == 3.0);
  CHECK(max_l2_stats(two).average == 2.0);
  CHECK_THROWS_AS(max_l2_stats(std::span<const double>{}), Error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + trial % 9);
    for (auto& x : v) x = u(rng);
    double mx = v[0], sum = 0;
    for (double x : v) {
      mx = x > mx ? x : mx;
      sum += x;
    }
    const auto s = max_l2_stats(v);
    CHECK(s.greatest == mx);
    CHECK(s.average == doctest::Approx(sum / v.size()).epsilon(1e-14));
  }
}

TEST_CASE("pathline error") {
  Pathline truth;
  for (int k = 0; k < 5; ++k) truth.samples.push_back({0.5 * k, {0.1 * k, 0.2, 0.3}});
  CHECK(pathline_error(truth, truth).mean_l2 == 0.0);
  CHECK(pathline_error(truth, truth).common_samples == 5);

  Pathline off = truth;
  for (auto& s : off.samples) s.pos = s.pos + Vec{0.03, -0.04, 0};
  CHECK(pathline_error(off, truth).mean_l2 == doctest::Approx(0.05));

  Pathline cut = off;
  cut.samples.resize(2);
  cut.status = Pathline::Status::TruncatedOutOfHull;
  const auto e = pathline_error(cut, truth);
  CHECK(e.common_samples == 2);
  CHECK(e.mean_l2 == doctest::Approx(0.05));

  Pathline none;
  CHECK_THROWS_AS(pathline_error(none, truth), Error);

  Pathline skewed = truth;
  skewed.samples[1].time = 0.7;
  CHECK_THROWS_AS(pathline_error(skewed, truth), Error);
}

TEST_CASE("interval accuracy excludes missing pairs") {
  std::vector<std::optional<Vec>> got{Vec{0, 0, 0}, std::nullopt, Vec{1, 0, 0}, Vec{0, 0, 0}};
  std::vector<std::optional<Vec>> want{Vec{0, 0, 1}, Vec{0, 0, 0}, Vec{1, 0, 3}, std::nullopt};
  const auto r = interval_accuracy(got, want);
  CHECK(r.compared == 2);
  CHECK(r.excluded == 2);
  CHECK(r.avg_l2 == 2.0);
  CHECK(r.max_l2 == 3.0);
}

TEST_CASE("summary ordering") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<IntervalAccuracy> per;
    for (int k = 0; k < 4; ++k) {
      std::vector<std::optional<Vec>> a, b;
      for (int i = 0; i < 20; ++i) {
        a.push_back(Vec{u(rng), u(rng), u(rng)});
        b.push_back(Vec{u(rng), u(rng), u(rng)});
      }
      auto ia = interval_accuracy(a, b);
      ia.interval = k;
      per.push_back(ia);
    }
    const auto r = summarize(per, 2.0);
    CHECK(r.total_avg_l2 <= r.avg_max_l2);
    CHECK(r.avg_max_l2 <= r.greatest_max_l2);
    CHECK(r.accuracy_pct == doctest::Approx(accuracy_pct(r.total_avg_l2, 2.0)));
    CHECK(r.pooled_avg_l2 == doctest::Approx(r.total_avg_l2));  // equal counts per interval
  }
}

TEST_CASE("discard percentage and cycle time") {
  FlowMapDataset ds;
  ds.sets.resize(2);
  for (int k = 0; k < 2; ++k) {
    BasisFlowSet s;
    s.stats.seeded = 100;
    s.stats.discarded = k == 0 ? 5 : 15;
    ds.sets[k].push_back(s);
  }
  CHECK(discarded_pct(ds) == doctest::Approx(10.0));

  std::vector<TimingRecord> t{
      {0, 0, Phase::Advect, 1.0, false},     {0, 0, Phase::Manage, 0.5, false},
      {1, 0, Phase::Advect, 2.0, false},     {1, 0, Phase::Communicate, 0.25, false},
      {0, 1, Phase::Advect, 3.0, false},     {1, 1, Phase::Advect, 1.0, false},
      {0, 2, Phase::Advect, 100.0, true},
  };
  // Cycle 0: max(1.5, 2.25); cycle 1: max(3, 1); the write cycle is excluded.
  CHECK(mean_cycle_seconds(t) == doctest::Approx((2.25 + 3.0) / 2));
}

TEST_CASE("datasets compared against themselves are exact") {
  auto c = abc_config(Strategy::Exchange);
  c.total_cycles = 50;
  const auto ds = run_extraction(c);
  const auto r = compare_datasets(ds, ds, ReconMode::GridFill);
  CHECK(r.total_avg_l2 == 0.0);
  CHECK(r.accuracy_pct == 100.0);
  CHECK(r.per_interval.size() == 2);
  CHECK(r.cell_side == doctest::Approx(2 * std::numbers::pi / 47));
}

TEST_CASE("BTO pathlines are within twice the exchange error at short intervals") {
  const auto ex = run_extraction(abc_config(Strategy::Exchange));
  const auto bto = run_extraction(abc_config(Strategy::Bto));
  const TimeField& field = ex.config.field;
  const Box& dom = field.domain();
  // Random seeds so that some trajectories start inside the discarded bands.
  std::mt19937_64 rng(12);
  std::vector<Vec> seeds;
  for (int i = 0; i < 400; ++i) seeds.push_back(test::random_point(rng, dom));
  const auto truth = ground_truth_pathlines(field, {}, seeds, 0, 100, 25);
  const Reconstructor rex(ex, ReconMode::GridFill), rbto(bto, ReconMode::GridFill);
  double ex_sum = 0, bto_sum = 0;
  int differing = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto a = trace_pathline(rex, seeds[i], 0, 4), b = trace_pathline(rbto, seeds[i], 0, 4);
    ex_sum += pathline_error(a, truth[i]).mean_l2;
    bto_sum += pathline_error(b, truth[i]).mean_l2;
    differing += a.samples.back().pos != b.samples.back().pos;
  }
  CHECK(differing > 0);
  MESSAGE("exchange " << ex_sum / seeds.size() << " bto " << bto_sum / seeds.size());
  CHECK(bto_sum <= 2 * ex_sum);
}
