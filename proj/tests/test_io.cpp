#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "lbto/io.hpp"

using namespace lbto;

namespace {

BasisFlowSet sample_set(int dims, int n) {
  BasisFlowSet s;
  s.interval_index = 3;
  s.t_start = 0.15;
  s.t_end = 0.2;
  s.rank = 5;
  s.dims = dims;
  s.strategy = Strategy::Bto;
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < n; ++i) {
    BasisFlow f;
    f.id = make_particle_id(5, static_cast<std::uint32_t>(i));
    f.origin_rank = 5;
    f.seed = {u(rng), u(rng), dims == 3 ? u(rng) : 0.0};
    f.end = {u(rng), u(rng), dims == 3 ? u(rng) : 0.0};
    s.flows.push_back(f);
  }
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("basis flow container sizes") {
  CHECK(encode_basis_flows(sample_set(3, 0)).size() == 48);
  CHECK(encode_basis_flows(sample_set(3, 1)).size() == 48 + 64);
  CHECK(encode_basis_flows(sample_set(2, 1)).size() == 48 + 48);
  const std::string bytes = encode_basis_flows(sample_set(3, 2));
  CHECK(bytes.substr(0, 4) == "LBFM");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  CHECK(version == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  CHECK(static_cast<unsigned char>(bytes[9]) == 1);
  std::uint64_t count;
  std::memcpy(&count, bytes.data() + 40, 8);
  CHECK(count == 2);
}

TEST_CASE("basis flow round trip") {
  for (int dims : {2, 3})
    for (int n : {0, 1, 57}) {
      const auto set = sample_set(dims, n);
      const std::string bytes = encode_basis_flows(set);
      const auto back = decode_basis_flows(bytes);
      CHECK(back.interval_index == set.interval_index);
      CHECK(back.t_start == set.t_start);
      CHECK(back.t_end == set.t_end);
      CHECK(back.rank == set.rank);
      CHECK(back.dims == dims);
      CHECK(back.strategy == set.strategy);
      CHECK(back.flows == set.flows);
      CHECK(encode_basis_flows(back) == bytes);
    }
  test::TempDir dir("io");
  const auto set = sample_set(3, 10);
  write_basis_flows(set, dir.path / "a" / "b.lbfm");
  CHECK(read_basis_flows(dir.path / "a" / "b.lbfm").flows == set.flows);
}

TEST_CASE("corrupt basis flow files") {
  const std::string good = encode_basis_flows(sample_set(3, 3));
  std::string bad = good;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_basis_flows(bad); }) == ErrorCode::BadMagic);
  bad = good;
  bad[4] = 2;
  CHECK(code_of([&] { decode_basis_flows(bad); }) == ErrorCode::VersionMismatch);
  CHECK(code_of([&] { decode_basis_flows(good.substr(0, good.size() - 1)); }) == ErrorCode::TruncatedFile);
  CHECK(code_of([&] { decode_basis_flows(good.substr(0, 20)); }) == ErrorCode::TruncatedFile);
  CHECK(code_of([&] { decode_basis_flows(""); }) == ErrorCode::TruncatedFile);
  CHECK(code_of([] { read_basis_flows("/nonexistent/x.lbfm"); }) == ErrorCode::IoError);
}

TEST_CASE("scalar field round trip") {
  FtleField f;
  f.dims = 3;
  f.count = {3, 4, 2};
  f.spacing = {0.1, 0.2, 0.3};
  f.duration = 0.05;
  f.degenerate = 2;
  for (int i = 0; i < 24; ++i) f.values.push_back(std::sin(i) * 1e3);
  const std::string bytes = encode_scalar_field(f);
  CHECK(bytes.substr(0, 4) == "LSFD");
  CHECK(bytes.size() == 4 + 4 + 4 + 12 + 24 + 8 + 8 + 24 * 8);
  const auto back = decode_scalar_field(bytes);
  CHECK(back.count == f.count);
  CHECK(back.spacing == f.spacing);
  CHECK(back.duration == f.duration);
  CHECK(back.degenerate == f.degenerate);
  CHECK(back.values == f.values);
  CHECK(encode_scalar_field(back) == bytes);
  CHECK(code_of([&] { decode_scalar_field(bytes.substr(0, bytes.size() - 8)); }) == ErrorCode::TruncatedFile);
}

TEST_CASE("velocity snapshot round trip") {
  GridSnapshot s;
  s.domain = test::unit_box(2);
  s.domain.hi = {2, 3, 0};
  s.dims = {3, 2, 1};
  s.cycle = 42;
  for (int i = 0; i < 6; ++i) s.values.push_back({0.5 * i, -1.0 * i, 0});
  const std::string bytes = encode_velocity(s);
  CHECK(bytes.substr(0, 4) == "LVEL");
  CHECK(bytes.size() == 4 + 4 + 1 + 8 + 32 + 4 + 6 * 16);
  const auto back = decode_velocity(bytes);
  CHECK(back.dims == s.dims);
  CHECK(back.cycle == 42);
  CHECK(back.domain.dims == 2);
  CHECK(back.domain.hi[1] == 3.0);
  CHECK(back.values == s.values);
  CHECK(velocity_file_name(7) == "cycle_000007.lvel");
}

TEST_CASE("metric formatting") {
  CHECK(format_metric(95.5123456) == "95.5123");
  CHECK(format_metric(0.0245) == "0.0245");
  CHECK(format_metric(1.09e-3) == "0.00109");
  CHECK(format_metric(9.99e-4) == "9.99000e-04");
  CHECK(format_metric(-2.5e-5) == "-2.50000e-05");
  CHECK(format_metric(0) == "0");
  CHECK(format_metric(1234567) == "1.23457e+06");
  CHECK(format_metric(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("metrics CSV") {
  MetricsRow r;
  r.interval = 25;
  r.reduction = 8;
  r.strategy = "bto";
  r.ranks = 8;
  r.bto_s = 0.0123;
  r.exchange_s = 0.0456;
  r.speedup = 3.70732;
  r.discarded_pct = 9.46181;
  r.greatest_max_l2 = 0.0521;
  r.avg_max_l2 = 0.0433;
  r.total_avg_l2 = 8.89642e-4;
  r.accuracy_pct = 99.3345;
  const std::vector<MetricsRow> rows{r};
  const std::string text = metrics_csv(rows);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.substr(0, kMetricsHeader.size()) == kMetricsHeader);
  CHECK(text.find("8.89642e-04") != std::string::npos);

  const auto back = parse_metrics_csv(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].interval == 25);
  CHECK(back[0].strategy == "bto");
  CHECK(back[0].speedup == doctest::Approx(r.speedup).epsilon(1e-6));
  CHECK(back[0].total_avg_l2 == doctest::Approx(r.total_avg_l2).epsilon(1e-6));
  CHECK(back[0].accuracy_pct == doctest::Approx(r.accuracy_pct).epsilon(1e-6));
  CHECK(metrics_csv(back) == text);

  CHECK_THROWS_AS(parse_metrics_csv("interval,foo\n1,2\n"), Error);
  CHECK_THROWS_AS(emit_metrics(std::span<const MetricsRow>{}, "/tmp/never.csv"), Error);
}

TEST_CASE("message and stats CSV round trips") {
  std::vector<MessageRecord> log{{3, 0, 1, 17, false}, {25, 1, 0, 4, true}};
  CHECK(parse_messages_csv(messages_csv(log)) == log);

  FlowMapDataset ds;
  ds.sets.resize(2);
  for (int k = 0; k < 2; ++k)
    for (int r = 0; r < 3; ++r) {
      BasisFlowSet s;
      s.rank = r;
      s.stats = {100, 90u - k, 10u + k, 7, 3u + k};
      ds.sets[k].push_back(s);
    }
  const auto back = parse_stats_csv(stats_csv(ds));
  REQUIRE(back.size() == 2);
  for (int k = 0; k < 2; ++k)
    for (int r = 0; r < 3; ++r) CHECK(back[k][r] == ds.sets[k][r].stats);
}

TEST_CASE("timing and pathline CSV") {
  std::vector<TimingRecord> t{{0, 1, Phase::Advect, 0.5, false}, {1, 2, Phase::Communicate, 0.25, true}};
  const std::string text = timing_csv(t);
  CHECK(text.find("communicate") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  Pathline p;
  p.seed = {0.1, 0.2, 0.3};
  p.samples = {{0, {0.1, 0.2, 0.3}}, {0.5, {1.0 / 3, 0.2, 0.3}}};
  const std::vector<Pathline> lines{p};
  const std::string csv = pathlines_csv(lines);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
}
