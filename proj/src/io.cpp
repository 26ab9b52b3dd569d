#include "lbto/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lbto {

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void pad(int n) { out_.append(static_cast<std::size_t>(n), '\0'); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, const char* what) : data_(data), what_(what) {}
  void magic(std::string_view m) {
    need(m.size());
    if (data_.substr(0, m.size()) != m)
      throw Error(ErrorCode::BadMagic, std::string(what_) + ": expected magic '" + std::string(m) + "'");
    pos_ = m.size();
  }
  void version() {
    const auto v = u32();
    if (v != kFormatVersion)
      throw Error(ErrorCode::VersionMismatch, std::string(what_) + ": unsupported version " + std::to_string(v));
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error(ErrorCode::TruncatedFile, std::string(what_) + ": file is truncated");
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view data_;
  const char* what_;
  std::size_t pos_ = 0;
};

int checked_dims(int d, const char* what) {
  if (d < 1 || d > 3) throw Error(ErrorCode::ParseError, std::string(what) + ": bad dimensionality " + std::to_string(d));
  return d;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(sep, start);
    out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

double to_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
  return v;
}

template <class T>
T to_int(std::string_view s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, "not an integer: '" + std::string(s) + "'");
  return v;
}

std::string exact(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string encode_basis_flows(const BasisFlowSet& set) {
  Writer w;
  w.bytes("LBFM");
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(set.dims));
  w.u8(static_cast<std::uint8_t>(set.strategy));
  w.u16(0);
  w.u32(static_cast<std::uint32_t>(set.interval_index));
  w.f64(set.t_start);
  w.f64(set.t_end);
  w.u32(static_cast<std::uint32_t>(set.rank));
  w.u32(0);
  w.u64(set.flows.size());
  for (const auto& f : set.flows) {
    w.u64(f.id);
    for (int a = 0; a < set.dims; ++a) w.f64(f.seed[a]);
    for (int a = 0; a < set.dims; ++a) w.f64(f.end[a]);
    w.u8(f.valid ? 1 : 0);
    w.pad(7);
  }
  return w.take();
}

BasisFlowSet decode_basis_flows(std::string_view bytes) {
  Reader r(bytes, "basis-flow file");
  r.magic("LBFM");
  r.version();
  BasisFlowSet set;
  set.dims = checked_dims(r.u8(), "basis-flow file");
  const auto strategy = r.u8();
  if (strategy > 1) throw Error(ErrorCode::ParseError, "basis-flow file: unknown strategy byte");
  set.strategy = static_cast<Strategy>(strategy);
  r.u16();
  set.interval_index = static_cast<int>(r.u32());
  set.t_start = r.f64();
  set.t_end = r.f64();
  set.rank = static_cast<int>(r.u32());
  r.u32();
  const std::uint64_t count = r.u64();
  const std::size_t record = 8 + 16 * static_cast<std::size_t>(set.dims) + 8;
  if (count > bytes.size() / record) r.need(bytes.size() + 1);
  set.flows.resize(static_cast<std::size_t>(count));
  for (auto& f : set.flows) {
    f.id = r.u64();
    for (int a = 0; a < set.dims; ++a) f.seed[a] = r.f64();
    for (int a = 0; a < set.dims; ++a) f.end[a] = r.f64();
    f.valid = r.u8() != 0;
    r.skip(7);
    f.origin_rank = static_cast<int>(f.id >> 32);
  }
  return set;
}

void write_basis_flows(const BasisFlowSet& set, const fs::path& path) { write_file(path, encode_basis_flows(set)); }
BasisFlowSet read_basis_flows(const fs::path& path) { return decode_basis_flows(read_file(path)); }

std::string encode_scalar_field(const FtleField& field) {
  Writer w;
  w.bytes("LSFD");
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(field.dims));
  w.pad(3);
  for (int a = 0; a < field.dims; ++a) w.u32(static_cast<std::uint32_t>(field.count[a]));
  for (int a = 0; a < field.dims; ++a) w.f64(field.spacing[a]);
  w.f64(field.duration);
  w.u64(field.degenerate);
  for (double v : field.values) w.f64(v);
  return w.take();
}

FtleField decode_scalar_field(std::string_view bytes) {
  Reader r(bytes, "scalar-field file");
  r.magic("LSFD");
  r.version();
  FtleField f;
  f.dims = checked_dims(r.u8(), "scalar-field file");
  r.skip(3);
  for (int a = 0; a < f.dims; ++a) f.count[a] = static_cast<int>(r.u32());
  for (int a = 0; a < f.dims; ++a) f.spacing[a] = r.f64();
  f.duration = r.f64();
  f.degenerate = r.u64();
  const std::size_t n = static_cast<std::size_t>(f.count[0]) * f.count[1] * f.count[2];
  if (n > bytes.size() / 8) r.need(bytes.size() + 1);
  f.values.resize(n);
  for (double& v : f.values) v = r.f64();
  return f;
}

void write_scalar_field(const FtleField& field, const fs::path& path) { write_file(path, encode_scalar_field(field)); }
FtleField read_scalar_field(const fs::path& path) { return decode_scalar_field(read_file(path)); }

std::string encode_velocity(const GridSnapshot& snap) {
  const int d = snap.domain.dims;
  Writer w;
  w.bytes("LVEL");
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(d));
  for (int a = 0; a < d; ++a) w.u32(static_cast<std::uint32_t>(snap.dims[a]));
  for (int a = 0; a < d; ++a) w.f64(snap.domain.lo[a]);
  for (int a = 0; a < d; ++a) w.f64(snap.domain.hi[a]);
  w.u32(static_cast<std::uint32_t>(snap.cycle));
  for (const Vec& v : snap.values)
    for (int a = 0; a < d; ++a) w.f64(v[a]);
  return w.take();
}

GridSnapshot decode_velocity(std::string_view bytes) {
  Reader r(bytes, "velocity file");
  r.magic("LVEL");
  r.version();
  GridSnapshot s;
  const int d = checked_dims(r.u8(), "velocity file");
  s.domain.dims = d;
  for (int a = 0; a < d; ++a) s.dims[a] = static_cast<int>(r.u32());
  for (int a = 0; a < d; ++a) s.domain.lo[a] = r.f64();
  for (int a = 0; a < d; ++a) s.domain.hi[a] = r.f64();
  s.cycle = static_cast<int>(r.u32());
  const std::size_t n = s.node_count();
  if (n > bytes.size() / 8) r.need(bytes.size() + 1);
  s.values.assign(n, Vec{0, 0, 0});
  for (Vec& v : s.values)
    for (int a = 0; a < d; ++a) v[a] = r.f64();
  return s;
}

void write_velocity(const GridSnapshot& snap, const fs::path& path) { write_file(path, encode_velocity(snap)); }
GridSnapshot read_velocity(const fs::path& path) { return decode_velocity(read_file(path)); }

std::string velocity_file_name(int cycle) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cycle_%06d.lvel", cycle);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string format_metric(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  if (x != 0 && std::abs(x) < 1e-3)
    std::snprintf(buf, sizeof buf, "%.5e", x);
  else
    std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.interval) + ',' + std::to_string(r.reduction) + ',' + r.strategy + ',' +
           std::to_string(r.ranks);
    for (double v : {r.bto_s, r.exchange_s, r.speedup, r.discarded_pct, r.greatest_max_l2, r.avg_max_l2,
                     r.total_avg_l2, r.accuracy_pct})
      out += ',' + format_metric(v);
    out += '\n';
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kMetricsHeader) throw Error(ErrorCode::ParseError, "metrics CSV: bad header");
  std::vector<MetricsRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 12) throw Error(ErrorCode::ParseError, "metrics CSV: line " + std::to_string(i + 1) + " has wrong field count");
    MetricsRow r;
    r.interval = to_int<int>(f[0]);
    r.reduction = to_int<int>(f[1]);
    r.strategy = std::string(f[2]);
    r.ranks = to_int<int>(f[3]);
    double* dst[] = {&r.bto_s, &r.exchange_s, &r.speedup, &r.discarded_pct, &r.greatest_max_l2, &r.avg_max_l2,
                     &r.total_avg_l2, &r.accuracy_pct};
    for (int k = 0; k < 8; ++k) *dst[k] = to_double(f[static_cast<std::size_t>(4 + k)]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_metrics(std::span<const MetricsRow> rows, const fs::path& path) {
  if (rows.empty()) throw Error(ErrorCode::Empty, "no metrics rows to emit");
  write_file(path, metrics_csv(rows));
}

std::string timing_csv(std::span<const TimingRecord> timing) {
  std::string out = "rank,cycle,phase,wall_seconds,write_cycle\n";
  for (const auto& t : timing)
    out += std::to_string(t.rank) + ',' + std::to_string(t.cycle) + ',' + to_string(t.phase) + ',' +
           exact(t.wall_seconds) + ',' + (t.write_cycle ? "1" : "0") + '\n';
  return out;
}

std::string messages_csv(std::span<const MessageRecord> log) {
  std::string out = "cycle,from,to,count,is_return\n";
  for (const auto& m : log)
    out += std::to_string(m.cycle) + ',' + std::to_string(m.from) + ',' + std::to_string(m.to) + ',' +
           std::to_string(m.count) + ',' + (m.is_return ? "1" : "0") + '\n';
  return out;
}

std::vector<MessageRecord> parse_messages_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::vector<MessageRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 5) throw Error(ErrorCode::ParseError, "messages CSV: wrong field count");
    out.push_back({to_int<int>(f[0]), to_int<int>(f[1]), to_int<int>(f[2]), to_int<std::uint64_t>(f[3]), f[4] == "1"});
  }
  return out;
}

std::string stats_csv(const FlowMapDataset& dataset) {
  std::string out = "interval,rank,seeded,stored,discarded,terminated_boundary,exited_domain\n";
  for (std::size_t k = 0; k < dataset.sets.size(); ++k)
    for (const auto& set : dataset.sets[k]) {
      const auto& s = set.stats;
      out += std::to_string(k) + ',' + std::to_string(set.rank) + ',' + std::to_string(s.seeded) + ',' +
             std::to_string(s.stored) + ',' + std::to_string(s.discarded) + ',' +
             std::to_string(s.terminated_boundary) + ',' + std::to_string(s.exited_domain) + '\n';
    }
  return out;
}

std::vector<std::vector<FlowStats>> parse_stats_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::vector<std::vector<FlowStats>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 7) throw Error(ErrorCode::ParseError, "stats CSV: wrong field count");
    const auto k = to_int<std::size_t>(f[0]);
    const auto r = to_int<std::size_t>(f[1]);
    if (out.size() <= k) out.resize(k + 1);
    if (out[k].size() <= r) out[k].resize(r + 1);
    out[k][r] = {to_int<std::uint64_t>(f[2]), to_int<std::uint64_t>(f[3]), to_int<std::uint64_t>(f[4]),
                 to_int<std::uint64_t>(f[5]), to_int<std::uint64_t>(f[6])};
  }
  return out;
}

std::string interval_accuracy_csv(std::span<const IntervalAccuracy> rows) {
  std::string out = "interval,compared,excluded,avg_l2,max_l2\n";
  for (const auto& r : rows)
    out += std::to_string(r.interval) + ',' + std::to_string(r.compared) + ',' + std::to_string(r.excluded) + ',' +
           format_metric(r.avg_l2) + ',' + format_metric(r.max_l2) + '\n';
  return out;
}

std::string pathlines_csv(std::span<const Pathline> lines) {
  std::string out = "pathline,status,sample,time,x,y,z\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    for (std::size_t s = 0; s < l.samples.size(); ++s) {
      const auto& smp = l.samples[s];
      out += std::to_string(i) + ',' + to_string(l.status) + ',' + std::to_string(s) + ',' + exact(smp.time) + ',' +
             exact(smp.pos[0]) + ',' + exact(smp.pos[1]) + ',' + exact(smp.pos[2]) + '\n';
    }
  }
  return out;
}

}  // namespace lbto
