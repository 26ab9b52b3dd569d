#include "lbto/spec.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "lbto/io.hpp"

namespace lbto {

using nlohmann::ordered_json;

namespace {

const std::set<std::string> kKnownMetrics{"accuracy", "discard", "pathline"};

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }
[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); }

// Walks one JSON object, rejecting keys that were never read.
class Section {
 public:
  Section(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) parse_fail("field '" + where() + "': expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) parse_fail("unknown field '" + name(k) + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("string");
      }
      out = v.get<T>();
    } catch (const std::invalid_argument& e) {
      parse_fail("field '" + name(key) + "': expected " + e.what());
    } catch (const nlohmann::json::exception&) {
      parse_fail("field '" + name(key) + "': wrong type");
    }
  }

  void vec(const std::string& key, Vec& out, int min_len, int max_len) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (static_cast<int>(v.size()) < min_len || static_cast<int>(v.size()) > max_len)
      parse_fail("field '" + name(key) + "': expected " + std::to_string(min_len) + "-" + std::to_string(max_len) +
                 " numbers");
    out = {0, 0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  }

  bool index(const std::string& key, Index3& out) {
    std::vector<int> v;
    get(key, v);
    if (!j_.contains(key)) return false;
    if (v.size() < 2 || v.size() > 3) parse_fail("field '" + name(key) + "': expected 2 or 3 integers");
    out = {1, 1, 1};
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
    return true;
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const ordered_json empty = ordered_json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
  }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FieldKind parse_kind(const std::string& s) {
  if (s == "abc") return FieldKind::AnalyticABC;
  if (s == "double_gyre") return FieldKind::AnalyticDoubleGyre;
  if (s == "linear") return FieldKind::AnalyticLinear;
  if (s == "gridded") return FieldKind::Gridded;
  parse_fail("field 'field.kind': unknown kind '" + s + "' (expected abc, double_gyre, linear or gridded)");
}

const char* kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::AnalyticABC: return "abc";
    case FieldKind::AnalyticDoubleGyre: return "double_gyre";
    case FieldKind::AnalyticLinear: return "linear";
    case FieldKind::Gridded: return "gridded";
  }
  return "?";
}

ordered_json axes(const Vec& v, int d) {
  auto a = ordered_json::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}
ordered_json axes(const Index3& v, int d) {
  auto a = ordered_json::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

bool FieldSpec::operator==(const FieldSpec& o) const {
  auto same_box = [](const Box& a, const Box& b) { return a.dims == b.dims && a.lo == b.lo && a.hi == b.hi; };
  return kind == o.kind && cycle_dt == o.cycle_dt && abc.a0 == o.abc.a0 && abc.b == o.abc.b && abc.c == o.abc.c &&
         abc.modulation == o.abc.modulation && abc.period == o.abc.period && gyre.amplitude == o.gyre.amplitude &&
         gyre.epsilon == o.gyre.epsilon && gyre.omega == o.gyre.omega && linear.matrix == o.linear.matrix &&
         linear.offset == o.linear.offset && velocity_dir == o.velocity_dir && same_box(domain, o.domain);
}

bool ExperimentSpec::operator==(const ExperimentSpec& o) const {
  return field == o.field && grid_dims == o.grid_dims && layout == o.layout && interval == o.interval &&
         reduction == o.reduction && total_cycles == o.total_cycles && rng_seed == o.rng_seed &&
         workers == o.workers && strategies == o.strategies && recon_mode == o.recon_mode && metrics == o.metrics &&
         pathline_seeds_per_axis == o.pathline_seeds_per_axis && bench_repetitions == o.bench_repetitions &&
         output_dir == o.output_dir;
}

std::filesystem::path ExperimentSpec::output_path() const {
  const std::filesystem::path p(output_dir);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path ExperimentSpec::velocity_path() const {
  const std::filesystem::path p(field.velocity_dir);
  return p.is_absolute() ? p : base_dir / p;
}

bool ExperimentSpec::wants_metric(const std::string& name) const {
  return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

ExperimentSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir) {
  ordered_json root;
  try {
    root = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    parse_fail("line " + std::to_string(line) + ": " + e.what());
  }

  ExperimentSpec spec;
  spec.base_dir = base_dir;
  {
    Section top(root, "");
    {
      Section f = top.sub("field");
      std::string kind = "abc";
      f.get("kind", kind);
      spec.field.kind = parse_kind(kind);
      f.get("cycle_dt", spec.field.cycle_dt);
      auto& abc = spec.field.abc;
      abc.period = 0;
      f.get("a0", abc.a0);
      f.get("b", abc.b);
      f.get("c", abc.c);
      f.get("modulation", abc.modulation);
      f.get("period", abc.period);
      f.get("amplitude", spec.field.gyre.amplitude);
      f.get("epsilon", spec.field.gyre.epsilon);
      f.get("omega", spec.field.gyre.omega);
      std::vector<std::vector<double>> m;
      f.get("matrix", m);
      if (!m.empty()) {
        if (m.size() > 3) parse_fail("field 'field.matrix': expected at most 3 rows");
        for (std::size_t r = 0; r < m.size(); ++r) {
          if (m[r].size() > 3) parse_fail("field 'field.matrix': expected at most 3 columns");
          for (std::size_t c = 0; c < m[r].size(); ++c) spec.field.linear.matrix[r][c] = m[r][c];
        }
      }
      f.vec("offset", spec.field.linear.offset, 2, 3);
      f.get("velocity_dir", spec.field.velocity_dir);

      Box domain;
      bool has_domain = false;
      if (f.has("domain")) {
        Section d = f.sub("domain");
        Vec lo{}, hi{};
        d.vec("lo", lo, 2, 3);
        d.vec("hi", hi, 2, 3);
        if (!d.has("lo") || !d.has("hi")) parse_fail("field 'field.domain': needs both lo and hi");
        std::vector<double> lo_raw;
        d.get("lo", lo_raw);
        std::vector<double> hi_raw;
        d.get("hi", hi_raw);
        if (lo_raw.size() != hi_raw.size()) parse_fail("field 'field.domain': lo and hi differ in length");
        domain.lo = lo;
        domain.hi = hi;
        domain.dims = static_cast<int>(lo_raw.size());
        has_domain = true;
      } else {
        f.sub("domain");
      }
      switch (spec.field.kind) {
        case FieldKind::AnalyticABC: spec.field.domain = has_domain ? domain : TimeField::default_abc_domain(); break;
        case FieldKind::AnalyticDoubleGyre:
          spec.field.domain = has_domain ? domain : TimeField::default_double_gyre_domain();
          break;
        case FieldKind::AnalyticLinear:
          if (!has_domain) invalid("linear field requires field.domain");
          spec.field.domain = domain;
          break;
        case FieldKind::Gridded: {
          if (spec.field.velocity_dir.empty()) invalid("gridded field requires field.velocity_dir");
          const auto first = spec.velocity_path() / velocity_file_name(0);
          if (!std::filesystem::exists(first)) invalid("gridded velocity file does not exist: " + first.string());
          spec.field.domain = read_velocity(first).domain;
          break;
        }
      }
    }
    const int d = spec.field.domain.dims;
    if (d == 2) {
      spec.grid_dims = {48, 48, 1};
      spec.layout = {2, 2, 1};
    }
    if (spec.field.kind == FieldKind::Gridded) {
      const auto snap = read_velocity(spec.velocity_path() / velocity_file_name(0));
      spec.grid_dims = snap.dims;
    }
    {
      Section s = top.sub("decomposition");
      Index3 g = spec.grid_dims, l = spec.layout;
      if (s.index("grid_dims", g)) spec.grid_dims = g;
      if (s.index("layout", l)) spec.layout = l;
    }
    {
      Section s = top.sub("extraction");
      s.get("interval", spec.interval);
      s.get("reduction", spec.reduction);
      s.get("total_cycles", spec.total_cycles);
      s.get("rng_seed", spec.rng_seed);
      s.get("workers", spec.workers);
    }
    {
      std::vector<std::string> names;
      top.get("strategies", names);
      if (root.contains("strategies")) {
        spec.strategies.clear();
        for (const auto& n : names) {
          try {
            spec.strategies.push_back(parse_strategy(n));
          } catch (const Error& e) {
            parse_fail("field 'strategies': " + std::string(e.what()));
          }
        }
      }
    }
    {
      Section s = top.sub("reconstruction");
      std::string mode = to_string(spec.recon_mode);
      s.get("mode", mode);
      try {
        spec.recon_mode = parse_recon_mode(mode);
      } catch (const Error& e) {
        parse_fail("field 'reconstruction.mode': " + std::string(e.what()));
      }
    }
    top.get("metrics", spec.metrics);
    {
      Section s = top.sub("pathlines");
      s.get("seeds_per_axis", spec.pathline_seeds_per_axis);
    }
    {
      Section s = top.sub("bench");
      s.get("repetitions", spec.bench_repetitions);
    }
    top.get("output_dir", spec.output_dir);
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  return parse_spec(read_file(path), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

void validate_spec(const ExperimentSpec& spec) {
  const FieldSpec& f = spec.field;
  const int d = f.domain.dims;
  if (!f.domain.valid()) invalid("field domain must have lo < hi on every axis (2 or 3 axes)");
  if (!(f.cycle_dt > 0)) invalid("field.cycle_dt must be positive");
  if (f.kind == FieldKind::AnalyticABC && d != 3) invalid("abc field is three-dimensional");
  if (f.kind == FieldKind::AnalyticDoubleGyre && d != 2) invalid("double_gyre field is two-dimensional");
  if (f.kind == FieldKind::AnalyticABC && f.abc.period < 0) invalid("field.period must be >= 0 (0 = total time)");
  for (int a = 0; a < 3; ++a) {
    if (a < d) {
      if (spec.grid_dims[a] < 2) invalid("decomposition.grid_dims must be >= 2 on every axis");
      if (spec.layout[a] < 1) invalid("decomposition.layout must be >= 1 on every axis");
      if (spec.layout[a] > spec.grid_dims[a]) invalid("decomposition.layout exceeds grid_dims");
    } else if (spec.grid_dims[a] != 1 || spec.layout[a] != 1) {
      invalid("decomposition has more axes than the field domain");
    }
  }
  if (spec.interval < 1) invalid("extraction.interval must be >= 1");
  if (spec.total_cycles < 1) invalid("extraction.total_cycles must be >= 1");
  if (spec.total_cycles % spec.interval != 0)
    invalid("extraction.interval " + std::to_string(spec.interval) + " does not divide total_cycles " +
            std::to_string(spec.total_cycles));
  if (spec.reduction < 1) invalid("extraction.reduction must be >= 1");
  if (spec.workers < -1) invalid("extraction.workers must be >= -1 (-1 = automatic)");
  if (spec.strategies.empty()) invalid("strategies must not be empty");
  for (std::size_t i = 0; i < spec.strategies.size(); ++i)
    for (std::size_t j = i + 1; j < spec.strategies.size(); ++j)
      if (spec.strategies[i] == spec.strategies[j]) invalid("strategies must not repeat");
  for (const auto& m : spec.metrics)
    if (!kKnownMetrics.count(m)) invalid("unknown metric '" + m + "' (expected accuracy, discard or pathline)");
  if (spec.pathline_seeds_per_axis < 1) invalid("pathlines.seeds_per_axis must be >= 1");
  if (spec.bench_repetitions < 1) invalid("bench.repetitions must be >= 1");
  if (spec.output_dir.empty()) invalid("output_dir must not be empty");
  if (f.kind == FieldKind::Gridded) {
    if (!std::filesystem::is_directory(spec.velocity_path()))
      invalid("field.velocity_dir does not exist: " + spec.velocity_path().string());
    const auto first = spec.velocity_path() / velocity_file_name(0);
    if (!std::filesystem::exists(first)) invalid("gridded velocity file does not exist: " + first.string());
    const auto snap = read_velocity(first);
    if (snap.dims != spec.grid_dims) invalid("decomposition.grid_dims disagree with the velocity files");
  }
}

std::string serialize_spec(const ExperimentSpec& spec) {
  const int d = spec.dims();
  ordered_json f;
  f["kind"] = kind_name(spec.field.kind);
  f["cycle_dt"] = spec.field.cycle_dt;
  switch (spec.field.kind) {
    case FieldKind::AnalyticABC:
      f["a0"] = spec.field.abc.a0;
      f["b"] = spec.field.abc.b;
      f["c"] = spec.field.abc.c;
      f["modulation"] = spec.field.abc.modulation;
      f["period"] = spec.field.abc.period;
      break;
    case FieldKind::AnalyticDoubleGyre:
      f["amplitude"] = spec.field.gyre.amplitude;
      f["epsilon"] = spec.field.gyre.epsilon;
      f["omega"] = spec.field.gyre.omega;
      break;
    case FieldKind::AnalyticLinear: {
      auto m = ordered_json::array();
      for (int r = 0; r < d; ++r) m.push_back(axes(spec.field.linear.matrix[r], d));
      f["matrix"] = m;
      f["offset"] = axes(spec.field.linear.offset, d);
      break;
    }
    case FieldKind::Gridded: f["velocity_dir"] = spec.field.velocity_dir; break;
  }
  if (spec.field.kind != FieldKind::Gridded)
    f["domain"] = {{"lo", axes(spec.field.domain.lo, d)}, {"hi", axes(spec.field.domain.hi, d)}};

  ordered_json root;
  root["field"] = f;
  root["decomposition"] = {{"grid_dims", axes(spec.grid_dims, d)}, {"layout", axes(spec.layout, d)}};
  root["extraction"] = {{"interval", spec.interval},
                        {"reduction", spec.reduction},
                        {"total_cycles", spec.total_cycles},
                        {"rng_seed", spec.rng_seed},
                        {"workers", spec.workers}};
  auto strategies = ordered_json::array();
  for (Strategy s : spec.strategies) strategies.push_back(to_string(s));
  root["strategies"] = strategies;
  root["reconstruction"] = {{"mode", to_string(spec.recon_mode)}};
  root["metrics"] = spec.metrics;
  root["pathlines"] = {{"seeds_per_axis", spec.pathline_seeds_per_axis}};
  root["bench"] = {{"repetitions", spec.bench_repetitions}};
  root["output_dir"] = spec.output_dir;
  return root.dump(2) + "\n";
}

double effective_period(const ExperimentSpec& spec) {
  return spec.field.abc.period > 0 ? spec.field.abc.period : spec.total_cycles * spec.field.cycle_dt;
}

TimeField make_field(const ExperimentSpec& spec) {
  const FieldSpec& f = spec.field;
  switch (f.kind) {
    case FieldKind::AnalyticABC: {
      AbcParams p = f.abc;
      p.period = effective_period(spec);
      return TimeField::abc(p, f.cycle_dt, f.domain);
    }
    case FieldKind::AnalyticDoubleGyre: return TimeField::double_gyre(f.gyre, f.cycle_dt, f.domain);
    case FieldKind::AnalyticLinear: return TimeField::linear(f.linear, f.cycle_dt, f.domain);
    case FieldKind::Gridded: return TimeField::gridded(f.domain, spec.grid_dims, f.cycle_dt);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown field kind");
}

BlockDecomposition make_decomposition(const ExperimentSpec& spec) {
  return BlockDecomposition::decompose(spec.field.domain, spec.grid_dims, spec.layout);
}

SnapshotLoader make_loader(const ExperimentSpec& spec) {
  if (spec.field.kind != FieldKind::Gridded) return {};
  const auto dir = spec.velocity_path();
  const Index3 dims = spec.grid_dims;
  return [dir, dims](int cycle) {
    const auto path = dir / velocity_file_name(cycle);
    if (!std::filesystem::exists(path))
      throw Error(ErrorCode::CycleUnavailable, "no velocity file for cycle " + std::to_string(cycle));
    GridSnapshot snap = read_velocity(path);
    if (snap.cycle != cycle) throw Error(ErrorCode::CycleUnavailable, path.string() + " holds another cycle");
    if (snap.dims != dims) throw Error(ErrorCode::ValidationError, path.string() + " has different grid dims");
    return snap;
  };
}

ExtractionConfig make_extraction_config(const ExperimentSpec& spec, Strategy strategy) {
  ExtractionConfig c;
  c.field = make_field(spec);
  c.decomp = make_decomposition(spec);
  c.interval = spec.interval;
  c.reduction = spec.reduction;
  c.total_cycles = spec.total_cycles;
  c.strategy = strategy;
  c.rng_seed = spec.rng_seed;
  c.workers = spec.workers;
  c.loader = make_loader(spec);
  return c;
}

std::vector<Vec> pathline_seeds(const ExperimentSpec& spec) {
  const Box& box = spec.field.domain;
  const int n = spec.pathline_seeds_per_axis;
  const int nz = box.dims == 3 ? n : 1;
  std::vector<Vec> seeds;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec p{0, 0, 0};
        const int idx[3] = {i, j, k};
        for (int a = 0; a < box.dims; ++a) p[a] = box.lo[a] + box.extent(a) * (idx[a] + 0.5) / n;
        seeds.push_back(p);
      }
  return seeds;
}

}  // namespace lbto
