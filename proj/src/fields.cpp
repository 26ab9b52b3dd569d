#include "lbto/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lbto {

namespace {

std::string describe(const Vec& x, int dims) {
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < dims; ++a) os << (a ? ", " : "") << x[a];
  os << ")";
  return os.str();
}

Vec eval_abc(const AbcParams& p, const Vec& x, double t) {
  const double a = p.a0 * (1.0 + p.modulation * std::sin(2.0 * std::numbers::pi * t / p.period));
  return {a * std::sin(x[2]) + p.c * std::cos(x[1]),
          p.b * std::sin(x[0]) + a * std::cos(x[2]),
          p.c * std::sin(x[1]) + p.b * std::cos(x[0])};
}

Vec eval_double_gyre(const DoubleGyreParams& p, const Vec& x, double t) {
  using std::numbers::pi;
  const double a = p.epsilon * std::sin(p.omega * t);
  const double b = 1.0 - 2.0 * a;
  const double f = a * x[0] * x[0] + b * x[0];
  const double dfdx = 2.0 * a * x[0] + b;
  return {-pi * p.amplitude * std::sin(pi * f) * std::cos(pi * x[1]),
          pi * p.amplitude * std::cos(pi * f) * std::sin(pi * x[1]) * dfdx, 0.0};
}

Vec eval_linear(const LinearParams& p, const Vec& x) {
  Vec v = p.offset;
  for (int r = 0; r < 3; ++r) v[r] += dot(p.matrix[r], x);
  return v;
}

}  // namespace

const char* to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::AnalyticABC: return "abc";
    case FieldKind::AnalyticDoubleGyre: return "double_gyre";
    case FieldKind::AnalyticLinear: return "linear";
    case FieldKind::Gridded: return "gridded";
  }
  return "unknown";
}

Vec GridSnapshot::node_position(int i, int j, int k) const {
  const Index3 idx{i, j, k};
  Vec x{};
  for (int a = 0; a < domain.dims; ++a) {
    const int n = dims[a];
    x[a] = idx[a] == n - 1 ? domain.hi[a]
                            : domain.lo[a] + domain.extent(a) * (static_cast<double>(idx[a]) / (n - 1));
  }
  return x;
}

Vec GridSnapshot::sample(const Vec& x) const {
  Index3 cell{0, 0, 0};
  Vec frac{0, 0, 0};
  for (int a = 0; a < domain.dims; ++a) {
    const int n = dims[a];
    const double s = (x[a] - domain.lo[a]) / domain.extent(a) * (n - 1);
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    double f = s - i;
    // Snap so that grid nodes reproduce the stored vector exactly.
    if (std::abs(f) < 1e-12) f = 0.0;
    if (std::abs(f - 1.0) < 1e-12) {
      if (i + 1 <= n - 2) {
        ++i;
        f = 0.0;
      } else {
        f = 1.0;
      }
    }
    cell[a] = i;
    frac[a] = f;
  }
  Vec out{0, 0, 0};
  const int corners = 1 << domain.dims;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    Index3 node = cell;
    for (int a = 0; a < domain.dims; ++a) {
      const bool upper = (c >> a) & 1;
      w *= upper ? frac[a] : 1.0 - frac[a];
      node[a] += upper ? 1 : 0;
    }
    if (w == 0.0) continue;
    const Vec& v = values[node_index(node[0], node[1], node[2])];
    for (int a = 0; a < 3; ++a) out[a] += w * v[a];
  }
  return out;
}

Box TimeField::default_abc_domain() {
  const double two_pi = 2.0 * std::numbers::pi;
  return Box{{0, 0, 0}, {two_pi, two_pi, two_pi}, 3};
}

Box TimeField::default_double_gyre_domain() { return Box{{0, 0, 0}, {2, 1, 0}, 2}; }

TimeField TimeField::abc(const AbcParams& params, double cycle_dt, const Box& domain) {
  if (domain.dims != 3 || !domain.valid()) throw Error(ErrorCode::InvalidArgument, "ABC field needs a valid 3D domain");
  if (!(params.period > 0)) throw Error(ErrorCode::InvalidArgument, "ABC period must be positive");
  TimeField f;
  f.kind_ = FieldKind::AnalyticABC;
  f.domain_ = domain;
  f.cycle_dt_ = cycle_dt;
  f.abc_ = params;
  return f;
}

TimeField TimeField::double_gyre(const DoubleGyreParams& params, double cycle_dt, const Box& domain) {
  if (domain.dims != 2 || !domain.valid())
    throw Error(ErrorCode::InvalidArgument, "double gyre needs a valid 2D domain");
  TimeField f;
  f.kind_ = FieldKind::AnalyticDoubleGyre;
  f.domain_ = domain;
  f.cycle_dt_ = cycle_dt;
  f.gyre_ = params;
  return f;
}

TimeField TimeField::linear(const LinearParams& params, double cycle_dt, const Box& domain) {
  if (!domain.valid()) throw Error(ErrorCode::InvalidArgument, "linear field needs a valid domain");
  TimeField f;
  f.kind_ = FieldKind::AnalyticLinear;
  f.domain_ = domain;
  f.cycle_dt_ = cycle_dt;
  f.linear_ = params;
  if (domain.dims == 2) {
    f.linear_.matrix[2] = {0, 0, 0};
    f.linear_.matrix[0][2] = f.linear_.matrix[1][2] = 0.0;
    f.linear_.offset[2] = 0.0;
  }
  return f;
}

TimeField TimeField::gridded(const Box& domain, const Index3& grid_dims, double cycle_dt) {
  if (!domain.valid()) throw Error(ErrorCode::InvalidArgument, "gridded field needs a valid domain");
  for (int a = 0; a < domain.dims; ++a)
    if (grid_dims[a] < 2) throw Error(ErrorCode::InvalidArgument, "gridded field needs >= 2 nodes per axis");
  TimeField f;
  f.kind_ = FieldKind::Gridded;
  f.domain_ = domain;
  f.cycle_dt_ = cycle_dt;
  f.grid_dims_ = grid_dims;
  if (domain.dims == 2) f.grid_dims_[2] = 1;
  return f;
}

void TimeField::load_cycle(GridSnapshot snapshot) {
  if (kind_ != FieldKind::Gridded) throw Error(ErrorCode::InvalidArgument, "load_cycle on an analytic field");
  for (int a = 0; a < domain_.dims; ++a)
    if (snapshot.dims[a] != grid_dims_[a])
      throw Error(ErrorCode::InvalidArgument, "snapshot grid does not match the field grid");
  if (snapshot.values.size() != snapshot.node_count())
    throw Error(ErrorCode::InvalidArgument, "snapshot payload size does not match its grid");
  snapshot.domain = domain_;
  snapshot_ = std::make_shared<const GridSnapshot>(std::move(snapshot));
}

Vec TimeField::eval(const Vec& x, int cycle, double frac) const {
  if (!domain_.contains(x))
    throw Error(ErrorCode::PositionOutOfDomain, describe(x, domain_.dims) + " is outside the field domain");
  if (kind_ == FieldKind::Gridded) {
    if (!snapshot_ || snapshot_->cycle != cycle)
      throw Error(ErrorCode::CycleUnavailable, "cycle " + std::to_string(cycle) + " is not loaded");
    return snapshot_->sample(x);
  }
  return eval_unchecked(x, cycle, frac);
}

Vec TimeField::eval_unchecked(const Vec& x, int cycle, double frac) const {
  const double t = (cycle + frac) * cycle_dt_;
  switch (kind_) {
    case FieldKind::AnalyticABC: return eval_abc(abc_, x, t);
    case FieldKind::AnalyticDoubleGyre: return eval_double_gyre(gyre_, x, t);
    case FieldKind::AnalyticLinear: return eval_linear(linear_, x);
    case FieldKind::Gridded: return eval(x, cycle, frac);
  }
  return {0, 0, 0};
}

double max_speed(const TimeField& field, int first_cycle, int last_cycle, int samples_per_axis) {
  if (samples_per_axis < 2) throw Error(ErrorCode::InvalidArgument, "max_speed needs >= 2 samples per axis");
  const Box& box = field.domain();
  const int nz = box.dims == 3 ? samples_per_axis : 1;
  double best = 0.0;
  for (int c = first_cycle; c <= last_cycle; ++c) {
    if (field.kind() == FieldKind::Gridded && field.loaded_cycle() != c) continue;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < samples_per_axis; ++j)
        for (int i = 0; i < samples_per_axis; ++i) {
          const Index3 idx{i, j, k};
          Vec x{0, 0, 0};
          for (int a = 0; a < box.dims; ++a)
            x[a] = box.lo[a] + box.extent(a) * (static_cast<double>(idx[a]) / samples_per_axis);
          best = std::max(best, norm(field.eval(x, c, 0.0)));
        }
  }
  return best;
}

GridSnapshot sample_to_grid(const TimeField& field, const Index3& grid_dims, int cycle) {
  GridSnapshot snap;
  snap.domain = field.domain();
  snap.dims = grid_dims;
  if (snap.domain.dims == 2) snap.dims[2] = 1;
  snap.cycle = cycle;
  snap.values.resize(snap.node_count());
  for (int k = 0; k < snap.dims[2]; ++k)
    for (int j = 0; j < snap.dims[1]; ++j)
      for (int i = 0; i < snap.dims[0]; ++i)
        snap.values[snap.node_index(i, j, k)] = field.eval(snap.node_position(i, j, k), cycle, 0.0);
  return snap;
}

}  // namespace lbto
