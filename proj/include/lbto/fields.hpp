#pragma once

#include <memory>
#include <numbers>
#include <vector>

#include "lbto/types.hpp"

namespace lbto {

enum class FieldKind { AnalyticABC, AnalyticDoubleGyre, AnalyticLinear, Gridded };

const char* to_string(FieldKind kind);

/// Time-dependent ABC flow. The A coefficient is modulated as
/// A(t) = a0 * (1 + modulation * sin(2 pi t / period)).
struct AbcParams {
  double a0 = std::numbers::sqrt3;
  double b = std::numbers::sqrt2;
  double c = 1.0;
  double modulation = 0.5;
  double period = 1.0;
};

struct DoubleGyreParams {
  double amplitude = 0.1;
  double epsilon = 0.25;
  double omega = 2.0 * std::numbers::pi / 10.0;
};

/// Steady affine field v = matrix * x + offset.
struct LinearParams {
  std::array<Vec, 3> matrix{};
  Vec offset{};
};

/// One cycle of a gridded velocity field: uniform node lattice over `domain`,
/// x-fastest ordering.
struct GridSnapshot {
  Box domain;
  Index3 dims{1, 1, 1};
  int cycle = 0;
  std::vector<Vec> values;

  std::size_t node_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t node_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
  }
  Vec node_position(int i, int j, int k) const;
  /// Multilinear interpolation inside the cell containing x.
  Vec sample(const Vec& x) const;
};

/// A velocity field v(x, t) evaluated one simulation cycle at a time.
///
/// Analytic fields are pure functions of absolute time t = (cycle + frac) * cycle_dt.
/// Gridded fields hold a single loaded snapshot and ignore `frac`; asking for any
/// other cycle raises CycleUnavailable.
class TimeField {
 public:
  /// A zero linear field on the unit cube.
  TimeField() = default;

  static TimeField abc(const AbcParams& params, double cycle_dt, const Box& domain = default_abc_domain());
  static TimeField double_gyre(const DoubleGyreParams& params, double cycle_dt,
                               const Box& domain = default_double_gyre_domain());
  static TimeField linear(const LinearParams& params, double cycle_dt, const Box& domain);
  static TimeField gridded(const Box& domain, const Index3& grid_dims, double cycle_dt);

  static Box default_abc_domain();
  static Box default_double_gyre_domain();

  FieldKind kind() const { return kind_; }
  const Box& domain() const { return domain_; }
  int dims() const { return domain_.dims; }
  double cycle_dt() const { return cycle_dt_; }
  const AbcParams& abc_params() const { return abc_; }
  const DoubleGyreParams& double_gyre_params() const { return gyre_; }
  const LinearParams& linear_params() const { return linear_; }
  const Index3& grid_dims() const { return grid_dims_; }

  /// Replaces the loaded snapshot (Gridded only). Must not race with evaluation.
  void load_cycle(GridSnapshot snapshot);
  /// Cycle of the loaded snapshot, or -1.
  int loaded_cycle() const { return snapshot_ ? snapshot_->cycle : -1; }

  Vec eval(const Vec& x, int cycle, double frac) const;

  /// Evaluation without the domain check, for analytic fields only. Hot path of
  /// the advection kernel after it has already tested containment.
  Vec eval_unchecked(const Vec& x, int cycle, double frac) const;

 private:

  FieldKind kind_ = FieldKind::AnalyticLinear;
  Box domain_{{0, 0, 0}, {1, 1, 1}, 3};
  double cycle_dt_ = 1.0;
  AbcParams abc_;
  DoubleGyreParams gyre_;
  LinearParams linear_;
  Index3 grid_dims_{1, 1, 1};
  std::shared_ptr<const GridSnapshot> snapshot_;
};

/// Maximum |v| over the cycles [first_cycle, last_cycle] and a lattice of
/// `samples_per_axis` points per axis at lo + extent * i / n. Lattices for n and
/// 2n samples are nested, so the result is nondecreasing under doubling.
double max_speed(const TimeField& field, int first_cycle, int last_cycle, int samples_per_axis);

/// Samples an analytic field onto a grid snapshot (test assets and gridded inputs).
GridSnapshot sample_to_grid(const TimeField& field, const Index3& grid_dims, int cycle);

}  // namespace lbto
