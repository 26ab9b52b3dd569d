#pragma once

#include <span>

namespace lbto {

/// Effective seed spacing near block faces: 2 hx + 2 ht vmax.
double hx_tilde(double hx, double ht, double vmax);

/// Least-squares slope of log(error) against log(spacing).
double convergence_order(std::span<const double> spacings, std::span<const double> errors);

struct BoundReport {
  double hx = 0;
  double ht = 0;
  double vmax = 0;
  double hx_tilde = 0;
  double predicted_order = 2;
  double measured_order = 0;
};

}  // namespace lbto
