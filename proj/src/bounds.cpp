#include "lbto/bounds.hpp"

#include <cmath>

#include "lbto/types.hpp"

namespace lbto {

double hx_tilde(double hx, double ht, double vmax) {
  if (hx < 0 || ht < 0 || vmax < 0) throw Error(ErrorCode::InvalidArgument, "hx_tilde inputs must be nonnegative");
  return 2.0 * hx + 2.0 * ht * vmax;
}

double convergence_order(std::span<const double> spacings, std::span<const double> errors) {
  if (spacings.size() != errors.size()) throw Error(ErrorCode::LengthMismatch, "spacings and errors differ in length");
  if (spacings.size() < 2) throw Error(ErrorCode::DegenerateFit, "need at least two samples");
  const double n = static_cast<double>(spacings.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    if (!(spacings[i] > 0) || !(errors[i] > 0))
      throw Error(ErrorCode::DegenerateFit, "spacings and errors must be positive");
    sx += std::log(spacings[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    const double dx = std::log(spacings[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  if (sxx <= 1e-24) throw Error(ErrorCode::DegenerateFit, "all spacings are equal");
  return sxy / sxx;
}

}  // namespace lbto
