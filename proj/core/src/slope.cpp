#include "jumpsde/slope.hpp"

#include <cmath>
#include <vector>

#include "jumpsde/errors.hpp"

namespace jumpsde {

SlopeFit fit_log2_slope(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size()) throw InvalidArgument("fit_log2_slope: h and err differ in length");
  if (h.size() < 2) throw InvalidArgument("fit_log2_slope: need at least two levels");
  const auto n = static_cast<double>(h.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0) || !std::isfinite(h[i]) || !std::isfinite(err[i])) {
      throw InvalidArgument("fit_log2_slope: step sizes and errors must be positive and finite");
    }
    lx.push_back(std::log2(h[i]));
    ly.push_back(std::log2(err[i]));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_log2_slope: step sizes are all equal");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace jumpsde
