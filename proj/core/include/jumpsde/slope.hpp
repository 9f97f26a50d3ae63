#pragma once

#include <span>

namespace jumpsde {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log2 residuals
};

/// Least squares of log2(err) against log2(h). Needs at least two levels and positive values.
SlopeFit fit_log2_slope(std::span<const double> h, std::span<const double> err);

}  // namespace jumpsde
