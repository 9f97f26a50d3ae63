#pragma once

#include <Eigen/Dense>

namespace jumpsde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A jump mark γ. Scalar marks are vectors of length one.
using Mark = Eigen::VectorXd;

}  // namespace jumpsde
