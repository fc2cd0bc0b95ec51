#pragma once

#include <Eigen/Dense>

namespace micromc {

using Real   = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index  = Eigen::Index;

}  // namespace micromc
