#pragma once

#include <Eigen/Dense>

namespace wntk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace wntk
