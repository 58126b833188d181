#pragma once

#include <Eigen/Dense>

namespace stosqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace stosqp
