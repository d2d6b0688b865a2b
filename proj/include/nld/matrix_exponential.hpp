#pragma once

#include <Eigen/Core>

namespace nld {

/// exp(A) by scaling and squaring around a degree-13 Pade approximant
/// (Higham's 2005 parameter choice).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

}  // namespace nld
