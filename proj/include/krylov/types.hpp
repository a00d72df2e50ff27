#pragma once

#include <complex>

#include <Eigen/Core>

namespace krylov {

using cplx = std::complex<double>;
using Index = Eigen::Index;

using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

}  // namespace krylov
