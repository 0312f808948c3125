#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ltomo {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using V3 = Eigen::Vector3d;

inline constexpr cplx kI{0.0, 1.0};

}  // namespace ltomo
