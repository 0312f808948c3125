#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ltomo/errors.hpp"
#include "ltomo/protocol.hpp"

namespace ltomo {

InstrumentalMatrix InstrumentalMatrix::basis_block(int b) const {
  const int m = row_count();
  if (dim <= 0 || b < 0 || (b + 1) * dim > m)
    throw DimensionMismatch("basis block out of range");
  InstrumentalMatrix out;
  out.dim = dim;
  out.rows = rows.middleRows(b * dim, dim);
  out.weights = weights.segment(b * dim, dim);
  return out;
}

std::vector<CMat> measurement_operators(const InstrumentalMatrix& x) {
  std::vector<CMat> ops;
  ops.reserve(x.row_count());
  for (int j = 0; j < x.row_count(); ++j)
    ops.push_back(x.rows.row(j).adjoint() * x.rows.row(j));
  return ops;
}

double povm_defect(const InstrumentalMatrix& x) {
  if (x.dim <= 0) throw DimensionMismatch("empty protocol");
  const CMat sum = x.rows.adjoint() * x.weights.asDiagonal() * x.rows;
  const double c = sum.trace().real() / x.dim;
  return (sum - c * CMat::Identity(x.dim, x.dim)).cwiseAbs().maxCoeff();
}

CMat lorentz_of_state(const CMat& psi) {
  const int s = static_cast<int>(psi.rows());
  if (s == 0 || psi.cols() != s)
    throw DimensionMismatch("purification must be square (full rank) for its transform");
  Eigen::JacobiSVD<CMat> svd(psi);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(s - 1);
  if (!(smin > 0.0) || smax / smin >= 1e12)
    throw SingularState("state too close to singular for a finite transform");
  CMat l = psi.inverse() / std::sqrt(static_cast<double>(s));
  // Unimodular rescale: divide by the principal s-th root of det L.
  const cplx det = l.determinant();
  l /= std::pow(det, 1.0 / s);
  return l;
}

InstrumentalMatrix apply_lorentz(const InstrumentalMatrix& x, const CMat& l) {
  if (l.rows() != x.dim || l.cols() != x.dim)
    throw DimensionMismatch("transform dimension does not match protocol");
  InstrumentalMatrix out;
  out.dim = x.dim;
  out.rows = x.rows * l;
  out.weights = x.weights;
  for (int j = 0; j < out.row_count(); ++j) {
    const double nrm2 = out.rows.row(j).squaredNorm();
    if (!(nrm2 > 0.0)) throw SingularState("transform annihilates a protocol row");
    out.weights(j) *= nrm2;
    out.rows.row(j) /= std::sqrt(nrm2);
  }
  return out;
}

InstrumentalMatrix normalize_exposure(const InstrumentalMatrix& x, const CMat& rho_ref,
                                      double total) {
  if (!(total >= 0.0)) throw InvalidArgs("exposure total must be nonnegative");
  const RVec lam = rates(x, rho_ref);
  const double expected = x.weights.dot(lam);
  if (!(expected > 0.0)) throw ZeroRate("reference state yields no events under protocol");
  InstrumentalMatrix out = x;
  out.weights *= total / expected;
  return out;
}

RVec rates(const InstrumentalMatrix& x, const CMat& rho) {
  if (rho.rows() != x.dim || rho.cols() != x.dim)
    throw DimensionMismatch("state dimension does not match protocol");
  const double scale = std::abs(rho.trace());
  RVec lam(x.row_count());
  for (int j = 0; j < x.row_count(); ++j) {
    const double v = (x.rows.row(j) * rho * x.rows.row(j).adjoint())(0).real();
    if (v < -1e-14 * std::max(scale, 1.0))
      throw InvalidArgs("negative rate: state is not positive semidefinite");
    lam(j) = std::max(v, 0.0);
  }
  return lam;
}

}  // namespace ltomo
