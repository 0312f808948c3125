#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"

namespace ltomo {
namespace {

constexpr double kRateFloor = 1e-300;

RVec predicted_rates(const CMat& bpsi) { return bpsi.rowwise().squaredNorm(); }

double loglik_from_rates(const RVec& k, const RVec& t, const RVec& lam) {
  double l = 0.0;
  for (int j = 0; j < k.size(); ++j) {
    if (k(j) > 0.0) l += k(j) * std::log(t(j) * std::max(lam(j), kRateFloor));
    l -= t(j) * lam(j);
  }
  return l;
}

// Identifiability of the protocol: condition number of the real design
// matrix whose rows are the Hermitian coordinates of sqrt(t_j) Lambda_j.
// Infinite when the operators fail to span the full matrix space.
double design_condition(const InstrumentalMatrix& x) {
  const int s = x.dim;
  const int m = x.row_count();
  Eigen::MatrixXd design(m, s * s);
  constexpr double kRt2 = 1.4142135623730951;
  for (int j = 0; j < m; ++j) {
    const CVec ket = x.ket(j);
    const double w = std::sqrt(x.weights(j));
    int c = 0;
    for (int a = 0; a < s; ++a) {
      design(j, c++) = w * std::norm(ket(a));
      for (int b = a + 1; b < s; ++b) {
        const cplx e = w * ket(a) * std::conj(ket(b));
        design(j, c++) = kRt2 * e.real();
        design(j, c++) = kRt2 * e.imag();
      }
    }
  }
  if (m < s * s) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-12 * smax)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

CMat cold_start(const InstrumentalMatrix& x, const RVec& counts, int rank,
                std::uint64_t init_seed) {
  const int s = x.dim;
  CMat psi = CMat::Zero(s, rank);
  for (int c = 0; c < rank; ++c) psi(c, c) = 1.0 / std::sqrt(static_cast<double>(rank));
  auto rng = make_rng(init_seed);
  const CMat noise = ginibre(s, rank, rng);
  psi += 1e-3 * (psi.norm() / noise.norm()) * noise;
  // Match the predicted total intensity to the observed one.
  const double expected = x.weights.dot(predicted_rates(x.rows * psi));
  const double observed = counts.sum();
  if (expected > 0.0 && observed > 0.0) psi *= std::sqrt(observed / expected);
  return psi;
}

}  // namespace

CountRecord sample_counts(const InstrumentalMatrix& x, const CMat& rho, std::uint64_t seed) {
  const RVec lam = rates(x, rho);
  auto rng = make_rng(seed);
  CountRecord rec;
  rec.protocol = x;
  rec.sample_size_target = x.weights.dot(lam);
  rec.counts = RVec::Zero(x.row_count());
  for (int j = 0; j < x.row_count(); ++j) {
    const double mean = x.weights(j) * lam(j);
    if (mean > 0.0) {
      std::poisson_distribution<long long> poisson(mean);
      rec.counts(j) = static_cast<double>(poisson(rng));
    }
  }
  return rec;
}

double poisson_loglik(const CountRecord& rec, const CMat& psi) {
  if (psi.rows() != rec.protocol.dim)
    throw DimensionMismatch("purification dimension does not match protocol");
  return loglik_from_rates(rec.counts, rec.protocol.weights,
                           predicted_rates(rec.protocol.rows * psi));
}

CMat loglik_gradient(const CountRecord& rec, const CMat& psi) {
  if (psi.rows() != rec.protocol.dim)
    throw DimensionMismatch("purification dimension does not match protocol");
  const CMat& b = rec.protocol.rows;
  const CMat bpsi = b * psi;
  const RVec lam = predicted_rates(bpsi);
  RVec w(lam.size());
  for (int j = 0; j < lam.size(); ++j) {
    w(j) = (rec.counts(j) > 0.0 ? rec.counts(j) / std::max(lam(j), kRateFloor) : 0.0) -
           rec.protocol.weights(j);
  }
  return b.adjoint() * w.asDiagonal() * bpsi;
}

MleResult mle_reconstruct(const CountRecord& rec, const MleOptions& opts) {
  const InstrumentalMatrix& x = rec.protocol;
  const int s = x.dim;
  const int m = x.row_count();
  if (s <= 0 || rec.counts.size() != m) throw DimensionMismatch("counts do not match protocol");
  if (rec.counts.minCoeff() < 0.0) throw InvalidArgs("negative event count");
  if (!(rec.counts.sum() > 0.0)) throw InvalidArgs("no events to reconstruct from");
  const int rank = opts.rank == 0 ? s : opts.rank;
  if (rank < 1 || rank > s) throw RankTooSmall("reconstruction rank out of range");

  const CMat& b = x.rows;
  const RVec& t = x.weights;
  const RVec& k = rec.counts;

  // J = B^+ diag(t) B is constant; invert on its numerical range so
  // under-determined directions simply decay under the damped update.
  const CMat j_mat = b.adjoint() * t.asDiagonal() * b;
  Eigen::SelfAdjointEigenSolver<CMat> jes(j_mat);
  if (jes.info() != Eigen::Success) throw NumericalError("normalization operator eigensolve failed");
  const RVec jev = jes.eigenvalues();
  RVec jinv = RVec::Zero(s);
  const double jcut = 1e-12 * jev.cwiseAbs().maxCoeff();
  for (int i = 0; i < s; ++i) jinv(i) = jev(i) > jcut ? 1.0 / jev(i) : 0.0;
  const CMat j_pinv = jes.eigenvectors() * jinv.asDiagonal() * jes.eigenvectors().adjoint();

  CMat psi;
  if (opts.warm_start.has_value()) {
    if (opts.warm_start->rows() != s || opts.warm_start->cols() != rank)
      throw DimensionMismatch("warm start has wrong shape");
    psi = *opts.warm_start;
  } else {
    psi = cold_start(x, k, rank, opts.init_seed);
  }

  const double alpha = opts.damping;
  MleResult res;
  if (opts.compute_condition) res.condition = design_condition(x);

  // Stationarity is measured against the scale of J itself so the verdict does
  // not depend on the exposure units the counts happen to be expressed in.
  const double j_scale = std::max(j_mat.norm(), 1e-100);

  CMat bpsi = b * psi;
  RVec lam = predicted_rates(bpsi);
  double ll = loglik_from_rates(k, t, lam);

  int stale_rows = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    bool starved = false;
    RVec w(m);
    for (int j = 0; j < m; ++j) {
      if (k(j) > 0.0 && lam(j) < 1e-250) starved = true;
      w(j) = k(j) > 0.0 ? k(j) / std::max(lam(j), kRateFloor) : 0.0;
    }
    stale_rows = starved ? stale_rows + 1 : 0;
    if (stale_rows > 100)
      throw RankDeficientData("rows with events keep zero predicted rate");

    const CMat r_psi = b.adjoint() * (w.asDiagonal() * bpsi);
    const CMat j_psi = b.adjoint() * (t.asDiagonal() * bpsi);

    const double scale = std::max(psi.norm(), 1e-100);
    const double residual = (r_psi - j_psi).norm() / (j_scale * scale);
    res.residual = residual;

    // The damped fixed-point move is an ascent direction of the likelihood
    // ((R-J)J^+(R-J) is PSD), but a full step can overshoot into vanishing
    // predicted rates; halve the step until the objective stops decreasing.
    const CMat dir = alpha * (j_pinv * r_psi - psi);
    const double ll_floor = ll - 1e-12 * std::max(1.0, std::abs(ll));
    double beta = 1.0;
    CMat cand, bcand;
    RVec lam_cand;
    double ll_cand;
    for (;;) {
      cand = psi + beta * dir;
      bcand = b * cand;
      lam_cand = predicted_rates(bcand);
      ll_cand = loglik_from_rates(k, t, lam_cand);
      if (ll_cand >= ll_floor) break;
      beta *= 0.5;
      if (beta < 1e-9)
        throw NumericalError("likelihood decreased during fixed-point iteration");
    }

    const double step = beta * dir.norm() / scale;
    res.iterations = it;
    psi = std::move(cand);
    bpsi = std::move(bcand);
    lam = std::move(lam_cand);
    ll = ll_cand;
    if (step <= opts.state_tol && residual <= opts.residual_tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged)
    throw NoConvergence("likelihood fixed point not reached in " +
                        std::to_string(opts.max_iter) + " iterations");

  res.psi = psi;
  res.loglik = ll;
  CMat rho = density_of(psi);
  res.intensity = rho.trace().real();
  if (!(res.intensity > 0.0)) throw NumericalError("estimate collapsed to zero intensity");
  res.rho = rho / res.intensity;
  return res;
}

int dof(int dim, int rank) {
  if (dim < 2 || rank < 1 || rank > dim) throw InvalidArgs("degrees of freedom need 1 <= rank <= dim, dim >= 2");
  return (2 * dim - rank) * rank - 1;
}

double min_loss(int dim, int rank, double n) {
  if (!(n > 0.0)) throw InvalidArgs("sample size must be positive");
  const double nu = static_cast<double>(dof(dim, rank));
  return nu * nu / (4.0 * n * (dim - 1));
}

double efficiency(double loss, int dim, int rank, double n) {
  if (loss == 0.0) throw DivisionByZero("efficiency undefined at zero loss");
  if (!(loss > 0.0)) throw InvalidArgs("loss must be positive");
  return min_loss(dim, rank, n) / loss;
}

}  // namespace ltomo
