#include "ltomo/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ltomo/errors.hpp"
#include "ltomo/rng.hpp"

namespace ltomo {

namespace {

void require_square(const CMat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(who) + ": square matrix required");
}

}  // namespace

EigSorted eig_descending(const CMat& herm) {
  require_square(herm, "eig_descending");
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  const int n = static_cast<int>(herm.rows());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Solver order is ascending; a stable descending sort keeps the solver's
  // index order inside degenerate clusters.
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });
  EigSorted out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(idx[k]);
    out.vectors.col(k) = es.eigenvectors().col(idx[k]);
  }
  return out;
}

CMat density_of(const CMat& psi) {
  if (psi.rows() < 1 || psi.cols() < 1) throw DimensionMismatch("density_of: empty factor");
  return psi * psi.adjoint();
}

CMat purify(const CMat& rho, int rank) {
  require_square(rho, "purify");
  const int s = static_cast<int>(rho.rows());
  if (rank < 1 || rank > s) throw InvalidArgs("purify: rank must be in [1, dim]");
  EigSorted eig = eig_descending(rho);
  const double floor = 1e-12 * std::abs(rho.trace().real());
  int numerical_rank = 0;
  for (int i = 0; i < s; ++i)
    if (eig.values(i) > floor) ++numerical_rank;
  if (numerical_rank > rank)
    throw RankTooSmall("purify: state has numerical rank " + std::to_string(numerical_rank) +
                       " > requested rank " + std::to_string(rank));
  CMat psi(s, rank);
  for (int i = 0; i < rank; ++i)
    psi.col(i) = std::sqrt(std::max(eig.values(i), 0.0)) * eig.vectors.col(i);
  return psi;
}

CMat sqrtm_psd(const CMat& rho) {
  require_square(rho, "sqrtm_psd");
  EigSorted eig = eig_descending(rho);
  RVec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

double fidelity(const CMat& rho, const CMat& rho0) {
  require_square(rho, "fidelity");
  require_square(rho0, "fidelity");
  if (rho.rows() != rho0.rows()) throw DimensionMismatch("fidelity: dimension mismatch");
  CMat s = sqrtm_psd(rho);
  CMat inner = s * rho0 * s;
  // inner is Hermitian PSD up to roundoff; clamp before the square roots.
  Eigen::SelfAdjointEigenSolver<CMat> es(inner);
  double tr = 0.0;
  for (int i = 0; i < inner.rows(); ++i) tr += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  return tr * tr;
}

CMat random_mixed_state(const StateGenConfig& cfg) {
  if (cfg.dim < 1) throw InvalidArgs("random_mixed_state: dim must be positive");
  if (cfg.rank < 1 || cfg.rank > cfg.dim)
    throw InvalidArgs("random_mixed_state: rank must be in [1, dim]");
  const double w = cfg.dominant_weight;
  if (!(w > 1.0 / cfg.dim) || !(w <= 1.0))
    throw InvalidWeight("random_mixed_state: dominant weight must lie in (1/dim, 1]");
  if (cfg.rank == 1 && w != 1.0)
    throw InvalidWeight("random_mixed_state: rank 1 requires dominant weight 1");
  RVec spectrum(cfg.rank);
  spectrum(0) = w;
  for (int i = 1; i < cfg.rank; ++i) spectrum(i) = (1.0 - w) / (cfg.rank - 1);
  auto rng = make_rng(cfg.seed);
  CMat q = haar_unitary(cfg.dim, rng);
  CMat rho = CMat::Zero(cfg.dim, cfg.dim);
  for (int i = 0; i < cfg.rank; ++i)
    rho += spectrum(i) * (q.col(i) * q.col(i).adjoint());
  return rho;
}

CMat regularize_spectrum(const CMat& rho, double lambda0) {
  require_square(rho, "regularize_spectrum");
  const int s = static_cast<int>(rho.rows());
  if (s < 2) throw InvalidArgs("regularize_spectrum: dim must be at least 2");
  if (!(lambda0 > 1.0 / s) || !(lambda0 < 1.0))
    throw InvalidWeight("regularize_spectrum: weight must lie in (1/dim, 1)");
  EigSorted eig = eig_descending(rho);
  RVec spectrum(s);
  spectrum(0) = lambda0;
  for (int i = 1; i < s; ++i) spectrum(i) = (1.0 - lambda0) / (s - 1);
  return eig.vectors * spectrum.asDiagonal() * eig.vectors.adjoint();
}

CMat random_hermitian(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidArgs("random_hermitian: dim must be positive");
  auto rng = make_rng(seed);
  CMat a = ginibre(dim, rng);
  return 0.5 * (a + a.adjoint());
}

}  // namespace ltomo
