#pragma once

#include <cstdint>

#include "ltomo/types.hpp"

namespace ltomo {

// Density matrices are Hermitian PSD with trace equal to the source intensity
// (not forced to 1). Purifications are s x r factors Psi with rho = Psi Psi^+,
// fixed only up to a right unitary gauge.

struct StateGenConfig {
  int dim = 2;
  int rank = 1;
  double dominant_weight = 1.0;  // largest eigenvalue of the generated state
  std::uint64_t seed = 0;
};

// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
// degenerate values tie-broken by the solver's original index order.
struct EigSorted {
  RVec values;
  CMat vectors;  // column i pairs with values[i]
};
EigSorted eig_descending(const CMat& herm);

// rho = Psi Psi^+ for an s x r purification (rank <= r by construction).
CMat density_of(const CMat& psi);

// s x rank factor whose columns are sqrt(lambda_i) v_i over the `rank`
// largest eigenpairs. Throws RankTooSmall if the numerical rank of rho
// (eigenvalues above 1e-12 * trace) exceeds `rank`.
CMat purify(const CMat& rho, int rank);

// Principal PSD square root via eigendecomposition; negative eigenvalues from
// roundoff are clamped to zero.
CMat sqrtm_psd(const CMat& rho);

// Uhlmann fidelity (Tr sqrt(sqrt(rho) rho0 sqrt(rho)))^2. Symmetric in its
// arguments; callers supply unit-trace inputs.
double fidelity(const CMat& rho, const CMat& rho0);

// Unit-trace rank-r state with spectrum (w, (1-w)/(r-1), ..., (1-w)/(r-1))
// and Haar-random eigenvectors; deterministic in cfg.seed.
CMat random_mixed_state(const StateGenConfig& cfg);

// Keeps the eigenvectors of rho and replaces the spectrum by
// (lambda0, (1-lambda0)/(s-1), ...), matched to the descending eigenvalues.
// Output is full rank; requires lambda0 in (1/s, 1).
CMat regularize_spectrum(const CMat& rho, double lambda0);

// H = (A + A^+)/2 with A iid CN(0,1): E A_ij = 0, E|A_ij|^2 = 1. Hence
// Var H_ii = 1/2 and E|H_ij|^2 = 1/2 off the diagonal.
CMat random_hermitian(int dim, std::uint64_t seed);

}  // namespace ltomo
