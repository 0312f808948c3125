#pragma once

#include <vector>

#include "ltomo/types.hpp"

namespace ltomo {

// A measurement protocol as an instrumental matrix: row j is the bra <phi_j|
// of a projective line, weight t_j its exposure. The measurement operator of
// row j is Lambda_j = row^+ row = |phi_j><phi_j| and the expected number of
// events is t_j * Tr(Lambda_j rho).
struct InstrumentalMatrix {
  int dim = 0;
  CMat rows;     // m x dim, unit-norm bras
  RVec weights;  // m positive exposures

  int row_count() const { return static_cast<int>(rows.rows()); }
  // |phi_j>: component-wise conjugate of the stored bra.
  CVec ket(int j) const { return rows.row(j).adjoint(); }
  // Rows [b*dim, (b+1)*dim) — one complete basis of a basis-major protocol.
  InstrumentalMatrix basis_block(int b) const;
};

// Complete set of s+1 mutually unbiased bases as s(s+1) unit rows with unit
// weights, basis-major order, computational basis first. Supported dims:
// any odd prime (quadratic Weyl-Heisenberg phases) and 2, 4, 8 (joint
// eigenbases of the Galois-field commuting displacement classes; for s = 2
// this yields the sigma_3, sigma_1, sigma_2 eigenbases in that order).
InstrumentalMatrix mub_protocol(int dim);

// Rank-1 operators Lambda_j = rows[j]^+ rows[j].
std::vector<CMat> measurement_operators(const InstrumentalMatrix& x);

// Max-entry norm of sum_j t_j Lambda_j - c I with c = Tr(sum)/dim; zero iff
// the weighted protocol resolves the identity (POVM condition).
double povm_defect(const InstrumentalMatrix& x);

// Transform taking a full-rank state with purification psi (dim x dim) to a
// multiple of the identity: L = psi^{-1}/sqrt(dim), rescaled to det L = 1.
// Throws SingularState when cond(psi) >= 1e12.
CMat lorentz_of_state(const CMat& psi);

// Row map X_j -> X_j L with the squared row norm folded into the weight:
// t_j -> t_j * ||X_j L||^2, rows re-normalized to unit norm.
InstrumentalMatrix apply_lorentz(const InstrumentalMatrix& x, const CMat& l);

// Scale all weights by one factor so sum_j t_j Tr(Lambda_j rho_ref) = total.
InstrumentalMatrix normalize_exposure(const InstrumentalMatrix& x, const CMat& rho_ref,
                                      double total);

// Per-row rates Tr(Lambda_j rho), clamped at zero (inputs may carry -1e-14
// scale roundoff).
RVec rates(const InstrumentalMatrix& x, const CMat& rho);

}  // namespace ltomo
