#pragma once

#include <cstdint>
#include <optional>

#include "ltomo/protocol.hpp"
#include "ltomo/types.hpp"

namespace ltomo {

// Observed events per protocol row. Counts are stored as reals so exact
// expected-value records (noiseless limits) can be reconstructed too.
struct CountRecord {
  RVec counts;
  InstrumentalMatrix protocol;
  double sample_size_target = 0.0;
};

// Draw k_j ~ Poisson(t_j * Tr(Lambda_j rho)) independently per row.
CountRecord sample_counts(const InstrumentalMatrix& x, const CMat& rho, std::uint64_t seed);

struct MleOptions {
  int rank = 0;  // 0 means full rank (protocol dim)
  int max_iter = 10000;
  double damping = 0.5;
  double state_tol = 1e-10;     // relative purification change per iteration
  double residual_tol = 1e-8;   // stationarity residual relative to ||J||
  std::optional<CMat> warm_start;  // dim x rank purification to iterate from
  std::uint64_t init_seed = 0x5bd1e995u;  // cold-start perturbation stream
  bool compute_condition = true;  // identifiability diagnostic (SVD cost)
};

struct MleResult {
  CMat rho;            // unit-trace estimate
  CMat psi;            // optimizing purification (unnormalized), dim x rank
  double intensity = 0.0;  // trace of psi psi^+ (estimated total intensity)
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // ||(R - J) psi|| / (||J|| ||psi||) at the last iterate
  double loglik = 0.0;
  double condition = 0.0;  // identifiability: cond of the row-operator span
};

// Poisson log-likelihood sum_j [k_j ln(t_j lambda_j) - t_j lambda_j] with
// lambda_j = ||row_j psi||^2 floored at 1e-300 inside the logarithm.
double poisson_loglik(const CountRecord& rec, const CMat& psi);

// Wirtinger gradient d loglik / d psi^* = (R - J) psi with
// J = sum_j t_j Lambda_j and R = sum_j (k_j/lambda_j) Lambda_j.
CMat loglik_gradient(const CountRecord& rec, const CMat& psi);

// Maximum-likelihood reconstruction over dim x rank purifications via the
// damped fixed point psi <- (1-a) psi + a J^+ R psi, with the step halved
// whenever it would decrease the likelihood. Throws NoConvergence when
// max_iter passes without meeting both tolerances, RankDeficientData when
// rows with positive counts keep zero predicted rate.
MleResult mle_reconstruct(const CountRecord& rec, const MleOptions& opts = {});

// Degrees of freedom nu = (2 dim - rank) rank - 1.
int dof(int dim, int rank);

// Accuracy-loss floor nu^2 / (4 n (dim - 1)) for POVM protocols.
double min_loss(int dim, int rank, double n);

// min_loss / loss; values above 1 signal super-efficiency.
double efficiency(double loss, int dim, int rank, double n);

}  // namespace ltomo
