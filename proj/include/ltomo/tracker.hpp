#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ltomo/estimator.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/types.hpp"

namespace ltomo {

// Closed-loop evolution-tracking run: a qudit evolves under a periodically
// modulated Hamiltonian while an adaptive protocol, re-tuned every step from
// the previous estimate, measures n representatives per step.
struct EvolutionConfig {
  int dim = 8;
  double eps = 3e-5;          // dimensionless time step
  double g = 0.5;             // Hamiltonian modulation intensity
  int period = 1000;          // modulation period in steps
  int total_steps = 5000;
  double sample_size = 1e4;   // registered events per step
  double target_weight = 0.9999;    // protocol tuning weight
  // Dominant weight of the true initial state; 1 means an exactly pure
  // (rank-1) initial state.
  double initial_weight = 0.999999;
  double hamiltonian_scale = 1.0;  // 0 freezes the evolution entirely
  std::uint64_t hamiltonian_seed = 0;
  std::uint64_t state_seed = 0;
  std::uint64_t noise_seed = 0;
  // When set, the chain starts from a plain-MUB estimate of the initial state
  // (setup_sample_size events, 0 meaning sample_size) instead of treating the
  // initial state as known. Early-step back-action then reflects the setup
  // estimate's error instead of the tuning-weight floor.
  bool bootstrap_estimate = false;
  double setup_sample_size = 0.0;
};

struct TrackingRecord {
  int step = 0;
  double recon_fidelity = 0.0;  // F(estimate, true state)
  double loss = 0.0;            // 1 - F
  double efficiency = 0.0;      // min_loss(dim, dim, n) / loss
  RVec detection_fractions;     // per adapted row, on the weak representative
  double backaction_fidelity = 0.0;  // survival * |<ideal|weak>|^2
};

// H0 scaled by the periodic modulation 1 + g sin(2 pi j / period).
CMat hamiltonian_at(const CMat& h0, double g, int period, int j);

// exp(-i eps h) via eigendecomposition of the Hermitian h.
CMat unitary_of(const CMat& h, double eps);

// One evolution step rho -> U rho U^+ with U = exp(-i eps h).
CMat evolve(const CMat& rho, const CMat& h, double eps);

// Protocol for the next step: regularize the estimate's spectrum to
// target_weight, purify in the Hermitian gauge, transform the base protocol
// by the state's Lorentz matrix, and normalize exposures so the expected
// registered events on the (unregularized) estimate equal total.
InstrumentalMatrix adapt_protocol(const CMat& rho_est, const InstrumentalMatrix& base,
                                  double target_weight, double total);

struct BackactionResult {
  CVec state;          // surviving normalized pure state
  double survival = 0.0;  // no-click probability ||M0 psi||^2
};

// Evolve the weak representative by u0, then apply the no-click branch of
// weakly querying every row of x, M0 = I - (1/2) sum_j |phi_j><phi_j|, and
// renormalize. survival * |<in|out>|^2 = (1 - sum_j x_j / 2)^2 where x_j is
// the detection fraction of row j on the incoming state.
BackactionResult backaction_step(const CVec& phi_weak, const CMat& u0,
                                 const InstrumentalMatrix& x);

// Per-row click probabilities Tr(|phi_j><phi_j| rho) for unit rows.
RVec detection_fractions(const InstrumentalMatrix& x, const CMat& rho);
RVec detection_fractions(const InstrumentalMatrix& x, const CVec& psi);

// Run the full loop, emitting one record per step in order. Errors from the
// estimator or protocol are rethrown with the step index attached.
void run_tracking(const EvolutionConfig& cfg,
                  const std::function<void(const TrackingRecord&)>& emit);
std::vector<TrackingRecord> run_tracking(const EvolutionConfig& cfg);

}  // namespace ltomo
