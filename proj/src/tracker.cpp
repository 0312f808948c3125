#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "ltomo/errors.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"
#include "ltomo/tracker.hpp"

namespace ltomo {
namespace {

void validate(const EvolutionConfig& cfg) {
  if (cfg.dim < 2) throw UnsupportedDimension("tracking needs dim >= 2");
  if (!(cfg.eps > 0.0)) throw InvalidArgs("time step must be positive");
  if (cfg.period < 1) throw InvalidArgs("modulation period must be >= 1 step");
  if (cfg.total_steps < 1) throw InvalidArgs("need at least one tracking step");
  if (!(cfg.sample_size > 0.0)) throw InvalidArgs("sample size must be positive");
  const double floor = 1.0 / cfg.dim;
  if (!(cfg.target_weight > floor) || cfg.target_weight > 1.0)
    throw InvalidWeight("target weight must lie in (1/dim, 1]");
  if (!(cfg.initial_weight > floor) || cfg.initial_weight > 1.0)
    throw InvalidWeight("initial weight must lie in (1/dim, 1]");
  if (cfg.setup_sample_size < 0.0) throw InvalidArgs("setup sample size must be nonnegative");
}

}  // namespace

CMat hamiltonian_at(const CMat& h0, double g, int period, int j) {
  if (period < 1) throw InvalidArgs("modulation period must be >= 1 step");
  const double phase = 2.0 * std::numbers::pi * j / period;
  return h0 * (1.0 + g * std::sin(phase));
}

CMat unitary_of(const CMat& h, double eps) {
  if (h.rows() != h.cols()) throw DimensionMismatch("Hamiltonian must be square");
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian eigensolve failed");
  CVec phases(h.rows());
  for (int i = 0; i < h.rows(); ++i) phases(i) = std::exp(-kI * (eps * es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMat evolve(const CMat& rho, const CMat& h, double eps) {
  const CMat u = unitary_of(h, eps);
  return u * rho * u.adjoint();
}

InstrumentalMatrix adapt_protocol(const CMat& rho_est, const InstrumentalMatrix& base,
                                  double target_weight, double total) {
  if (std::abs(rho_est.trace().real() - 1.0) > 1e-9 || std::abs(rho_est.trace().imag()) > 1e-9)
    throw InvalidArgs("adaptation estimate must have unit trace");
  const CMat rho_reg = regularize_spectrum(rho_est, target_weight);
  // Hermitian-gauge purification: psi = rho_reg^(1/2), so the transform is
  // the positive matrix (det rho_reg)^(1/2s) rho_reg^(-1/2). This gauge keeps
  // every transformed row generic with respect to the estimate's eigenbasis;
  // gauges that align rows with eigenvectors would make some rows click with
  // probability near 1.
  const CMat psi = sqrtm_psd(rho_reg);
  const CMat l = lorentz_of_state(psi);
  InstrumentalMatrix out = apply_lorentz(base, l);
  // Exposure is calibrated against the estimate itself (not its regularized
  // surrogate): the expected number of registered events on the actual state
  // then comes out at the requested total.
  return normalize_exposure(out, rho_est, total);
}

BackactionResult backaction_step(const CVec& phi_weak, const CMat& u0,
                                 const InstrumentalMatrix& x) {
  if (phi_weak.size() != x.dim || u0.rows() != x.dim || u0.cols() != x.dim)
    throw DimensionMismatch("weak representative does not match protocol");
  BackactionResult res;
  res.state = u0 * phi_weak;
  // No-click branch of querying every row weakly: M0 = I - (1/2) sum_j P_j.
  // This is a valid Kraus operator whenever ||sum_j P_j|| <= 4 (an orthonormal
  // basis gives exactly 1), and its fidelity against the incoming state is
  // (1 - sum_j x_j / 2)^2 regardless of how the rows crowd each other, so the
  // no-click disturbance tracks the summed detection fractions to first order.
  res.state -= 0.5 * (x.rows.adjoint() * (x.rows * res.state));
  const double norm = res.state.norm();
  if (norm < 1e-150) throw ZeroSurvival("measurement annihilated the weak representative");
  res.survival = norm * norm;
  if (res.survival > 1.0 + 1e-9)
    throw NumericalError("protocol rows too crowded for a weak no-click branch");
  res.state /= norm;
  return res;
}

RVec detection_fractions(const InstrumentalMatrix& x, const CMat& rho) {
  return rates(x, rho);
}

RVec detection_fractions(const InstrumentalMatrix& x, const CVec& psi) {
  if (psi.size() != x.dim) throw DimensionMismatch("state dimension does not match protocol");
  return (x.rows * psi).cwiseAbs2();
}

void run_tracking(const EvolutionConfig& cfg,
                  const std::function<void(const TrackingRecord&)>& emit) {
  validate(cfg);
  const int s = cfg.dim;
  const CMat h0 = cfg.hamiltonian_scale * random_hermitian(s, cfg.hamiltonian_seed);
  const int state_rank = cfg.initial_weight == 1.0 ? 1 : s;
  CMat rho_true = random_mixed_state({s, state_rank, cfg.initial_weight, cfg.state_seed});
  const InstrumentalMatrix base = mub_protocol(s);

  CMat rho_hat;
  CMat psi_warm;
  if (cfg.bootstrap_estimate) {
    // Estimate the initial state from one plain (untransformed) MUB run.
    const double n0 = cfg.setup_sample_size > 0.0 ? cfg.setup_sample_size : cfg.sample_size;
    const InstrumentalMatrix x0 = normalize_exposure(base, rho_true, n0);
    const CountRecord rec0 = sample_counts(x0, rho_true, derive_seed(cfg.noise_seed, 0));
    MleOptions opts;
    opts.rank = s;
    // Plain-MUB data on a nearly pure state sits close to the identifiability
    // boundary where the fixed point slows down; budget for the tail.
    opts.max_iter = 5000000;
    const MleResult res0 = mle_reconstruct(rec0, opts);
    rho_hat = res0.rho;
    psi_warm = res0.psi;
  } else {
    // The initial state is treated as known: the experimenter tunes the first
    // protocol to the state actually prepared.
    rho_hat = rho_true;
    psi_warm = sqrtm_psd(rho_true);
  }

  CVec psi_ideal = eig_descending(rho_true).vectors.col(0);
  CVec psi_weak = psi_ideal;
  const double floor_loss = min_loss(s, s, cfg.sample_size);

  for (int j = 1; j <= cfg.total_steps; ++j) {
    try {
      const CMat h = hamiltonian_at(h0, cfg.g, cfg.period, j);
      const CMat u = unitary_of(h, cfg.eps);
      rho_true = u * rho_true * u.adjoint();
      psi_ideal = u * psi_ideal;

      const InstrumentalMatrix adapted =
          adapt_protocol(rho_hat, base, cfg.target_weight, cfg.sample_size);
      // Click probabilities are scored on the incoming representative, before
      // this step's measurement acts on it.
      const CVec psi_in = u * psi_weak;
      const RVec fractions = detection_fractions(adapted, psi_in);
      // One von Neumann basis is queried weakly per step, cycling through the
      // dim+1 bases: each step spends one basis worth of click probability
      // (~(1-lambda0)/(dim-1) in total), which is the per-step disturbance
      // budget the protocol is designed around; sweeping all m rows every
      // step would multiply that cost (dim+1)-fold.
      const InstrumentalMatrix slice = adapted.basis_block((j - 1) % (s + 1));
      const BackactionResult weak = backaction_step(psi_weak, u, slice);
      psi_weak = weak.state;

      const CountRecord rec = sample_counts(adapted, rho_true, derive_seed(cfg.noise_seed, j));
      MleOptions opts;
      opts.rank = s;
      opts.warm_start = psi_warm;
      opts.compute_condition = false;
      opts.max_iter = 5000000;  // occasional steps land near a rank boundary
      const MleResult res = mle_reconstruct(rec, opts);
      rho_hat = res.rho;
      psi_warm = res.psi;

      TrackingRecord out;
      out.step = j;
      out.recon_fidelity = fidelity(rho_hat, rho_true);
      out.loss = std::max(1.0 - out.recon_fidelity, 0.0);
      out.efficiency = out.loss > 0.0 ? floor_loss / out.loss
                                      : std::numeric_limits<double>::infinity();
      out.detection_fractions = fractions;
      // The no-click branch is kept unnormalized within a step: its fidelity
      // against the unperturbed trajectory carries this step's survival
      // probability alongside the accumulated coherent disturbance.
      const cplx overlap = psi_ideal.adjoint() * psi_weak;
      out.backaction_fidelity = weak.survival * std::norm(overlap);
      emit(out);
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(j) + ": " + e.what());
    } catch (const InvalidArgs& e) {
      throw InvalidArgs("step " + std::to_string(j) + ": " + e.what());
    }
  }
}

std::vector<TrackingRecord> run_tracking(const EvolutionConfig& cfg) {
  std::vector<TrackingRecord> records;
  records.reserve(cfg.total_steps);
  run_tracking(cfg, [&records](const TrackingRecord& r) { records.push_back(r); });
  return records;
}

}  // namespace ltomo
