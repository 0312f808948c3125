#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"

using namespace ltomo;

namespace {

CountRecord exact_counts(const InstrumentalMatrix& x, const CMat& rho) {
  CountRecord rec;
  rec.protocol = x;
  rec.counts = x.weights.cwiseProduct(rates(x, rho));
  rec.sample_size_target = rec.counts.sum();
  return rec;
}

}  // namespace

TEST_CASE("degrees of freedom and loss floor oracles") {
  CHECK(dof(8, 8) == 63);
  CHECK(dof(2, 1) == 2);
  CHECK(dof(8, 1) == 14);
  CHECK(min_loss(8, 8, 1e4) == doctest::Approx(1.4175e-2).epsilon(1e-14));
  CHECK(min_loss(2, 1, 100.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(efficiency(2.15997e-6, 8, 8, 1e4) == doctest::Approx(6562.59).epsilon(1e-5));
  CHECK_THROWS_AS(efficiency(0.0, 8, 8, 1e4), DivisionByZero);
  CHECK_THROWS_AS(min_loss(8, 8, 0.0), InvalidArgs);
  CHECK_THROWS_AS(dof(2, 3), InvalidArgs);
}

TEST_CASE("sample_counts is deterministic in the seed") {
  const CMat rho = random_mixed_state({2, 2, 0.8, 7});
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(2), rho, 1e4);
  const CountRecord a = sample_counts(x, rho, 42);
  const CountRecord b = sample_counts(x, rho, 42);
  const CountRecord c = sample_counts(x, rho, 43);
  CHECK((a.counts - b.counts).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.counts - c.counts).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.sample_size_target == doctest::Approx(1e4).epsilon(1e-12));
}

TEST_CASE("sample totals follow the exposure") {
  const CMat rho = CMat::Identity(8, 8) / 8.0;
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(8), rho, 1e4);
  const double total = sample_counts(x, rho, 67).counts.sum();
  CHECK(std::abs(total - 1e4) < 500.0);  // 5 sigma for Poisson(1e4)
}

TEST_CASE("loglik gradient matches finite differences") {
  const CMat rho = random_mixed_state({3, 3, 0.6, 79});
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(3), rho, 1e3);
  const CountRecord rec = sample_counts(x, rho, 83);
  const CMat mix = 0.7 * rho + 0.3 * CMat::Identity(3, 3) / 3.0;
  CMat psi = sqrtm_psd(mix);
  psi *= std::sqrt(rec.counts.sum() / x.weights.dot(rates(x, mix)));
  auto rng = make_rng(89);
  for (int t = 0; t < 6; ++t) {
    CMat dir = ginibre(3, 3, rng);
    dir /= dir.norm();
    const double h = 1e-6 * psi.norm();
    const double fd =
        (poisson_loglik(rec, psi + h * dir) - poisson_loglik(rec, psi - h * dir)) / (2.0 * h);
    const double an =
        2.0 * (loglik_gradient(rec, psi).conjugate().cwiseProduct(dir)).sum().real();
    CHECK(std::abs(fd - an) < 1e-5 * std::max(std::abs(fd), 1.0));
  }
}

TEST_CASE("noiseless counts are reconstructed to machine loss") {
  CVec v(2);
  v << cplx(1.0, 0.0) / std::sqrt(3.0), cplx(1.0, 1.0) / std::sqrt(3.0);
  const CMat pure = v * v.adjoint();
  MleOptions opts;
  opts.rank = 1;
  const MleResult a =
      mle_reconstruct(exact_counts(normalize_exposure(mub_protocol(2), pure, 1e4), pure), opts);
  CHECK(a.converged);
  CHECK(1.0 - fidelity(a.rho, pure) < 1e-9);

  const CMat rho = random_mixed_state({4, 4, 0.6, 97});
  const MleResult b =
      mle_reconstruct(exact_counts(normalize_exposure(mub_protocol(4), rho, 1e4), rho));
  CHECK(b.converged);
  CHECK(1.0 - fidelity(b.rho, rho) < 1e-9);
}

TEST_CASE("estimates are stationary, deterministic, and intensity-faithful") {
  const CMat rho = random_mixed_state({4, 4, 0.7, 103});
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(4), rho, 1e4);
  const CountRecord rec = sample_counts(x, rho, 105);
  const MleResult res = mle_reconstruct(rec);
  CHECK(res.converged);
  CHECK(res.residual <= 1e-8);
  const CMat jmat = x.rows.adjoint() * x.weights.asDiagonal() * x.rows;
  CHECK(loglik_gradient(rec, res.psi).norm() / (jmat.norm() * res.psi.norm()) <= 1.01e-8);
  // At stationarity the predicted event total matches the observed one.
  const double predicted = x.weights.dot(rates(x, density_of(res.psi)));
  CHECK(predicted == doctest::Approx(rec.counts.sum()).epsilon(1e-6));
  CHECK(res.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.condition > 1.0);
  CHECK(std::isfinite(res.condition));
  const MleResult again = mle_reconstruct(rec);
  CHECK((res.rho - again.rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-basis data converges but is flagged unidentifiable") {
  CMat rho = CMat::Zero(2, 2);
  rho(0, 0) = 0.65;
  rho(1, 1) = 0.35;
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(2).basis_block(0), rho, 1e3);
  const MleResult res = mle_reconstruct(sample_counts(x, rho, 107));
  CHECK(res.converged);
  CHECK(std::isinf(res.condition));
}

TEST_CASE("warm starts shrink the iteration count") {
  const CMat rho = random_mixed_state({4, 4, 0.7, 109});
  const InstrumentalMatrix x = normalize_exposure(mub_protocol(4), rho, 1e4);
  const CountRecord rec = sample_counts(x, rho, 111);
  const MleResult cold = mle_reconstruct(rec);
  MleOptions warm;
  warm.warm_start = cold.psi;
  const MleResult re = mle_reconstruct(rec, warm);
  CHECK(re.converged);
  CHECK(re.iterations < cold.iterations);
  CHECK(1.0 - fidelity(re.rho, cold.rho) < 1e-12);
}

TEST_CASE("loss shrinks with sample size") {
  const CMat rho = random_mixed_state({2, 2, 0.75, 113});
  double lo = 0.0, hi = 0.0;
  for (int t = 0; t < 10; ++t) {
    for (double n : {1e3, 1e5}) {
      const InstrumentalMatrix x = normalize_exposure(mub_protocol(2), rho, n);
      const CountRecord rec = sample_counts(x, rho, derive_seed(115, 2 * t + (n > 1e4)));
      const double loss = 1.0 - fidelity(mle_reconstruct(rec).rho, rho);
      (n > 1e4 ? hi : lo) += loss;
    }
  }
  CHECK(hi < lo);
}
