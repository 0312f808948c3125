#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltomo/errors.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"

using namespace ltomo;

namespace {
double max_abs(const CMat& a) { return a.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("eig_descending sorts and reconstructs") {
  const CMat h = random_hermitian(5, 3);
  const EigSorted e = eig_descending(h);
  for (int i = 0; i + 1 < 5; ++i) CHECK(e.values(i) >= e.values(i + 1));
  CHECK(max_abs(e.vectors * e.values.asDiagonal() * e.vectors.adjoint() - h) < 1e-12);
}

TEST_CASE("fidelity oracle for commuting qubit states") {
  CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
  a(0, 0) = 0.7;
  a(1, 1) = 0.3;
  b(0, 0) = 0.3;
  b(1, 1) = 0.7;
  // (sqrt(0.7*0.3) + sqrt(0.3*0.7))^2 = 4 * 0.21
  CHECK(fidelity(a, b) == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fidelity of pure states equals squared overlap") {
  auto rng = make_rng(11);
  CVec u = ginibre(4, 1, rng), v = ginibre(4, 1, rng);
  u.normalize();
  v.normalize();
  const double overlap = std::norm((u.adjoint() * v)(0, 0));
  // Rank-deficient inputs route through an eigensolve whose null-space noise caps accuracy near 1e-8.
  CHECK(fidelity(u * u.adjoint(), v * v.adjoint()) == doctest::Approx(overlap).epsilon(1e-8));
}

TEST_CASE("purify and density round trip across ranks") {
  for (int rank : {1, 2, 4}) {
    const CMat rho = random_mixed_state({4, rank, rank == 1 ? 1.0 : 0.6, 17});
    const CMat psi = purify(rho, rank);
    CHECK(psi.rows() == 4);
    CHECK(psi.cols() == rank);
    CHECK(max_abs(density_of(psi) - rho) < 1e-10);
  }
}

TEST_CASE("purify refuses a factor narrower than the rank") {
  CHECK_THROWS_AS(purify(CMat::Identity(3, 3) / 3.0, 2), RankTooSmall);
}

TEST_CASE("sqrtm_psd squares back") {
  const CMat rho = random_mixed_state({6, 6, 0.5, 19});
  const CMat q = sqrtm_psd(rho);
  CHECK(max_abs(q * q - rho) < 1e-13);
  CHECK(max_abs(q - q.adjoint()) < 1e-13);
}

TEST_CASE("random_mixed_state spectrum is exact") {
  const CMat rho = random_mixed_state({8, 8, 0.9999, 23});
  const EigSorted e = eig_descending(rho);
  CHECK(e.values(0) == doctest::Approx(0.9999).epsilon(1e-13));
  for (int i = 1; i < 8; ++i)
    CHECK(e.values(i) == doctest::Approx(0.0001 / 7.0).epsilon(1e-10));
  CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("random_mixed_state is deterministic in the seed") {
  CHECK(max_abs(random_mixed_state({3, 2, 0.8, 29}) - random_mixed_state({3, 2, 0.8, 29})) ==
        0.0);
  CHECK(max_abs(random_mixed_state({3, 2, 0.8, 29}) - random_mixed_state({3, 2, 0.8, 30})) >
        0.0);
}

TEST_CASE("regularize_spectrum replaces the spectrum and keeps eigenvectors") {
  const CMat rho = random_mixed_state({4, 2, 0.8, 31});
  const CMat reg = regularize_spectrum(rho, 0.9);
  const EigSorted e = eig_descending(reg);
  CHECK(e.values(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(e.values(3) == doctest::Approx(0.1 / 3.0).epsilon(1e-12));
  CHECK(max_abs(reg * rho - rho * reg) < 1e-12);  // commuting => shared eigenbasis
  CHECK_THROWS_AS(regularize_spectrum(rho, 0.25), InvalidWeight);
  CHECK_THROWS_AS(regularize_spectrum(rho, 1.0), InvalidWeight);
}

TEST_CASE("haar_unitary is unitary") {
  auto rng = make_rng(37);
  const CMat u = haar_unitary(5, rng);
  CHECK(max_abs(u.adjoint() * u - CMat::Identity(5, 5)) < 1e-12);
}
