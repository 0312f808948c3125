#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltomo/errors.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"

using namespace ltomo;

namespace {
double max_abs(const CMat& a) { return a.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("transform of diag(0.9, 0.1) is diag(3^-1/2, 3^1/2) up to phase") {
  CMat rho = CMat::Zero(2, 2);
  rho(0, 0) = 0.9;
  rho(1, 1) = 0.1;
  const CMat l = lorentz_of_state(sqrtm_psd(rho));
  CHECK(std::abs(std::abs(l(0, 0)) - std::pow(3.0, -0.5)) < 1e-12);
  CHECK(std::abs(std::abs(l(1, 1)) - std::pow(3.0, 0.5)) < 1e-12);
  CHECK(std::abs(l(0, 1)) < 1e-14);
  CHECK(std::abs(l(1, 0)) < 1e-14);
  // image is det(rho)^(1/2) I = 0.3 I
  CHECK(max_abs(l * rho * l.adjoint() - 0.3 * CMat::Identity(2, 2)) < 1e-12);
  CHECK(std::abs(l.determinant() - cplx(1.0, 0.0)) < 1e-13);
}

TEST_CASE("transform centers full-rank states in every supported dimension") {
  for (int s : {2, 3, 4, 8}) {
    CAPTURE(s);
    const CMat rho = random_mixed_state({s, s, 0.7, static_cast<std::uint64_t>(100 + s)});
    const CMat l = lorentz_of_state(sqrtm_psd(rho));
    const double dd = std::pow(rho.determinant().real(), 1.0 / s);
    CHECK(max_abs(l * rho * l.adjoint() - dd * CMat::Identity(s, s)) < 1e-10);
    CHECK(std::abs(l.determinant() - cplx(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("singular and non-square purifications are refused") {
  const CVec v = CVec::Unit(3, 0);
  CHECK_THROWS_AS(lorentz_of_state(sqrtm_psd(CMat(v * v.adjoint()))), SingularState);
  CHECK_THROWS_AS(lorentz_of_state(CMat::Zero(3, 2)), DimensionMismatch);
}

TEST_CASE("apply_lorentz transports the weighted operator sum") {
  InstrumentalMatrix x = mub_protocol(3);
  for (int j = 0; j < x.row_count(); ++j) x.weights(j) = 1.0 + 0.1 * j;
  const CMat rho = random_mixed_state({3, 3, 0.8, 53});
  const CMat l = lorentz_of_state(sqrtm_psd(rho));
  const InstrumentalMatrix y = apply_lorentz(x, l);
  CMat sum_in = CMat::Zero(3, 3), sum_out = CMat::Zero(3, 3);
  for (int j = 0; j < x.row_count(); ++j) {
    sum_in += x.weights(j) * (x.ket(j) * x.ket(j).adjoint()).eval();
    sum_out += y.weights(j) * (y.ket(j) * y.ket(j).adjoint()).eval();
  }
  CHECK(max_abs(sum_out - l.adjoint() * sum_in * l) < 1e-12 * max_abs(sum_in));
  for (int j = 0; j < y.row_count(); ++j)
    CHECK(y.rows.row(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected counts are invariant under moving the transform to the state") {
  const InstrumentalMatrix x = mub_protocol(4);
  const CMat rho = random_mixed_state({4, 4, 0.8, 59});
  const CMat l = lorentz_of_state(sqrtm_psd(regularize_spectrum(rho, 0.85)));
  const InstrumentalMatrix y = apply_lorentz(x, l);
  const RVec via_protocol = y.weights.cwiseProduct(rates(y, rho));
  const RVec via_state = x.weights.cwiseProduct(rates(x, l * rho * l.adjoint()));
  CHECK((via_protocol - via_state).cwiseAbs().maxCoeff() < 1e-12 * via_state.maxCoeff());
}

TEST_CASE("normalize_exposure hits the requested total") {
  const CMat rho = random_mixed_state({3, 3, 0.6, 61});
  const InstrumentalMatrix y = normalize_exposure(mub_protocol(3), rho, 12345.0);
  CHECK(y.weights.dot(rates(y, rho)) == doctest::Approx(12345.0).epsilon(1e-12));
  CHECK_THROWS_AS(normalize_exposure(mub_protocol(3), CMat::Zero(3, 3), 10.0), ZeroRate);
  CHECK_THROWS_AS(normalize_exposure(mub_protocol(3), rho, -1.0), InvalidArgs);
}

TEST_CASE("rates clamp roundoff negatives and refuse real ones") {
  const InstrumentalMatrix x = mub_protocol(2);
  CMat tiny = CMat::Zero(2, 2);
  tiny(0, 0) = 1.0;
  tiny(1, 1) = -1e-16;
  CHECK(rates(x, tiny).minCoeff() >= 0.0);
  CMat bad = CMat::Zero(2, 2);
  bad(0, 0) = 1.1;
  bad(1, 1) = -0.1;
  CHECK_THROWS_AS(rates(x, bad), InvalidArgs);
}

TEST_CASE("povm_defect is scale-aware and detects a missing row") {
  InstrumentalMatrix x = mub_protocol(2);
  CHECK(povm_defect(x) < 1e-12);
  x.weights(0) = 2.0;  // overweight one row: no longer resolves the identity
  CHECK(povm_defect(x) > 0.1);
}
