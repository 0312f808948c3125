#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltomo/errors.hpp"
#include "ltomo/protocol.hpp"

using namespace ltomo;

namespace {

// Worst deviation from the mutually-unbiased contract: unit rows,
// orthonormal within a basis, |overlap|^2 = 1/s across bases.
double mub_defect(const InstrumentalMatrix& x) {
  const int s = x.dim;
  double dev = x.row_count() == s * (s + 1) ? 0.0 : 1.0;
  const CMat gram = x.rows * x.rows.adjoint();
  for (int i = 0; i < x.row_count(); ++i) {
    for (int j = 0; j < x.row_count(); ++j) {
      if (i / s == j / s)
        dev = std::max(dev, std::abs(std::abs(gram(i, j)) - (i == j ? 1.0 : 0.0)));
      else
        dev = std::max(dev, std::abs(std::norm(gram(i, j)) - 1.0 / s));
    }
  }
  return dev;
}

}  // namespace

TEST_CASE("complete unbiased bases exist for all supported dimensions") {
  for (int s : {2, 3, 4, 5, 7, 8}) {
    CAPTURE(s);
    CHECK(mub_defect(mub_protocol(s)) < 1e-10);
  }
}

TEST_CASE("unsupported dimensions are refused") {
  CHECK_THROWS_AS(mub_protocol(6), UnsupportedDimension);
  CHECK_THROWS_AS(mub_protocol(9), UnsupportedDimension);
  CHECK_THROWS_AS(mub_protocol(1), UnsupportedDimension);
}

TEST_CASE("qubit bases come out in polarimeter order sigma3, sigma1, sigma2") {
  const InstrumentalMatrix x = mub_protocol(2);
  CMat s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, cplx(0, -1), cplx(0, 1), 0;
  s3 << 1, 0, 0, -1;
  const CMat expect[3] = {s3, s1, s2};
  const CMat eye = CMat::Identity(2, 2);
  for (int b = 0; b < 3; ++b) {
    for (int row = 0; row < 2; ++row) {
      const CVec k = x.ket(2 * b + row);
      const CMat proj = k * k.adjoint();
      const double dplus = (proj - 0.5 * (eye + expect[b])).cwiseAbs().maxCoeff();
      const double dminus = (proj - 0.5 * (eye - expect[b])).cwiseAbs().maxCoeff();
      CHECK(std::min(dplus, dminus) < 1e-12);
    }
  }
}

TEST_CASE("computational basis leads every protocol") {
  for (int s : {3, 4, 8}) {
    const InstrumentalMatrix x = mub_protocol(s);
    CHECK((x.rows.topRows(s) - CMat::Identity(s, s)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("weighted operators resolve the identity") {
  for (int s : {2, 3, 4, 5, 7, 8}) {
    CAPTURE(s);
    CHECK(povm_defect(mub_protocol(s)) < 1e-10);
  }
}

TEST_CASE("basis_block extracts one complete basis") {
  const InstrumentalMatrix x = mub_protocol(3);
  const InstrumentalMatrix b = x.basis_block(2);
  CHECK(b.row_count() == 3);
  CHECK((b.rows - x.rows.middleRows(6, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(x.basis_block(4), DimensionMismatch);
}
