#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ltomo/errors.hpp"
#include "ltomo/protocol.hpp"

namespace ltomo {
namespace {

bool is_odd_prime(int n) {
  if (n < 3 || n % 2 == 0) return false;
  for (int d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

// Carry-less multiply in GF(2^m), m in {1,2,3}, modulo a fixed irreducible
// polynomial (x+1, x^2+x+1, x^3+x+1).
int gf_mult(int a, int b, int m) {
  static constexpr int kReduce[4] = {0, 0b11, 0b111, 0b1011};
  int r = 0;
  while (b != 0) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1 << m)) a ^= kReduce[m];
  }
  return r;
}

// Field trace tr(x) = x + x^2 + ... + x^(2^(m-1)); always lands in {0,1}.
int gf_trace(int x, int m) {
  int t = 0;
  int y = x;
  for (int i = 0; i < m; ++i) {
    t ^= y;
    y = gf_mult(y, y, m);
  }
  return t;
}

// Joint eigenbasis of the displacement class {X(a) Z(mu a) : a != 0} for
// dim = 2^m. Each class member squares to +-I, so O_a (or i O_a when
// tr(mu a^2) = 1 makes it anti-Hermitian) has eigenvalues +-1 on the shared
// eigenvectors. Summing them with weights 2^j makes the joint spectrum a
// signed binary expansion, hence non-degenerate, and a single Hermitian
// eigendecomposition recovers the basis.
CMat char2_class_basis(int mu, int m) {
  const int d = 1 << m;
  CMat h = CMat::Zero(d, d);
  int j = 0;
  for (int a = 1; a < d; ++a, ++j) {
    const int b = gf_mult(mu, a, m);
    const bool anti = gf_trace(gf_mult(b, a, m), m) != 0;
    const double w = static_cast<double>(1 << j);
    for (int x = 0; x < d; ++x) {
      const double sign = gf_trace(gf_mult(b, x, m), m) != 0 ? -1.0 : 1.0;
      h(x ^ a, x) += w * sign * (anti ? kI : cplx(1.0, 0.0));
    }
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("class eigenbasis failed");
  return es.eigenvectors();
}

InstrumentalMatrix char2_mub(int m) {
  const int d = 1 << m;
  InstrumentalMatrix x;
  x.dim = d;
  x.rows = CMat::Zero(d * (d + 1), d);
  x.weights = RVec::Ones(d * (d + 1));
  x.rows.topRows(d) = CMat::Identity(d, d);  // computational basis
  for (int mu = 0; mu < d; ++mu) {
    const CMat basis = char2_class_basis(mu, m);
    // Stored rows are bras: conjugate transpose of the eigencolumns.
    x.rows.middleRows((mu + 1) * d, d) = basis.adjoint();
  }
  return x;
}

InstrumentalMatrix odd_prime_mub(int p) {
  InstrumentalMatrix x;
  x.dim = p;
  x.rows = CMat::Zero(p * (p + 1), p);
  x.weights = RVec::Ones(p * (p + 1));
  x.rows.topRows(p) = CMat::Identity(p, p);
  const double norm = 1.0 / std::sqrt(static_cast<double>(p));
  for (int b = 0; b < p; ++b) {
    for (int j = 0; j < p; ++j) {
      const int row = (b + 1) * p + j;
      for (int k = 0; k < p; ++k) {
        // ket component omega^(b k^2 + j k)/sqrt(p); bra stores the conjugate.
        const int e = (b * k % p * k + j * k) % p;
        const double phase = 2.0 * std::numbers::pi * e / p;
        x.rows(row, k) = norm * std::exp(-kI * phase);
      }
    }
  }
  return x;
}

}  // namespace

InstrumentalMatrix mub_protocol(int dim) {
  if (dim == 2) return char2_mub(1);
  if (dim == 4) return char2_mub(2);
  if (dim == 8) return char2_mub(3);
  if (is_odd_prime(dim)) return odd_prime_mub(dim);
  throw UnsupportedDimension("no MUB construction for dim " + std::to_string(dim));
}

}  // namespace ltomo
