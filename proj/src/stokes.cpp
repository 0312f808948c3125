#include "ltomo/stokes.hpp"

#include <cmath>
#include <random>

#include "ltomo/errors.hpp"
#include "ltomo/rng.hpp"

namespace ltomo {

namespace {

void require_qubit(const CMat& rho, const char* who) {
  if (rho.rows() != 2 || rho.cols() != 2)
    throw DimensionMismatch(std::string(who) + ": 2x2 matrix required");
}

long long poisson_draw(double mean, std::mt19937_64& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long long> d(mean);
  return d(rng);
}

}  // namespace

StokesFourVector stokes_of(const CMat& rho) {
  require_qubit(rho, "stokes_of");
  StokesFourVector p;
  p.p0 = (rho(0, 0) + rho(1, 1)).real();
  p.p1 = (rho(0, 1) + rho(1, 0)).real();
  p.p2 = (kI * (rho(0, 1) - rho(1, 0))).real();  // Tr rho sigma_2
  p.p3 = (rho(0, 0) - rho(1, 1)).real();
  return p;
}

CMat density_of_stokes(const StokesFourVector& p) {
  const double norm = std::sqrt(p.p1 * p.p1 + p.p2 * p.p2 + p.p3 * p.p3);
  if (p.p0 < 0.0 || norm - p.p0 > 1e-12 * std::max(p.p0, 1.0))
    throw UnphysicalVector("density_of_stokes: |P| exceeds P0");
  CMat rho(2, 2);
  rho(0, 0) = 0.5 * (p.p0 + p.p3);
  rho(1, 1) = 0.5 * (p.p0 - p.p3);
  rho(0, 1) = 0.5 * cplx(p.p1, -p.p2);
  rho(1, 0) = 0.5 * cplx(p.p1, p.p2);
  return rho;
}

CMat boost(const BoostParams& b) {
  const double n = b.axis.norm();
  if (std::abs(n - 1.0) > 1e-9) throw InvalidArgs("boost: axis must be a unit vector");
  if (!std::isfinite(b.rapidity)) throw InvalidArgs("boost: rapidity must be finite");
  const V3 a = b.axis / n;
  const double c = std::cosh(0.5 * b.rapidity);
  const double s = std::sinh(0.5 * b.rapidity);
  CMat sig(2, 2);  // n . sigma
  sig(0, 0) = a.z();
  sig(1, 1) = -a.z();
  sig(0, 1) = cplx(a.x(), -a.y());
  sig(1, 0) = cplx(a.x(), a.y());
  return c * CMat::Identity(2, 2) - s * sig;
}

BoostParams rest_frame_boost(const CMat& rho) {
  require_qubit(rho, "rest_frame_boost");
  const double tr = rho.trace().real();
  const double det = rho.determinant().real();
  if (det <= 1e-14 * tr * tr)
    throw PureStateNoRestFrame("rest_frame_boost: state is pure to working precision");
  const StokesFourVector p = stokes_of(rho);
  const V3 vec(p.p1, p.p2, p.p3);
  const double norm = vec.norm();
  BoostParams b;
  if (norm <= 1e-15 * p.p0) return b;  // already at rest; axis arbitrary
  b.axis = vec / norm;
  b.rapidity = std::atanh(norm / p.p0);
  return b;
}

double interval2(const CMat& rho) {
  const StokesFourVector p = stokes_of(rho);
  return p.p0 * p.p0 - p.p1 * p.p1 - p.p2 * p.p2 - p.p3 * p.p3;
}

std::pair<long long, long long> polarimeter_counts(const CMat& rho, int axis, double duration,
                                                   std::uint64_t seed) {
  require_qubit(rho, "polarimeter_counts");
  if (axis < 1 || axis > 3) throw InvalidArgs("polarimeter_counts: axis must be 1, 2 or 3");
  if (!(duration >= 0.0)) throw InvalidArgs("polarimeter_counts: duration must be nonnegative");
  static const double r = 0.7071067811865475244;  // 1/sqrt(2)
  CMat u = CMat::Identity(2, 2);
  if (axis == 1) u << r, r, r, -r;
  if (axis == 2) u << r, -r * kI, r, r * kI;
  CMat rot = u * rho * u.adjoint();
  auto rng = make_rng(seed);
  const long long nv = poisson_draw(duration * std::max(rot(0, 0).real(), 0.0), rng);
  const long long nh = poisson_draw(duration * std::max(rot(1, 1).real(), 0.0), rng);
  return {nv, nh};
}

}  // namespace ltomo
