#pragma once

#include <cstdint>
#include <utility>

#include "ltomo/types.hpp"

namespace ltomo {

// Qubit layer. A 2x2 density matrix maps to the four-vector
// (P0, P1, P2, P3) = (Tr rho, Tr rho*sigma_k); the intensity P0 is the time
// component and det-1 spinor transforms act on it as Lorentz transformations
// of the interval P0^2 - |P|^2 = 4 det rho.

struct StokesFourVector {
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;
};

struct BoostParams {
  V3 axis = V3::UnitZ();  // unit boost direction
  double rapidity = 0.0;
};

StokesFourVector stokes_of(const CMat& rho);

// rho = (1/2) [[P0+P3, P1-iP2], [P1+iP2, P0-P3]]. Throws UnphysicalVector
// when |P| exceeds P0 beyond 1e-12 * P0.
CMat density_of_stokes(const StokesFourVector& p);

// L = cosh(theta/2) I - sinh(theta/2) (n . sigma): Hermitian with det L = 1.
CMat boost(const BoostParams& b);

// Boost into the frame where the Stokes spatial part vanishes: velocity
// v = P/P0, rapidity atanh|v|. States with det rho <= 1e-14 (Tr rho)^2 are
// treated as pure and have no rest frame.
BoostParams rest_frame_boost(const CMat& rho);

// Minkowski interval P0^2 - |P|^2 (= 4 det rho).
double interval2(const CMat& rho);

// Poisson counts (N_V, N_H) for projecting U rho U^+ onto |V> = (1,0) and
// |H> = (0,1) for exposure `duration`. Axis selects U: 1 and 2 rotate the
// sigma_1 / sigma_2 eigenbases onto sigma_3; 3 measures directly.
std::pair<long long, long long> polarimeter_counts(const CMat& rho, int axis, double duration,
                                                   std::uint64_t seed);

}  // namespace ltomo
