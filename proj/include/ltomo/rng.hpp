#pragma once

#include <cstdint>
#include <random>

#include "ltomo/types.hpp"

namespace ltomo {

// splitmix64: the standard 64-bit finalizer-based mixer. Used to derive
// statistically independent child seeds from (master, stream) pairs so that
// concurrent trials and the per-step count streams never share state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Standard complex Gaussian CN(0,1): Re and Im are iid N(0, 1/2), E|z|^2 = 1.
inline cplx standard_complex_gaussian(std::mt19937_64& rng) {
  static constexpr double kSigma = 0.7071067811865475244;  // 1/sqrt(2)
  std::normal_distribution<double> n(0.0, kSigma);
  return {n(rng), n(rng)};
}

// rows x cols matrix of iid CN(0,1) entries (Ginibre ensemble).
inline CMat ginibre(int rows, int cols, std::mt19937_64& rng) {
  CMat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = standard_complex_gaussian(rng);
  return a;
}

inline CMat ginibre(int s, std::mt19937_64& rng) { return ginibre(s, s, rng); }

// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal phase
// fixed, which makes the distribution exactly invariant.
inline CMat haar_unitary(int s, std::mt19937_64& rng) {
  CMat a = ginibre(s, rng);
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < s; ++j) {
    cplx d = r(j, j);
    double m = std::abs(d);
    q.col(j) *= (m > 0.0) ? d / m : cplx(1.0, 0.0);
  }
  return q;
}

}  // namespace ltomo
