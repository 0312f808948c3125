#include "ltomo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"
#include "ltomo/stokes.hpp"
#include "ltomo/tracker.hpp"
#include "ltomo/types.hpp"

namespace ltomo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Suite {
  std::vector<CheckResult> results;

  template <typename Fn>
  void run(const std::string& name, Fn&& fn) {
    CheckResult r;
    r.name = name;
    try {
      fn(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("unexpected exception: ") + e.what();
    }
    results.push_back(std::move(r));
  }
};

template <typename Ex, typename Fn>
bool throws(Fn&& fn) {
  try {
    fn();
  } catch (const Ex&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

double max_abs(const CMat& a) { return a.cwiseAbs().maxCoeff(); }

// Exact expected-count record: k_j = t_j * Tr(Lambda_j rho), no shot noise.
CountRecord exact_counts(const InstrumentalMatrix& x, const CMat& rho) {
  CountRecord rec;
  rec.protocol = x;
  rec.counts = x.weights.cwiseProduct(rates(x, rho));
  rec.sample_size_target = rec.counts.sum();
  return rec;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<CheckResult> run_verification(bool corrupt_mub) {
  Suite suite;

  suite.run("eig_descending_order", [](CheckResult& r) {
    const CMat h = random_hermitian(6, 101);
    const EigSorted e = eig_descending(h);
    double dev = max_abs(e.vectors * e.values.asDiagonal() * e.vectors.adjoint() - h);
    dev = std::max(dev, max_abs(e.vectors.adjoint() * e.vectors - CMat::Identity(6, 6)));
    bool sorted = true;
    for (int i = 0; i + 1 < e.values.size(); ++i)
      if (e.values(i) < e.values(i + 1)) sorted = false;
    r.pass = sorted && dev <= 1e-10;
    r.detail = "reconstruction deviation " + sci(dev) +
               (sorted ? ", order descending" : ", ORDER VIOLATED");
  });

  suite.run("purify_density_round_trip", [](CheckResult& r) {
    double worst = 0.0;
    std::uint64_t seed = 7;
    for (int s : {2, 3, 4, 8}) {
      for (int rank : {1, std::max(1, s / 2), s}) {
        const double w = rank == 1 ? 1.0 : 0.7;
        const CMat rho = random_mixed_state({s, rank, w, seed++});
        const CMat psi = purify(rho, rank);
        worst = std::max(worst, max_abs(density_of(psi) - rho));
        // requesting more columns than the rank must also reproduce rho
        const CMat wide = purify(rho, s);
        worst = std::max(worst, max_abs(density_of(wide) - rho));
      }
    }
    r.pass = worst <= 1e-10;
    r.detail = "max |Psi Psi^+ - rho| = " + sci(worst);
  });

  suite.run("purify_rank_guard", [](CheckResult& r) {
    const CMat rho = CMat::Identity(3, 3) / 3.0;
    r.pass = throws<RankTooSmall>([&] { purify(rho, 2); });
    r.detail = r.pass ? "rank-3 state refused a 2-column factor"
                      : "missing RankTooSmall";
  });

  suite.run("sqrtm_square_root", [](CheckResult& r) {
    const CMat rho = random_mixed_state({5, 5, 0.6, 13});
    const CMat q = sqrtm_psd(rho);
    double dev = max_abs(q * q - rho);
    dev = std::max(dev, max_abs(q - q.adjoint()));
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    CMat expect = CMat::Zero(2, 2);
    expect(0, 0) = 2.0;
    expect(1, 1) = 3.0;
    dev = std::max(dev, max_abs(sqrtm_psd(d) - expect));
    r.pass = dev <= 1e-12;
    r.detail = "max deviation " + sci(dev);
  });

  suite.run("fidelity_oracles", [](CheckResult& r) {
    CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
    a(0, 0) = 0.7;
    a(1, 1) = 0.3;
    b(0, 0) = 0.3;
    b(1, 1) = 0.7;
    double dev = std::abs(fidelity(a, b) - 0.84);  // (sqrt(.21)+sqrt(.21))^2
    const CMat rho = random_mixed_state({4, 4, 0.5, 17});
    dev = std::max(dev, std::abs(fidelity(rho, rho) - 1.0));
    // Rank-deficient inputs go through an eigensolve whose null-space noise
    // caps the attainable accuracy near 1e-8.
    const CMat sig = random_mixed_state({4, 3, 0.6, 18});
    double low_rank_dev = std::abs(fidelity(rho, sig) - fidelity(sig, rho));
    auto rng = make_rng(19);
    CVec u = ginibre(5, 1, rng);
    CVec v = ginibre(5, 1, rng);
    u.normalize();
    v.normalize();
    const double overlap = std::norm((u.adjoint() * v)(0, 0));
    low_rank_dev = std::max(
        low_rank_dev, std::abs(fidelity(u * u.adjoint(), v * v.adjoint()) - overlap));
    r.pass = dev <= 1e-12 && low_rank_dev <= 1e-8;
    r.detail = "max deviation " + sci(std::max(dev, low_rank_dev));
  });

  suite.run("random_state_spectrum", [](CheckResult& r) {
    const CMat rho = random_mixed_state({8, 8, 0.9999, 23});
    const EigSorted e = eig_descending(rho);
    double dev = std::abs(e.values(0) - 0.9999);
    for (int i = 1; i < 8; ++i) dev = std::max(dev, std::abs(e.values(i) - 0.0001 / 7.0));
    dev = std::max(dev, std::abs(rho.trace().real() - 1.0));
    dev = std::max(dev, max_abs(rho - rho.adjoint()));
    r.pass = dev <= 1e-12;
    r.detail = "spectrum/trace deviation " + sci(dev);
  });

  suite.run("regularize_spectrum_contract", [](CheckResult& r) {
    const CMat rho = random_mixed_state({4, 2, 0.8, 29});
    const CMat reg = regularize_spectrum(rho, 0.9);
    const EigSorted e = eig_descending(reg);
    double dev = std::abs(e.values(0) - 0.9);
    for (int i = 1; i < 4; ++i) dev = std::max(dev, std::abs(e.values(i) - 0.1 / 3.0));
    dev = std::max(dev, max_abs(reg * rho - rho * reg));  // shared eigenvectors
    const bool guards = throws<InvalidWeight>([&] { regularize_spectrum(rho, 0.25); }) &&
                        throws<InvalidWeight>([&] { regularize_spectrum(rho, 1.0); });
    r.pass = dev <= 1e-10 && guards;
    r.detail = "spectrum deviation " + sci(dev) +
               (guards ? ", weight guards fire" : ", WEIGHT GUARD MISSING");
  });

  suite.run("stokes_round_trip", [](CheckResult& r) {
    CMat rho(2, 2);
    rho(0, 0) = 0.6;
    rho(0, 1) = cplx(0.1, 0.2);
    rho(1, 0) = cplx(0.1, -0.2);
    rho(1, 1) = 0.4;
    const StokesFourVector p = stokes_of(rho);
    double dev = std::abs(p.p0 - 1.0);
    dev = std::max(dev, std::abs(p.p1 - 0.2));
    dev = std::max(dev, std::abs(p.p2 + 0.4));
    dev = std::max(dev, std::abs(p.p3 - 0.2));
    dev = std::max(dev, max_abs(density_of_stokes(p) - rho));
    const bool guard =
        throws<UnphysicalVector>([] { density_of_stokes({1.0, 1.5, 0.0, 0.0}); });
    r.pass = dev <= 1e-12 && guard;
    r.detail = "round-trip deviation " + sci(dev) +
               (guard ? ", unphysical vector refused" : ", GUARD MISSING");
  });

  suite.run("interval_invariance_1000", [](CheckResult& r) {
    auto rng = make_rng(31);
    std::uniform_real_distribution<double> uw(0.55, 0.95), uth(-2.0, 2.0), uc(0.5, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const CMat rho = uc(rng) * random_mixed_state({2, 2, uw(rng), static_cast<std::uint64_t>(1000 + i)});
      V3 axis;
      std::normal_distribution<double> gauss(0.0, 1.0);
      do {
        axis = V3(gauss(rng), gauss(rng), gauss(rng));
      } while (axis.norm() < 1e-6);
      axis.normalize();
      CMat su2 = haar_unitary(2, rng);
      su2 /= std::sqrt(su2.determinant());
      const CMat l = boost({axis, uth(rng)}) * su2;
      worst = std::max(worst,
                       std::abs(interval2(l * rho * l.adjoint()) - interval2(rho)));
    }
    r.pass = worst <= 1e-10;
    r.detail = "1000 det-1 maps, max |interval^2 change| = " + sci(worst);
  });

  suite.run("boost_composition", [](CheckResult& r) {
    const V3 n = V3(1.0, 2.0, -0.5).normalized();
    const CMat dev =
        boost({n, 0.7}) * boost({n, 0.4}) - boost({n, 1.1});
    const double d = max_abs(dev);
    r.pass = d <= 1e-12;
    r.detail = "same-axis rapidity additivity deviation " + sci(d);
  });

  suite.run("rest_frame_centers", [](CheckResult& r) {
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 0.9;
    d(1, 1) = 0.1;
    const BoostParams bp = rest_frame_boost(d);
    double dev = std::abs(bp.rapidity - std::log(3.0));  // atanh(0.8)
    double spatial = 0.0;
    for (int i = 0; i < 24; ++i) {
      const CMat rho = random_mixed_state({2, 2, 0.6 + 0.015 * i, static_cast<std::uint64_t>(400 + i)});
      const CMat l = boost(rest_frame_boost(rho));
      const StokesFourVector p = stokes_of(l * rho * l.adjoint());
      spatial = std::max(spatial, V3(p.p1, p.p2, p.p3).norm() / p.p0);
    }
    const CVec v = CVec::Unit(2, 0);
    const bool guard =
        throws<PureStateNoRestFrame>([&] { rest_frame_boost(CMat(v * v.adjoint())); });
    r.pass = dev <= 1e-12 && spatial <= 1e-10 && guard;
    r.detail = "rapidity oracle deviation " + sci(dev) + ", residual polarization " +
               sci(spatial) + (guard ? ", pure state refused" : ", GUARD MISSING");
  });

  suite.run("polarimeter_estimates", [](CheckResult& r) {
    const CMat rho = density_of_stokes({1.0, 0.3, -0.2, 0.4});
    const double duration = 1e7;
    const double truth[4] = {1.0, 0.3, -0.2, 0.4};
    double worst_sigma = 0.0;
    for (int axis = 1; axis <= 3; ++axis) {
      const auto [nv, nh] = polarimeter_counts(rho, axis, duration, 700 + axis);
      const double diff = static_cast<double>(nv - nh) - duration * truth[axis];
      const double tot = static_cast<double>(nv + nh) - duration * truth[0];
      worst_sigma = std::max(worst_sigma,
                             std::abs(diff) / std::sqrt(static_cast<double>(nv + nh) + 1.0));
      worst_sigma = std::max(worst_sigma, std::abs(tot) / std::sqrt(duration));
    }
    const auto [zv, zh] = polarimeter_counts(rho, 3, 0.0, 7);
    const bool zero = (zv == 0 && zh == 0);
    r.pass = worst_sigma <= 5.0 && zero;
    r.detail = "worst deviation " + sci(worst_sigma) + " sigma" +
               (zero ? ", zero exposure gives zero counts" : ", ZERO EXPOSURE BROKEN");
  });

  suite.run("mub_overlaps", [corrupt_mub](CheckResult& r) {
    double worst = 0.0;
    int worst_dim = 0;
    std::string note;
    for (int s : {2, 3, 4, 5, 7, 8}) {
      InstrumentalMatrix x = mub_protocol(s);
      if (corrupt_mub && s == 3) {
        x.rows(4, 1) += 0.02;  // deliberate defect to demonstrate reporting
        note = " [deliberate corruption injected at dim 3]";
      }
      double dev = x.row_count() == s * (s + 1) ? 0.0 : 1.0;
      const CMat gram = x.rows * x.rows.adjoint();
      for (int i = 0; i < x.row_count(); ++i) {
        for (int j = 0; j < x.row_count(); ++j) {
          const bool same_basis = (i / s) == (j / s);
          const double target = same_basis ? (i == j ? 1.0 : 0.0) : 1.0 / s;
          const double got = same_basis ? std::abs(gram(i, j)) : std::norm(gram(i, j));
          dev = std::max(dev, std::abs(got - target));
        }
      }
      if (dev > worst) {
        worst = dev;
        worst_dim = s;
      }
    }
    r.pass = worst <= 1e-10;
    r.detail = "max overlap deviation " + sci(worst) + " (dim " +
               std::to_string(worst_dim) + ")" + note;
  });

  suite.run("mub_unsupported_dim", [](CheckResult& r) {
    r.pass = throws<UnsupportedDimension>([] { mub_protocol(6); }) &&
             throws<UnsupportedDimension>([] { mub_protocol(9); }) &&
             throws<UnsupportedDimension>([] { mub_protocol(1); });
    r.detail = r.pass ? "dims 1, 6, 9 refused" : "missing UnsupportedDimension";
  });

  suite.run("mub_qubit_pauli_order", [](CheckResult& r) {
    const InstrumentalMatrix x = mub_protocol(2);
    CMat s1(2, 2), s2(2, 2), s3(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, cplx(0, -1), cplx(0, 1), 0;
    s3 << 1, 0, 0, -1;
    const CMat paulis[3] = {s3, s1, s2};  // polarimeter axis order
    double worst = 0.0;
    const CMat eye = CMat::Identity(2, 2);
    for (int b = 0; b < 3; ++b) {
      for (int row = 0; row < 2; ++row) {
        const CVec k = x.ket(2 * b + row);
        const CMat proj = k * k.adjoint();
        const double dplus = max_abs(proj - 0.5 * (eye + paulis[b]));
        const double dminus = max_abs(proj - 0.5 * (eye - paulis[b]));
        worst = std::max(worst, std::min(dplus, dminus));
      }
    }
    r.pass = worst <= 1e-12;
    r.detail = "basis order (sigma3, sigma1, sigma2), projector deviation " + sci(worst);
  });

  suite.run("povm_resolution", [](CheckResult& r) {
    double worst = 0.0;
    int worst_dim = 0;
    for (int s : {2, 3, 4, 5, 7, 8}) {
      const double d = povm_defect(mub_protocol(s));
      if (d > worst) {
        worst = d;
        worst_dim = s;
      }
    }
    r.pass = worst <= 1e-10;
    r.detail = "max defect " + sci(worst) + " (dim " + std::to_string(worst_dim) + ")";
  });

  suite.run("lorentz_centers_state", [](CheckResult& r) {
    auto rng = make_rng(37);
    double worst_center = 0.0, worst_det = 0.0;
    int count = 0;
    for (int s : {2, 3, 4, 8}) {
      std::uniform_real_distribution<double> uw(1.0 / s + 0.02, 0.95);
      for (int i = 0; i < 63; ++i, ++count) {
        const CMat rho = random_mixed_state({s, s, uw(rng), static_cast<std::uint64_t>(5000 + count)});
        const CMat l = lorentz_of_state(sqrtm_psd(rho));
        worst_det = std::max(worst_det, std::abs(l.determinant() - cplx(1.0, 0.0)));
        const double dd = std::pow(rho.determinant().real(), 1.0 / s);
        worst_center =
            std::max(worst_center, max_abs(l * rho * l.adjoint() - dd * CMat::Identity(s, s)));
      }
    }
    r.pass = worst_center <= 1e-10 && worst_det <= 1e-12;
    r.detail = std::to_string(count) + " states, max |L rho L^+ - det^(1/s) I| = " +
               sci(worst_center) + ", max |det L - 1| = " + sci(worst_det);
  });

  suite.run("lorentz_gauge_invariance", [](CheckResult& r) {
    auto rng = make_rng(41);
    const CMat rho = random_mixed_state({4, 4, 0.7, 43});
    const CMat psi = sqrtm_psd(rho);
    const CMat la = lorentz_of_state(psi);
    const CMat lb = lorentz_of_state(psi * haar_unitary(4, rng));
    const CMat ga = la.adjoint() * la;
    const double dev = max_abs(ga - lb.adjoint() * lb) / max_abs(ga);
    r.pass = dev <= 1e-10;
    r.detail = "L^+L gauge sensitivity " + sci(dev);
  });

  suite.run("lorentz_singular_guard", [](CheckResult& r) {
    const CVec v = CVec::Unit(3, 1);
    const CMat pure = v * v.adjoint();
    const bool singular = throws<SingularState>([&] { lorentz_of_state(sqrtm_psd(pure)); });
    const CMat tall = purify(random_mixed_state({3, 2, 0.7, 47}), 2);
    const bool shape = throws<DimensionMismatch>([&] { lorentz_of_state(tall); });
    r.pass = singular && shape;
    r.detail = std::string(singular ? "singular state refused" : "SINGULAR GUARD MISSING") +
               (shape ? ", non-square factor refused" : ", SHAPE GUARD MISSING");
  });

  suite.run("apply_lorentz_consistency", [](CheckResult& r) {
    InstrumentalMatrix x = mub_protocol(4);
    for (int j = 0; j < x.row_count(); ++j) x.weights(j) = 1.0 + 0.05 * j;
    const CMat rho = random_mixed_state({4, 4, 0.8, 53});
    const CMat l = lorentz_of_state(sqrtm_psd(regularize_spectrum(rho, 0.8)));
    const InstrumentalMatrix y = apply_lorentz(x, l);
    CMat sum_in = CMat::Zero(4, 4), sum_out = CMat::Zero(4, 4);
    for (int j = 0; j < x.row_count(); ++j) {
      sum_in += x.weights(j) * (x.ket(j) * x.ket(j).adjoint()).eval();
      sum_out += y.weights(j) * (y.ket(j) * y.ket(j).adjoint()).eval();
    }
    double dev = max_abs(sum_out - l.adjoint() * sum_in * l) / max_abs(sum_in);
    for (int j = 0; j < y.row_count(); ++j)
      dev = std::max(dev, std::abs(y.rows.row(j).norm() - 1.0));
    const RVec ny = y.weights.cwiseProduct(rates(y, rho));
    const RVec nx = x.weights.cwiseProduct(rates(x, l * rho * l.adjoint()));
    dev = std::max(dev, (ny - nx).cwiseAbs().maxCoeff() / nx.maxCoeff());
    r.pass = dev <= 1e-12;
    r.detail = "operator-sum / expected-count transport deviation " + sci(dev);
  });

  suite.run("normalize_exposure_total", [](CheckResult& r) {
    const CMat rho = random_mixed_state({3, 3, 0.6, 59});
    const InstrumentalMatrix y = normalize_exposure(mub_protocol(3), rho, 1e4);
    const double got = y.weights.dot(rates(y, rho));
    const double dev = std::abs(got - 1e4) / 1e4;
    const bool zero_rate =
        throws<ZeroRate>([&] { normalize_exposure(mub_protocol(3), CMat::Zero(3, 3), 10.0); });
    const bool neg =
        throws<InvalidArgs>([&] { normalize_exposure(mub_protocol(3), rho, -1.0); });
    r.pass = dev <= 1e-12 && zero_rate && neg;
    r.detail = "relative total deviation " + sci(dev) +
               (zero_rate && neg ? ", guards fire" : ", GUARDS MISSING");
  });

  suite.run("rates_clamp", [](CheckResult& r) {
    const InstrumentalMatrix x = mub_protocol(2);
    CMat tiny = CMat::Zero(2, 2);
    tiny(0, 0) = 1.0 + 1e-15;
    tiny(1, 1) = -1e-15;
    const RVec v = rates(x, tiny);
    const bool nonneg = v.minCoeff() >= 0.0;
    CMat bad = CMat::Zero(2, 2);
    bad(0, 0) = 1.1;
    bad(1, 1) = -0.1;
    const bool guard = throws<InvalidArgs>([&] { rates(x, bad); });
    r.pass = nonneg && guard;
    r.detail = std::string(nonneg ? "roundoff clamped at zero" : "NEGATIVE RATE LEAKED") +
               (guard ? ", genuinely negative rate refused" : ", GUARD MISSING");
  });

  suite.run("sample_counts_determinism", [](CheckResult& r) {
    const CMat rho = random_mixed_state({2, 2, 0.8, 61});
    const InstrumentalMatrix x = normalize_exposure(mub_protocol(2), rho, 1e4);
    const CountRecord a = sample_counts(x, rho, 42);
    const CountRecord b = sample_counts(x, rho, 42);
    const CountRecord c = sample_counts(x, rho, 43);
    const bool same = (a.counts - b.counts).cwiseAbs().maxCoeff() == 0.0;
    const bool differs = (a.counts - c.counts).cwiseAbs().maxCoeff() > 0.0;
    const CVec e0 = CVec::Unit(2, 0);
    const CountRecord z = sample_counts(x, CMat(e0 * e0.adjoint()), 44);
    const bool zero_row = z.counts(1) == 0.0;  // <1| row sees a zero rate
    r.pass = same && differs && zero_row;
    r.detail = std::string(same ? "seed-stable" : "SEED UNSTABLE") +
               (differs ? ", seed-sensitive" : ", SEED IGNORED") +
               (zero_row ? ", zero rate gives zero counts" : ", ZERO RATE BROKEN");
  });

  suite.run("sample_counts_poisson_sum", [](CheckResult& r) {
    const CMat rho = CMat::Identity(8, 8) / 8.0;
    const InstrumentalMatrix x = normalize_exposure(mub_protocol(8), rho, 1e4);
    const double total = sample_counts(x, rho, 67).counts.sum();
    const double dev = std::abs(total - 1e4);
    r.pass = dev <= 500.0;  // 5 sigma for a Poisson(1e4) total
    r.detail = "total " + sci(total) + " for target 1e4 (|dev| = " + sci(dev) + ")";
  });

  suite.run("sample_counts_mean_linearity", [](CheckResult& r) {
    const CMat rho = random_mixed_state({4, 4, 0.7, 71});
    const InstrumentalMatrix x1 = normalize_exposure(mub_protocol(4), rho, 1e6);
    const InstrumentalMatrix x2 = normalize_exposure(mub_protocol(4), rho, 2e6);
    const double ratio =
        sample_counts(x2, rho, 73).counts.sum() / sample_counts(x1, rho, 74).counts.sum();
    r.pass = ratio >= 1.97 && ratio <= 2.03;
    r.detail = "doubling the exposure scaled the total by " + sci(ratio);
  });

  suite.run("mle_gradient_fd", [](CheckResult& r) {
    const CMat rho = random_mixed_state({3, 3, 0.6, 79});
    const InstrumentalMatrix x = normalize_exposure(mub_protocol(3), rho, 1e3);
    const CountRecord rec = sample_counts(x, rho, 83);
    // Evaluation point away from the optimum with rates bounded below.
    const CMat mix = 0.7 * rho + 0.3 * CMat::Identity(3, 3) / 3.0;
    CMat psi = sqrtm_psd(mix);
    psi *= std::sqrt(rec.counts.sum() / x.weights.dot(rates(x, mix)));
    auto rng = make_rng(89);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      CMat dir = ginibre(3, 3, rng);
      dir /= dir.norm();
      const double h = 1e-6 * psi.norm();
      const double fd = (poisson_loglik(rec, psi + h * dir) -
                         poisson_loglik(rec, psi - h * dir)) /
                        (2.0 * h);
      const double an =
          2.0 * (loglik_gradient(rec, psi).conjugate().cwiseProduct(dir)).sum().real();
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-12}));
    }
    r.pass = worst <= 1e-5;
    r.detail = "10 directions, worst relative mismatch " + sci(worst);
  });

  suite.run("mle_noiseless_recovery", [](CheckResult& r) {
    CVec v(2);
    v << cplx(1.0, 0.0) / std::sqrt(3.0), cplx(1.0, 1.0) / std::sqrt(3.0);
    const CMat pure = v * v.adjoint();
    const InstrumentalMatrix x2 = normalize_exposure(mub_protocol(2), pure, 1e4);
    MleOptions pure_opts;
    pure_opts.rank = 1;
    const MleResult a = mle_reconstruct(exact_counts(x2, pure), pure_opts);
    double worst = 1.0 - fidelity(a.rho, pure);
    const CMat rho = random_mixed_state({4, 4, 0.6, 97});
    const InstrumentalMatrix x4 = normalize_exposure(mub_protocol(4), rho, 1e4);
    const MleResult b = mle_reconstruct(exact_counts(x4, rho));
    worst = std::max(worst, 1.0 - fidelity(b.rho, rho));
    r.pass = worst <= 1e-9 && a.converged && b.converged;
    r.detail = "max loss on exact data " + sci(worst) +
               (a.converged && b.converged ? "" : " (NOT CONVERGED)");
  });

  suite.run("mle_stationarity_residual", [](CheckResult& r) {
    double worst_res = 0.0, worst_int = 0.0;
    bool all_conv = true, cond_finite = true;
    std::uint64_t seed = 103;
    for (int s : {2, 4}) {
      const CMat rho = random_mixed_state({s, s, 0.7, seed++});
      const InstrumentalMatrix x = normalize_exposure(mub_protocol(s), rho, 1e4);
      const CountRecord rec = sample_counts(x, rho, seed++);
      const MleResult res = mle_reconstruct(rec);
      all_conv = all_conv && res.converged;
      cond_finite = cond_finite && std::isfinite(res.condition) && res.condition >= 1.0;
      const CMat jmat = x.rows.adjoint() * x.weights.asDiagonal() * x.rows;
      const double g =
          loglik_gradient(rec, res.psi).norm() / (jmat.norm() * res.psi.norm());
      worst_res = std::max(worst_res, g);
      // At stationarity the predicted event total matches the observed one.
      const double predicted = x.weights.dot(rates(x, density_of(res.psi)));
      worst_int = std::max(worst_int,
                           std::abs(predicted - rec.counts.sum()) / rec.counts.sum());
    }
    r.pass = all_conv && cond_finite && worst_res <= 1.01e-8 && worst_int <= 1e-6;
    r.detail = "relative gradient norm " + sci(worst_res) + ", intensity mismatch " +
               sci(worst_int) + (cond_finite ? ", condition finite" : ", CONDITION NOT FINITE");
  });

  suite.run("mle_one_basis_flagged", [](CheckResult& r) {
    CMat rho = CMat::Zero(2, 2);
    rho(0, 0) = 0.65;
    rho(1, 1) = 0.35;
    const InstrumentalMatrix x =
        normalize_exposure(mub_protocol(2).basis_block(0), rho, 1e3);
    const MleResult res = mle_reconstruct(sample_counts(x, rho, 107));
    r.pass = res.converged && std::isinf(res.condition);
    r.detail = std::string("single-basis data: ") +
               (res.converged ? "stationary" : "NOT CONVERGED") + ", condition " +
               (std::isinf(res.condition) ? "inf (unidentifiable, flagged)" : sci(res.condition));
  });

  suite.run("mle_consistency_in_n", [](CheckResult& r) {
    const CMat rho = random_mixed_state({2, 2, 0.75, 109});
    std::vector<double> lo, hi;
    for (int t = 0; t < 20; ++t) {
      for (double n : {1e3, 1e5}) {
        const InstrumentalMatrix x = normalize_exposure(mub_protocol(2), rho, n);
        const CountRecord rec = sample_counts(x, rho, derive_seed(113, 2 * t + (n > 1e4)));
        const double loss = 1.0 - fidelity(mle_reconstruct(rec).rho, rho);
        (n > 1e4 ? hi : lo).push_back(loss);
      }
    }
    const double mlo = median_of(lo), mhi = median_of(hi);
    r.pass = mhi < mlo;
    r.detail = "median loss " + sci(mlo) + " at n=1e3 vs " + sci(mhi) + " at n=1e5";
  });

  suite.run("min_loss_values", [](CheckResult& r) {
    double dev = std::abs(min_loss(8, 8, 1e4) - 1.4175e-2) / 1.4175e-2;
    dev = std::max(dev, std::abs(min_loss(2, 1, 100.0) - 0.01) / 0.01);
    const bool nu_ok = dof(8, 8) == 63 && dof(2, 1) == 2 && dof(8, 1) == 14;
    r.pass = dev <= 1e-12 && nu_ok;
    r.detail = "floor oracle deviation " + sci(dev) +
               (nu_ok ? ", dof oracles exact" : ", DOF WRONG");
  });

  suite.run("efficiency_examples", [](CheckResult& r) {
    const double bound = min_loss(8, 8, 1e4);
    double dev = std::abs(efficiency(bound, 8, 8, 1e4) - 1.0);
    dev = std::max(dev, std::abs(efficiency(2.0 * bound, 8, 8, 1e4) - 0.5));
    const double headline = efficiency(2.15997e-6, 8, 8, 1e4);
    const bool headline_ok = std::abs(headline - 6562.59) <= 0.01;
    const bool guard = throws<DivisionByZero>([] { efficiency(0.0, 8, 8, 1e4); });
    r.pass = dev <= 1e-12 && headline_ok && guard;
    r.detail = "unit/half oracles deviation " + sci(dev) + ", headline ratio " +
               sci(headline) + (guard ? ", zero loss refused" : ", GUARD MISSING");
  });

  suite.run("hamiltonian_modulation", [](CheckResult& r) {
    const CMat h0 = random_hermitian(3, 127);
    const double scale = max_abs(h0);
    double dev = max_abs(hamiltonian_at(h0, 0.5, 1000, 0) - h0) / scale;
    dev = std::max(dev, max_abs(hamiltonian_at(h0, 0.5, 1000, 250) - 1.5 * h0) / scale);
    dev = std::max(dev, max_abs(hamiltonian_at(h0, 0.5, 1000, 1000) - h0) / scale);
    dev = std::max(dev, max_abs(hamiltonian_at(h0, 0.0, 1000, 123) - h0) / scale);
    r.pass = dev <= 1e-12;
    r.detail = "modulation oracle deviation " + sci(dev);
  });

  suite.run("evolve_unitary", [](CheckResult& r) {
    CMat s3(2, 2);
    s3 << 1, 0, 0, -1;
    CMat rho(2, 2);
    rho << 0.7, 0.2, 0.2, 0.3;
    const CMat ev = evolve(rho, s3, std::acos(-1.0) / 2.0);
    double dev = std::abs(ev(0, 1) - cplx(-0.2, 0.0));  // off-diagonal phase e^{-2 i eps}
    const CMat h = random_hermitian(5, 131);
    const CMat u = unitary_of(h, 0.37);
    dev = std::max(dev, max_abs(u.adjoint() * u - CMat::Identity(5, 5)));
    const CMat big = random_mixed_state({5, 5, 0.5, 137});
    const RVec before = eig_descending(big).values;
    const RVec after = eig_descending(evolve(big, h, 0.37)).values;
    dev = std::max(dev, (before - after).cwiseAbs().maxCoeff());
    r.pass = dev <= 1e-12;
    r.detail = "phase/unitarity/spectrum deviation " + sci(dev);
  });

  suite.run("adapt_uniform_rates", [](CheckResult& r) {
    const CMat rho = random_mixed_state({4, 4, 0.9, 139});
    const InstrumentalMatrix y = adapt_protocol(rho, mub_protocol(4), 0.9, 1e4);
    const RVec expected = y.weights.cwiseProduct(rates(y, rho));
    const double ratio = expected.maxCoeff() / expected.minCoeff();
    const double total_dev = std::abs(expected.sum() - 1e4) / 1e4;
    r.pass = ratio <= 1.0 + 1e-9 && total_dev <= 1e-9;
    r.detail = "matched-spectrum fixed point: count ratio " + sci(ratio) +
               ", total deviation " + sci(total_dev);
  });

  suite.run("detection_fraction_completeness", [](CheckResult& r) {
    auto rng = make_rng(149);
    CVec v = ginibre(8, 1, rng);
    v.normalize();
    const InstrumentalMatrix x = mub_protocol(8);
    const RVec fr = detection_fractions(x, v);
    double dev = 0.0;
    for (int b = 0; b < 9; ++b) dev = std::max(dev, std::abs(fr.segment(8 * b, 8).sum() - 1.0));
    const RVec fr2 = detection_fractions(x, CMat(v * v.adjoint()));
    dev = std::max(dev, (fr - fr2).cwiseAbs().maxCoeff());
    r.pass = dev <= 1e-12;
    r.detail = "per-basis totals = 1 within " + sci(dev);
  });

  suite.run("adapt_small_fractions", [](CheckResult& r) {
    const CMat rho = random_mixed_state({8, 8, 0.9999, 151});
    const InstrumentalMatrix y = adapt_protocol(rho, mub_protocol(8), 0.9999, 1e4);
    const CVec v = eig_descending(rho).vectors.col(0);
    const RVec fr = detection_fractions(y, v);
    const double mx = fr.maxCoeff(), sum = fr.sum();
    r.pass = mx <= 1e-3 && sum >= 1e-6 && sum <= 5e-3;
    r.detail = "dominant-state fractions: max " + sci(mx) + ", sum " + sci(sum) +
               " over " + std::to_string(fr.size()) + " rows";
  });

  suite.run("backaction_oracles", [](CheckResult& r) {
    const CMat eye = CMat::Identity(2, 2);
    InstrumentalMatrix one;
    one.dim = 2;
    one.rows = CMat::Zero(1, 2);
    one.rows(0, 0) = 1.0;
    one.weights = RVec::Ones(1);
    CVec plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    // M0 |+> = (1/(2 sqrt 2), 1/sqrt 2): survival 5/8, state (1, 2)/sqrt 5.
    const BackactionResult a = backaction_step(plus, eye, one);
    double dev = std::abs(a.survival - 0.625);
    dev = std::max(dev, std::abs(std::abs(a.state(1)) - 2.0 / std::sqrt(5.0)));
    InstrumentalMatrix orth = one;
    orth.rows(0, 0) = 0.0;
    orth.rows(0, 1) = 1.0;
    const BackactionResult b = backaction_step(CVec::Unit(2, 0), eye, orth);
    dev = std::max(dev, std::abs(b.survival - 1.0));
    dev = std::max(dev, (b.state - CVec::Unit(2, 0)).norm());
    // A complete orthonormal basis sums to the identity: M0 = I/2 keeps the
    // direction and a quarter of the pool.
    const BackactionResult c = backaction_step(plus, eye, mub_protocol(2).basis_block(0));
    dev = std::max(dev, std::abs(c.survival - 0.25));
    dev = std::max(dev, std::abs(std::abs(plus.dot(c.state)) - 1.0));
    // Duplicated rows put the state in an eigenvalue-2 mode, which M0 kills.
    InstrumentalMatrix twice;
    twice.dim = 2;
    twice.rows = CMat::Zero(2, 2);
    twice.rows(0, 0) = 1.0;
    twice.rows(1, 0) = 1.0;
    twice.weights = RVec::Ones(2);
    const bool zero = throws<ZeroSurvival>(
        [&] { backaction_step(CVec::Unit(2, 0), eye, twice); });
    // Perturbative regime: rows nearly orthogonal to the state. The no-click
    // fidelity equals (1 - sum_x/2)^2 independent of row crowding.
    auto rng = make_rng(157);
    const CMat basis = haar_unitary(8, rng);
    const CVec v = basis.col(0);
    InstrumentalMatrix weak;
    weak.dim = 8;
    weak.rows = CMat::Zero(7, 8);
    weak.weights = RVec::Ones(7);
    std::uniform_real_distribution<double> uph(0.0, 6.283185307179586);
    for (int j = 0; j < 7; ++j) {
      CVec k = basis.col(j + 1) + 0.25 * basis.col((j + 1) % 7 + 1) +
               0.02 * std::exp(kI * uph(rng)) * v;
      k.normalize();
      weak.rows.row(j) = k.adjoint();
    }
    const double sum_x = detection_fractions(weak, v).sum();
    const BackactionResult d = backaction_step(v, CMat::Identity(8, 8), weak);
    const double half = 1.0 - 0.5 * sum_x;
    const double pert = std::abs(d.survival * std::norm(v.dot(d.state)) - half * half);
    const bool pert_ok = pert <= 5.0 * sum_x * sum_x + 1e-14;
    r.pass = dev <= 1e-12 && zero && pert_ok;
    r.detail = "no-click oracles deviation " + sci(dev) +
               (zero ? ", duplicated rows annihilate" : ", ZERO-SURVIVAL GUARD MISSING") +
               ", fidelity residual " + sci(pert) + " vs sum_x " + sci(sum_x);
  });

  suite.run("tracking_static_regression", [](CheckResult& r) {
    EvolutionConfig cfg;
    cfg.dim = 4;
    cfg.eps = 1e-3;
    cfg.g = 0.0;
    cfg.period = 100;
    cfg.total_steps = 30;
    cfg.sample_size = 1e4;
    cfg.target_weight = 0.9999;
    cfg.initial_weight = 1.0;  // exactly pure, frozen evolution below
    cfg.hamiltonian_scale = 0.0;
    cfg.hamiltonian_seed = 1;
    cfg.state_seed = 2;
    cfg.noise_seed = 3;
    const auto recs = run_tracking(cfg);
    double worst_loss = 0.0, worst_back = 1.0, worst_fr = 0.0;
    for (const auto& rec : recs) {
      if (rec.step > 10) worst_loss = std::max(worst_loss, rec.loss);
      worst_back = std::min(worst_back, rec.backaction_fidelity);
      worst_fr = std::max(worst_fr, rec.detection_fractions.maxCoeff());
    }
    r.pass = recs.size() == 30 && worst_loss <= 1e-5 && worst_back >= 0.9999 &&
             worst_fr <= 1e-3;
    r.detail = "frozen pure state: max post-warm-up loss " + sci(worst_loss) +
               ", min back-action fidelity " + sci(worst_back) + ", max fraction " +
               sci(worst_fr);
  });

  suite.run("tracking_smoke_determinism", [](CheckResult& r) {
    EvolutionConfig cfg;
    cfg.dim = 4;
    cfg.eps = 3e-4;
    cfg.g = 0.5;
    cfg.period = 8;
    cfg.total_steps = 12;
    cfg.sample_size = 1e4;
    cfg.target_weight = 0.9999;
    cfg.initial_weight = 0.999999;
    cfg.hamiltonian_seed = 5;
    cfg.state_seed = 6;
    cfg.noise_seed = 7;
    const auto a = run_tracking(cfg);
    const auto b = run_tracking(cfg);
    bool identical = a.size() == b.size();
    bool wellformed = a.size() == 12;
    for (std::size_t i = 0; identical && i < a.size(); ++i) {
      identical = a[i].step == b[i].step && a[i].recon_fidelity == b[i].recon_fidelity &&
                  a[i].loss == b[i].loss && a[i].efficiency == b[i].efficiency &&
                  a[i].backaction_fidelity == b[i].backaction_fidelity &&
                  a[i].detection_fractions.size() == b[i].detection_fractions.size() &&
                  (a[i].detection_fractions - b[i].detection_fractions).cwiseAbs().maxCoeff() ==
                      0.0;
    }
    for (std::size_t i = 0; wellformed && i < a.size(); ++i) {
      const auto& rec = a[i];
      wellformed = rec.step == static_cast<int>(i) + 1 &&
                   rec.detection_fractions.size() == 20 && rec.loss >= 0.0 &&
                   rec.recon_fidelity > 0.0 && rec.recon_fidelity <= 1.0 + 1e-9 &&
                   rec.backaction_fidelity >= 0.0 && rec.backaction_fidelity <= 1.0 + 1e-9 &&
                   rec.detection_fractions.minCoeff() >= 0.0 && rec.efficiency > 0.0;
    }
    r.pass = identical && wellformed;
    r.detail = std::string(identical ? "two runs byte-identical" : "RUNS DIVERGE") +
               (wellformed ? ", records well-formed" : ", RECORDS MALFORMED");
  });

  return suite.results;
}

}  // namespace ltomo
