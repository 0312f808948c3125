#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/experiments.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"

namespace ltomo {
namespace {

struct TrialFailure {
  int trial = -1;
  std::exception_ptr error;
};

StaticTrial run_one_trial(const StaticConfig& cfg, const InstrumentalMatrix& base, int i) {
  const std::uint64_t state_seed = derive_seed(cfg.master_seed, 3 * i);
  const std::uint64_t adapted_seed = derive_seed(cfg.master_seed, 3 * i + 1);
  const std::uint64_t control_seed = derive_seed(cfg.master_seed, 3 * i + 2);

  const CMat rho = random_mixed_state({cfg.dim, cfg.rank, cfg.dominant_weight, state_seed});
  const double bound = min_loss(cfg.dim, cfg.rank, cfg.sample_size);

  MleOptions opts;
  opts.rank = cfg.rank;
  // The untransformed control is nearly unidentifiable around pure states, so
  // its fixed point can need ~10^5-10^6 iterations; budget for the tail.
  opts.max_iter = 5000000;

  StaticTrial out;
  out.trial = i;

  const InstrumentalMatrix adapted =
      adapt_protocol(rho, base, cfg.target_weight, cfg.sample_size);
  const CountRecord rec = sample_counts(adapted, rho, adapted_seed);
  const MleResult res = mle_reconstruct(rec, opts);
  out.loss = std::max(1.0 - fidelity(res.rho, rho), 0.0);
  out.efficiency = out.loss > 0.0 ? bound / out.loss : std::numeric_limits<double>::infinity();

  const InstrumentalMatrix control = normalize_exposure(base, rho, cfg.sample_size);
  const CountRecord rec_c = sample_counts(control, rho, control_seed);
  const MleResult res_c = mle_reconstruct(rec_c, opts);
  out.control_loss = std::max(1.0 - fidelity(res_c.rho, rho), 0.0);
  out.control_efficiency =
      out.control_loss > 0.0 ? bound / out.control_loss : std::numeric_limits<double>::infinity();
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / xs.size();
}

double sd_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / (xs.size() - 1));
}

double mean_finite(const std::vector<double>& xs) {
  double s = 0.0;
  int n = 0;
  for (double x : xs)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n == 0 ? 0.0 : s / n;
}

double quantile_of(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * (xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace

std::vector<StaticTrial> run_static(const StaticConfig& cfg) {
  if (cfg.trials < 1) throw InvalidArgs("need at least one trial");
  if (cfg.dim < 2) throw UnsupportedDimension("experiment needs dim >= 2");
  if (cfg.rank < 1 || cfg.rank > cfg.dim) throw RankTooSmall("trial rank out of range");
  if (!(cfg.sample_size > 0.0)) throw InvalidArgs("sample size must be positive");

  const InstrumentalMatrix base = mub_protocol(cfg.dim);
  std::vector<StaticTrial> results(cfg.trials);

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.trials));

  if (workers <= 1) {
    for (int i = 0; i < cfg.trials; ++i) {
      try {
        results[i] = run_one_trial(cfg, base, i);
      } catch (const Error& e) {
        throw NumericalError("trial " + std::to_string(i) + ": " + e.what());
      }
    }
    return results;
  }

  std::vector<TrialFailure> failures(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = static_cast<int>(w); i < cfg.trials; i += static_cast<int>(workers)) {
        try {
          results[i] = run_one_trial(cfg, base, i);
        } catch (...) {
          failures[w] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f.error) {
      try {
        std::rethrow_exception(f.error);
      } catch (const Error& e) {
        throw NumericalError("trial " + std::to_string(f.trial) + ": " + e.what());
      }
    }
  }
  return results;
}

Histogram histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw InvalidArgs("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  h.edges = RVec::Zero(bins + 1);
  if (values.empty()) return h;
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 1e-9, 1e-12);
    lo -= pad;
    hi += pad;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges(b) = lo + b * width;
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

StaticSummary summarize_static(const StaticConfig& cfg, const std::vector<StaticTrial>& trials) {
  StaticSummary s;
  s.trials = static_cast<int>(trials.size());
  s.bound = min_loss(cfg.dim, cfg.rank, cfg.sample_size);
  std::vector<double> loss, eff, closs, ceff;
  loss.reserve(trials.size());
  for (const auto& t : trials) {
    loss.push_back(t.loss);
    eff.push_back(t.efficiency);
    closs.push_back(t.control_loss);
    ceff.push_back(t.control_efficiency);
  }
  s.mean_loss = mean_of(loss);
  s.sd_loss = sd_of(loss, s.mean_loss);
  s.efficiency_of_mean = s.mean_loss > 0.0 ? s.bound / s.mean_loss
                                           : std::numeric_limits<double>::infinity();
  s.mean_trial_efficiency = mean_finite(eff);
  s.control_mean_loss = mean_of(closs);
  s.control_sd_loss = sd_of(closs, s.control_mean_loss);
  s.control_efficiency_of_mean = s.control_mean_loss > 0.0
                                     ? s.bound / s.control_mean_loss
                                     : std::numeric_limits<double>::infinity();
  s.control_mean_trial_efficiency = mean_finite(ceff);
  s.loss_hist = histogram(loss, 30);
  s.control_loss_hist = histogram(closs, 30);
  return s;
}

TrackingSummary summarize_tracking(const EvolutionConfig& cfg,
                                   const std::vector<TrackingRecord>& records) {
  TrackingSummary s;
  s.steps = static_cast<int>(records.size());
  if (records.empty()) return s;
  s.warmup = std::min(s.warmup, s.steps - 1);

  std::vector<double> loss, eff, backaction;
  backaction.reserve(records.size());
  for (const auto& r : records) backaction.push_back(r.backaction_fidelity);
  for (std::size_t i = static_cast<std::size_t>(s.warmup); i < records.size(); ++i) {
    loss.push_back(records[i].loss);
    if (std::isfinite(records[i].efficiency)) eff.push_back(records[i].efficiency);
  }
  s.mean_loss = mean_of(loss);
  s.sd_loss = sd_of(loss, s.mean_loss);
  s.mean_efficiency = mean_of(eff);
  s.sd_efficiency = sd_of(eff, s.mean_efficiency);

  int six = 0;
  for (std::size_t i = static_cast<std::size_t>(s.warmup); i < records.size(); ++i)
    if (records[i].recon_fidelity > 0.999999) ++six;
  s.share_six_nines = loss.empty() ? 0.0 : static_cast<double>(six) / loss.size();

  s.backaction_step1 = records.front().backaction_fidelity;
  s.backaction_min = *std::min_element(backaction.begin(), backaction.end());
  s.backaction_last = backaction.back();
  s.backaction_hist = histogram(backaction, 30);

  const int m = static_cast<int>(records.front().detection_fractions.size());
  s.fraction_row_max = RVec::Zero(m);
  s.fraction_row_mean = RVec::Zero(m);
  std::vector<double> all_fractions;
  all_fractions.reserve(records.size() * static_cast<std::size_t>(m));
  for (const auto& r : records) {
    for (int j = 0; j < m; ++j) {
      const double f = r.detection_fractions(j);
      all_fractions.push_back(f);
      s.fraction_row_max(j) = std::max(s.fraction_row_max(j), f);
      s.fraction_row_mean(j) += f;
    }
  }
  s.fraction_row_mean /= static_cast<double>(records.size());
  s.fraction_max = *std::max_element(all_fractions.begin(), all_fractions.end());
  s.fraction_q90 = quantile_of(all_fractions, 0.9);

  // Single-frequency spectrum scan of the post-warm-up efficiency series.
  const auto n = static_cast<int>(eff.size());
  if (n > 8 && cfg.period > 0) {
    const double mean = s.mean_efficiency;
    const int kmax = n / 2;
    std::vector<double> amp(static_cast<std::size_t>(kmax) + 1, 0.0);
    for (int k = 1; k <= kmax; ++k) {
      cplx acc(0.0, 0.0);
      for (int t = 0; t < n; ++t) {
        const double phase = -2.0 * std::numbers::pi * k * t / n;
        acc += (eff[static_cast<std::size_t>(t)] - mean) * std::exp(kI * phase);
      }
      amp[static_cast<std::size_t>(k)] = std::abs(acc);
    }
    s.dft_expected_bin = std::max(1, static_cast<int>(std::lround(static_cast<double>(n) / cfg.period)));
    int peak = 1;
    for (int k = 2; k <= kmax; ++k)
      if (amp[static_cast<std::size_t>(k)] > amp[static_cast<std::size_t>(peak)]) peak = k;
    s.dft_peak_bin = peak;
    std::vector<double> rest;
    rest.reserve(amp.size());
    for (int k = 1; k <= kmax; ++k)
      if (std::abs(k - s.dft_expected_bin) > 1) rest.push_back(amp[static_cast<std::size_t>(k)]);
    const double med = quantile_of(rest, 0.5);
    s.dft_peak_over_median = med > 0.0 ? amp[static_cast<std::size_t>(s.dft_expected_bin)] / med
                                       : std::numeric_limits<double>::infinity();
  }

  // Mann-Kendall S over the post-warm-up loss series.
  if (n >= 2 && loss.size() >= 2) {
    const auto nl = static_cast<long long>(loss.size());
    long long sgn_sum = 0;
    for (std::size_t i = 0; i + 1 < loss.size(); ++i)
      for (std::size_t j = i + 1; j < loss.size(); ++j) {
        const double d = loss[j] - loss[i];
        sgn_sum += d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      }
    const double var = nl * (nl - 1.0) * (2.0 * nl + 5.0) / 18.0;
    double z = 0.0;
    if (var > 0.0 && sgn_sum != 0)
      z = (sgn_sum - (sgn_sum > 0 ? 1.0 : -1.0)) / std::sqrt(var);
    s.trend_z = z;
  }
  return s;
}

}  // namespace ltomo
