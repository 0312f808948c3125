#pragma once

#include <cstdint>
#include <vector>

#include "ltomo/tracker.hpp"
#include "ltomo/types.hpp"

namespace ltomo {

// Ensemble experiment: draw a near-pure state per trial, measure it once with
// the state-adapted protocol and once with the plain MUB control (a true
// POVM), reconstruct both, and score fidelity loss against the bound.
struct StaticConfig {
  int dim = 8;
  int rank = 8;                // reconstruction rank and generated state rank
  double dominant_weight = 0.9999;  // largest eigenvalue of the drawn states
  double target_weight = 0.9999;    // protocol tuning weight
  double sample_size = 1e4;
  int trials = 200;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

struct StaticTrial {
  int trial = 0;
  double loss = 0.0;
  double efficiency = 0.0;
  double control_loss = 0.0;
  double control_efficiency = 0.0;
};

// Runs all trials (concurrently when threads > 1) with per-trial seed streams
// derived from master_seed; results are ordered by trial index and identical
// regardless of thread count.
std::vector<StaticTrial> run_static(const StaticConfig& cfg);

struct Histogram {
  RVec edges;             // bins + 1 ascending edges
  std::vector<int> counts;  // bins entries
};
Histogram histogram(const std::vector<double>& values, int bins);

struct StaticSummary {
  int trials = 0;
  double bound = 0.0;  // min_loss at the configured (dim, rank, n)
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  double efficiency_of_mean = 0.0;   // bound / mean_loss, the headline figure
  double mean_trial_efficiency = 0.0;  // mean of per-trial ratios (inflated)
  double control_mean_loss = 0.0;
  double control_sd_loss = 0.0;
  double control_efficiency_of_mean = 0.0;
  double control_mean_trial_efficiency = 0.0;
  Histogram loss_hist;
  Histogram control_loss_hist;
};
StaticSummary summarize_static(const StaticConfig& cfg, const std::vector<StaticTrial>& trials);

struct TrackingSummary {
  int steps = 0;
  int warmup = 10;  // steps excluded from the stationary statistics
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  double mean_efficiency = 0.0;
  double sd_efficiency = 0.0;
  double share_six_nines = 0.0;  // post-warm-up steps with F > 0.999999
  double backaction_step1 = 0.0;
  double backaction_min = 0.0;
  double backaction_last = 0.0;
  double fraction_max = 0.0;       // over every (row, step)
  double fraction_q90 = 0.0;       // 0.9 quantile over every (row, step)
  RVec fraction_row_max;           // per protocol row, over steps
  RVec fraction_row_mean;
  Histogram backaction_hist;
  // Periodicity diagnostic on the efficiency series (post warm-up): discrete
  // spectrum peak location vs the modulation frequency bin.
  int dft_expected_bin = 0;
  int dft_peak_bin = 0;
  double dft_peak_over_median = 0.0;
  // Mann-Kendall-style trend statistic on post-warm-up loss; |z| < 1.96 means
  // no drift at the 5% level.
  double trend_z = 0.0;
};
TrackingSummary summarize_tracking(const EvolutionConfig& cfg,
                                   const std::vector<TrackingRecord>& records);

}  // namespace ltomo
