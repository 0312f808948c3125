#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ltomo/errors.hpp"
#include "ltomo/experiments.hpp"

using namespace ltomo;

namespace {

StaticConfig tiny_static() {
  StaticConfig cfg;
  cfg.dim = 2;
  cfg.rank = 2;
  cfg.dominant_weight = 0.8;
  cfg.target_weight = 0.8;
  cfg.sample_size = 2000;
  cfg.trials = 4;
  cfg.master_seed = 9;
  cfg.threads = 1;
  return cfg;
}

// Synthetic tracking records with controllable loss/efficiency series.
std::vector<TrackingRecord> synthetic_records(int steps,
                                              const std::vector<double>& loss,
                                              const std::vector<double>& eff) {
  std::vector<TrackingRecord> recs(steps);
  for (int i = 0; i < steps; ++i) {
    recs[i].step = i + 1;
    recs[i].loss = loss[i];
    recs[i].recon_fidelity = 1.0 - loss[i];
    recs[i].efficiency = eff[i];
    recs[i].backaction_fidelity = 0.99998;
    recs[i].detection_fractions = RVec::Constant(6, 1e-5);
    recs[i].detection_fractions(0) = 2e-5 + 1e-8 * i;
  }
  return recs;
}

}  // namespace

TEST_CASE("static runs are reproducible and thread-count independent") {
  const StaticConfig cfg = tiny_static();
  const auto a = run_static(cfg);
  const auto b = run_static(cfg);
  StaticConfig threaded = cfg;
  threaded.threads = 2;
  const auto c = run_static(threaded);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].trial == static_cast<int>(i));
    CHECK(a[i].loss == b[i].loss);
    CHECK(a[i].loss == c[i].loss);
    CHECK(a[i].control_loss == c[i].control_loss);
    CHECK(a[i].loss >= 0.0);
    CHECK(a[i].control_loss >= 0.0);
  }
}

TEST_CASE("invalid static configs are refused") {
  StaticConfig cfg = tiny_static();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_static(cfg), InvalidArgs);
  cfg = tiny_static();
  cfg.rank = 3;
  CHECK_THROWS_AS(run_static(cfg), InvalidArgs);
  cfg = tiny_static();
  cfg.sample_size = 0.0;
  CHECK_THROWS_AS(run_static(cfg), InvalidArgs);
}

TEST_CASE("histogram bins cover the range and count every value") {
  const std::vector<double> values{0.0, 0.1, 0.2, 0.35, 0.5, 1.0};
  const Histogram h = histogram(values, 4);
  REQUIRE(h.counts.size() == 4);
  REQUIRE(h.edges.size() == 5);
  CHECK(h.edges(0) == doctest::Approx(0.0));
  CHECK(h.edges(4) == doctest::Approx(1.0));
  int total = 0;
  for (int c : h.counts) total += c;
  CHECK(total == 6);
  CHECK(h.counts[0] == 3);  // 0.0, 0.1, 0.2 fall in [0, 0.25)
  CHECK_THROWS_AS(histogram(values, 0), InvalidArgs);
}

TEST_CASE("degenerate histogram input still lands in range") {
  const Histogram h = histogram({0.5, 0.5, 0.5}, 3);
  int total = 0;
  for (int c : h.counts) total += c;
  CHECK(total == 3);
  CHECK(h.edges(0) < 0.5);
  CHECK(h.edges(3) > 0.5);
}

TEST_CASE("static summary aggregates hand-checkable statistics") {
  StaticConfig cfg = tiny_static();
  std::vector<StaticTrial> trials(2);
  trials[0] = {0, 2e-6, 0.0, 1e-2, 0.0};
  trials[1] = {1, 4e-6, 0.0, 2e-2, 0.0};
  const double bound = min_loss(cfg.dim, cfg.rank, cfg.sample_size);
  const StaticSummary s = summarize_static(cfg, trials);
  CHECK(s.trials == 2);
  CHECK(s.mean_loss == doctest::Approx(3e-6).epsilon(1e-12));
  CHECK(s.sd_loss == doctest::Approx(std::sqrt(2.0) * 1e-6).epsilon(1e-10));
  CHECK(s.efficiency_of_mean == doctest::Approx(bound / 3e-6).epsilon(1e-12));
  CHECK(s.control_mean_loss == doctest::Approx(1.5e-2).epsilon(1e-12));
}

TEST_CASE("monotone loss series produces a large trend statistic") {
  const int steps = 60;
  std::vector<double> loss(steps), eff(steps);
  for (int i = 0; i < steps; ++i) {
    loss[i] = 1e-6 * (1.0 + 0.01 * i);
    eff[i] = 100.0;
  }
  EvolutionConfig cfg;
  cfg.period = 10;
  const TrackingSummary s = summarize_tracking(cfg, synthetic_records(steps, loss, eff));
  CHECK(s.trend_z > 1.96);

  std::vector<double> flat(steps, 1e-6);
  const TrackingSummary s2 = summarize_tracking(cfg, synthetic_records(steps, flat, eff));
  CHECK(s2.trend_z == 0.0);
}

TEST_CASE("spectrum scan finds the modulation frequency") {
  const int steps = 110;  // 10 warm-up + 100 stationary
  std::vector<double> loss(steps, 1e-7), eff(steps);
  for (int i = 0; i < steps; ++i)
    eff[i] = 100.0 + 10.0 * std::sin(2.0 * std::numbers::pi * i / 10.0);
  EvolutionConfig cfg;
  cfg.period = 10;  // expected bin = 100 steps / 10 = 10
  const TrackingSummary s = summarize_tracking(cfg, synthetic_records(steps, loss, eff));
  CHECK(s.dft_expected_bin == 10);
  CHECK(s.dft_peak_bin == 10);
  CHECK(s.dft_peak_over_median > 5.0);
}

TEST_CASE("tracking summary collects fraction and backaction statistics") {
  const int steps = 20;
  std::vector<double> loss(steps, 5e-7), eff(steps, 100.0);
  auto recs = synthetic_records(steps, loss, eff);
  recs[7].detection_fractions(3) = 9e-5;  // single outlier row
  recs[0].backaction_fidelity = 0.999981;
  const EvolutionConfig cfg;
  const TrackingSummary s = summarize_tracking(cfg, recs);
  CHECK(s.steps == 20);
  CHECK(s.fraction_max == doctest::Approx(9e-5));
  CHECK(s.fraction_row_max(3) == doctest::Approx(9e-5));
  CHECK(s.fraction_q90 < 9e-5);
  CHECK(s.backaction_step1 == doctest::Approx(0.999981));
  CHECK(s.backaction_min <= 0.99998);
  CHECK(s.share_six_nines == doctest::Approx(1.0));
  CHECK(s.mean_loss == doctest::Approx(5e-7));
}
