#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltomo/errors.hpp"
#include "ltomo/estimator.hpp"
#include "ltomo/experiments.hpp"
#include "ltomo/io.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/qmat.hpp"
#include "ltomo/rng.hpp"
#include "ltomo/tracker.hpp"
#include "ltomo/verify.hpp"
#include "ltomo/version.hpp"

namespace {

namespace fs = std::filesystem;

struct StaticCli {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  int dim = 0;
  int rank = 0;
  double n = 0.0;
  int trials = 0;
  double lambda0 = 0.0;
  int threads = -1;
};

struct TrackCli {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  int dim = 0;
  double n = 0.0;
  int steps = 0;
  double eps = 0.0;
  double g = 0.0;
  int period = 0;
  double lambda0 = 0.0;
  double init_weight = 0.0;
  double setup_n = 0.0;
  double h_scale = 1.0;
  bool bootstrap = false;
};

struct ProtocolCli {
  std::string out = ".";
  int dim = 8;
  double lambda0 = 0.0;
  std::uint64_t seed = 0;
  double n = 1e4;
};

int cmd_static(const StaticCli& cli, const CLI::App& sub) {
  ltomo::StaticConfig cfg;
  if (sub.count("--config")) ltomo::apply_json(cfg, ltomo::load_json_file(cli.config));
  if (sub.count("--seed")) cfg.master_seed = cli.seed;
  if (sub.count("--dim")) cfg.dim = cli.dim;
  if (sub.count("--rank")) cfg.rank = cli.rank;
  if (sub.count("--n")) cfg.sample_size = cli.n;
  if (sub.count("--trials")) cfg.trials = cli.trials;
  if (sub.count("--lambda0")) {
    cfg.dominant_weight = cli.lambda0;
    cfg.target_weight = cli.lambda0;
  }
  if (sub.count("--threads")) cfg.threads = cli.threads;

  const auto trials = ltomo::run_static(cfg);
  const auto summary = ltomo::summarize_static(cfg, trials);
  const fs::path out(cli.out);
  ltomo::write_text_file(out / "static_trials.csv", ltomo::static_trials_csv(trials));
  ltomo::write_text_file(out / "static_summary.json",
                         ltomo::static_summary_json(cfg, summary).dump(2) + "\n");
  std::cout << "trials " << summary.trials << "\n"
            << "mean loss " << ltomo::format_g17(summary.mean_loss) << " (bound "
            << ltomo::format_g17(summary.bound) << ")\n"
            << "efficiency " << ltomo::format_g17(summary.efficiency_of_mean) << "\n"
            << "control mean loss " << ltomo::format_g17(summary.control_mean_loss)
            << ", control efficiency "
            << ltomo::format_g17(summary.control_efficiency_of_mean) << "\n";
  return 0;
}

int cmd_track(const TrackCli& cli, const CLI::App& sub) {
  ltomo::EvolutionConfig cfg;
  if (sub.count("--config")) ltomo::apply_json(cfg, ltomo::load_json_file(cli.config));
  if (sub.count("--seed")) {
    cfg.hamiltonian_seed = ltomo::derive_seed(cli.seed, 11);
    cfg.state_seed = ltomo::derive_seed(cli.seed, 12);
    cfg.noise_seed = ltomo::derive_seed(cli.seed, 13);
  }
  if (sub.count("--dim")) cfg.dim = cli.dim;
  if (sub.count("--n")) cfg.sample_size = cli.n;
  if (sub.count("--steps")) cfg.total_steps = cli.steps;
  if (sub.count("--eps")) cfg.eps = cli.eps;
  if (sub.count("--g")) cfg.g = cli.g;
  if (sub.count("--period")) cfg.period = cli.period;
  if (sub.count("--lambda0")) cfg.target_weight = cli.lambda0;
  if (sub.count("--init-weight")) cfg.initial_weight = cli.init_weight;
  if (sub.count("--setup-n")) cfg.setup_sample_size = cli.setup_n;
  if (sub.count("--h-scale")) cfg.hamiltonian_scale = cli.h_scale;
  if (sub.count("--bootstrap")) cfg.bootstrap_estimate = cli.bootstrap;

  const auto records = ltomo::run_tracking(cfg);
  const auto summary = ltomo::summarize_tracking(cfg, records);
  const fs::path out(cli.out);
  ltomo::write_text_file(out / "track_steps.csv", ltomo::tracking_steps_csv(records));
  ltomo::write_text_file(out / "track_summary.json",
                         ltomo::tracking_summary_json(cfg, summary).dump(2) + "\n");
  std::cout << "steps " << summary.steps << "\n"
            << "mean loss " << ltomo::format_g17(summary.mean_loss) << " (after "
            << summary.warmup << "-step warm-up)\n"
            << "mean efficiency " << ltomo::format_g17(summary.mean_efficiency) << "\n"
            << "backaction step1 " << ltomo::format_g17(summary.backaction_step1) << ", min "
            << ltomo::format_g17(summary.backaction_min) << "\n"
            << "max detection fraction " << ltomo::format_g17(summary.fraction_max) << "\n";
  return 0;
}

int cmd_protocol(const ProtocolCli& cli, const CLI::App& sub) {
  ltomo::InstrumentalMatrix x = ltomo::mub_protocol(cli.dim);
  if (sub.count("--lambda0")) {
    const ltomo::CMat rho =
        ltomo::random_mixed_state({cli.dim, cli.dim, cli.lambda0, cli.seed});
    x = ltomo::adapt_protocol(rho, x, cli.lambda0, cli.n);
  }
  const fs::path out(cli.out);
  ltomo::write_text_file(out / "protocol.json", ltomo::protocol_json(x).dump(2) + "\n");
  std::cout << "rows " << x.row_count() << ", povm defect "
            << ltomo::format_g17(ltomo::povm_defect(x)) << "\n";
  return 0;
}

int cmd_verify(bool corrupt_mub) {
  const auto results = ltomo::run_verification(corrupt_mub);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name
              << std::string(width - r.name.size() + 2, ' ') << r.detail << "\n";
  }
  std::cout << results.size() << " checks, " << failures << " failures\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qudit tomography with Lorentz-transformed measurement protocols"};
  app.set_version_flag("--version", ltomo::kVersion);
  app.require_subcommand(1);

  StaticCli s;
  auto* s_cmd = app.add_subcommand(
      "static", "Ensemble experiment: adapted protocol vs plain MUB control");
  s_cmd->add_option("--config", s.config, "JSON config file");
  s_cmd->add_option("--seed", s.seed, "master seed");
  s_cmd->add_option("--out", s.out, "output directory");
  s_cmd->add_option("--dim", s.dim, "qudit dimension");
  s_cmd->add_option("--rank", s.rank, "state and reconstruction rank");
  s_cmd->add_option("--n", s.n, "registered events per trial");
  s_cmd->add_option("--trials", s.trials, "number of trials");
  s_cmd->add_option("--lambda0", s.lambda0, "dominant weight (state and tuning)");
  s_cmd->add_option("--threads", s.threads, "worker threads (0 = auto)");

  TrackCli t;
  auto* t_cmd = app.add_subcommand("track", "Adaptive tracking of an evolving state");
  t_cmd->add_option("--config", t.config, "JSON config file");
  t_cmd->add_option("--seed", t.seed, "master seed");
  t_cmd->add_option("--out", t.out, "output directory");
  t_cmd->add_option("--dim", t.dim, "qudit dimension");
  t_cmd->add_option("--n", t.n, "registered events per step");
  t_cmd->add_option("--steps", t.steps, "evolution steps");
  t_cmd->add_option("--eps", t.eps, "time step");
  t_cmd->add_option("--g", t.g, "Hamiltonian modulation intensity");
  t_cmd->add_option("--period", t.period, "modulation period in steps");
  t_cmd->add_option("--lambda0", t.lambda0, "protocol tuning weight");
  t_cmd->add_option("--init-weight", t.init_weight, "dominant weight of the initial state");
  t_cmd->add_option("--setup-n", t.setup_n, "setup sample size for --bootstrap");
  t_cmd->add_option("--h-scale", t.h_scale, "Hamiltonian scale factor");
  t_cmd->add_flag("--bootstrap", t.bootstrap,
                  "estimate the initial state from a plain MUB run instead of "
                  "treating it as known");

  ProtocolCli p;
  auto* p_cmd = app.add_subcommand("protocol", "Dump a measurement protocol as JSON");
  p_cmd->add_option("--out", p.out, "output directory");
  p_cmd->add_option("--dim", p.dim, "qudit dimension");
  p_cmd->add_option("--lambda0", p.lambda0,
                    "adapt to a random state with this dominant weight");
  p_cmd->add_option("--seed", p.seed, "state seed for --lambda0");
  p_cmd->add_option("--n", p.n, "exposure normalization for --lambda0");

  bool corrupt_mub = false;
  auto* v_cmd = app.add_subcommand("verify", "Run the invariant suite");
  v_cmd->add_flag("--corrupt-mub", corrupt_mub,
                  "inject a deliberate defect to demonstrate failure reporting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s_cmd->parsed()) return cmd_static(s, *s_cmd);
    if (t_cmd->parsed()) return cmd_track(t, *t_cmd);
    if (p_cmd->parsed()) return cmd_protocol(p, *p_cmd);
    if (v_cmd->parsed()) return cmd_verify(corrupt_mub);
  } catch (const ltomo::InvalidArgs& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ltomo::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
