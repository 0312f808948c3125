#include <cstdio>
#include <fstream>
#include <sstream>

#include "ltomo/errors.hpp"
#include "ltomo/io.hpp"
#include "ltomo/rng.hpp"
#include "ltomo/version.hpp"

namespace ltomo {
namespace {

ordered_json rvec_json(const RVec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T, typename U>
void take(const ordered_json& j, const char* key, U& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

void reject_unknown(const ordered_json& j, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw InvalidArgs("unknown config key: " + key);
  }
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgs("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw InvalidArgs("write failed: " + path.string());
}

std::string static_trials_csv(const std::vector<StaticTrial>& trials) {
  std::ostringstream out;
  out << "trial,loss,efficiency,control_loss,control_efficiency\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << format_g17(t.loss) << ',' << format_g17(t.efficiency) << ','
        << format_g17(t.control_loss) << ',' << format_g17(t.control_efficiency) << '\n';
  }
  return out.str();
}

std::string tracking_steps_csv(const std::vector<TrackingRecord>& records) {
  std::ostringstream out;
  out << "step,recon_fidelity,loss,efficiency,max_detection_fraction,"
         "sum_detection_fraction,backaction_fidelity\n";
  for (const auto& r : records) {
    const double maxf = r.detection_fractions.size() > 0 ? r.detection_fractions.maxCoeff() : 0.0;
    const double sumf = r.detection_fractions.size() > 0 ? r.detection_fractions.sum() : 0.0;
    out << r.step << ',' << format_g17(r.recon_fidelity) << ',' << format_g17(r.loss) << ','
        << format_g17(r.efficiency) << ',' << format_g17(maxf) << ',' << format_g17(sumf) << ','
        << format_g17(r.backaction_fidelity) << '\n';
  }
  return out.str();
}

ordered_json histogram_json(const Histogram& h) {
  ordered_json j;
  j["edges"] = rvec_json(h.edges);
  j["counts"] = h.counts;
  return j;
}

ordered_json static_config_json(const StaticConfig& cfg) {
  ordered_json j;
  j["dim"] = cfg.dim;
  j["rank"] = cfg.rank;
  j["dominant_weight"] = cfg.dominant_weight;
  j["target_weight"] = cfg.target_weight;
  j["n"] = cfg.sample_size;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  return j;
}

ordered_json evolution_config_json(const EvolutionConfig& cfg) {
  ordered_json j;
  j["dim"] = cfg.dim;
  j["eps"] = cfg.eps;
  j["g"] = cfg.g;
  j["period"] = cfg.period;
  j["steps"] = cfg.total_steps;
  j["n"] = cfg.sample_size;
  j["lambda0"] = cfg.target_weight;
  j["init_weight"] = cfg.initial_weight;
  j["hamiltonian_seed"] = cfg.hamiltonian_seed;
  j["state_seed"] = cfg.state_seed;
  j["noise_seed"] = cfg.noise_seed;
  j["bootstrap_estimate"] = cfg.bootstrap_estimate;
  j["setup_n"] = cfg.setup_sample_size;
  j["hamiltonian_scale"] = cfg.hamiltonian_scale;
  return j;
}

ordered_json static_summary_json(const StaticConfig& cfg, const StaticSummary& s) {
  ordered_json j;
  j["version"] = kVersion;
  j["config"] = static_config_json(cfg);
  j["trials"] = s.trials;
  j["loss_bound"] = s.bound;
  j["mean_loss"] = s.mean_loss;
  j["sd_loss"] = s.sd_loss;
  j["efficiency_of_mean"] = s.efficiency_of_mean;
  j["mean_trial_efficiency"] = s.mean_trial_efficiency;
  j["control_mean_loss"] = s.control_mean_loss;
  j["control_sd_loss"] = s.control_sd_loss;
  j["control_efficiency_of_mean"] = s.control_efficiency_of_mean;
  j["control_mean_trial_efficiency"] = s.control_mean_trial_efficiency;
  j["loss_histogram"] = histogram_json(s.loss_hist);
  j["control_loss_histogram"] = histogram_json(s.control_loss_hist);
  return j;
}

ordered_json tracking_summary_json(const EvolutionConfig& cfg, const TrackingSummary& s) {
  ordered_json j;
  j["version"] = kVersion;
  j["config"] = evolution_config_json(cfg);
  j["steps"] = s.steps;
  j["warmup_steps"] = s.warmup;
  j["mean_loss"] = s.mean_loss;
  j["sd_loss"] = s.sd_loss;
  j["mean_efficiency"] = s.mean_efficiency;
  j["sd_efficiency"] = s.sd_efficiency;
  j["share_fidelity_above_six_nines"] = s.share_six_nines;
  j["backaction_step1"] = s.backaction_step1;
  j["backaction_min"] = s.backaction_min;
  j["backaction_last"] = s.backaction_last;
  j["fraction_max"] = s.fraction_max;
  j["fraction_q90"] = s.fraction_q90;
  j["fraction_row_max"] = rvec_json(s.fraction_row_max);
  j["fraction_row_mean"] = rvec_json(s.fraction_row_mean);
  j["backaction_histogram"] = histogram_json(s.backaction_hist);
  j["efficiency_dft_expected_bin"] = s.dft_expected_bin;
  j["efficiency_dft_peak_bin"] = s.dft_peak_bin;
  j["efficiency_dft_peak_over_median"] = s.dft_peak_over_median;
  j["loss_trend_z"] = s.trend_z;
  return j;
}

ordered_json protocol_json(const InstrumentalMatrix& x) {
  ordered_json j;
  j["version"] = kVersion;
  j["dim"] = x.dim;
  j["row_count"] = x.row_count();
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < x.row_count(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < x.dim; ++c)
      row.push_back(ordered_json::array({x.rows(r, c).real(), x.rows(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  j["weights"] = rvec_json(x.weights);
  j["povm_defect"] = povm_defect(x);
  return j;
}

void apply_json(StaticConfig& cfg, const ordered_json& j) {
  reject_unknown(j, {"dim", "rank", "lambda0", "dominant_weight", "target_weight", "n", "trials",
                     "seed", "threads"});
  take<int>(j, "dim", cfg.dim);
  take<int>(j, "rank", cfg.rank);
  if (j.contains("lambda0")) {
    cfg.dominant_weight = j.at("lambda0").get<double>();
    cfg.target_weight = cfg.dominant_weight;
  }
  take<double>(j, "dominant_weight", cfg.dominant_weight);
  take<double>(j, "target_weight", cfg.target_weight);
  take<double>(j, "n", cfg.sample_size);
  take<int>(j, "trials", cfg.trials);
  take<std::uint64_t>(j, "seed", cfg.master_seed);
  take<int>(j, "threads", cfg.threads);
}

void apply_json(EvolutionConfig& cfg, const ordered_json& j) {
  reject_unknown(j, {"dim", "eps", "g", "period", "steps", "n", "lambda0", "init_weight", "seed",
                     "hamiltonian_seed", "state_seed", "noise_seed", "bootstrap_estimate",
                     "setup_n", "hamiltonian_scale"});
  take<int>(j, "dim", cfg.dim);
  take<double>(j, "eps", cfg.eps);
  take<double>(j, "g", cfg.g);
  take<int>(j, "period", cfg.period);
  take<int>(j, "steps", cfg.total_steps);
  take<double>(j, "n", cfg.sample_size);
  take<double>(j, "lambda0", cfg.target_weight);
  take<double>(j, "init_weight", cfg.initial_weight);
  if (j.contains("seed")) {
    const auto master = j.at("seed").get<std::uint64_t>();
    cfg.hamiltonian_seed = derive_seed(master, 11);
    cfg.state_seed = derive_seed(master, 12);
    cfg.noise_seed = derive_seed(master, 13);
  }
  take<std::uint64_t>(j, "hamiltonian_seed", cfg.hamiltonian_seed);
  take<std::uint64_t>(j, "state_seed", cfg.state_seed);
  take<std::uint64_t>(j, "noise_seed", cfg.noise_seed);
  take<bool>(j, "bootstrap_estimate", cfg.bootstrap_estimate);
  take<double>(j, "setup_n", cfg.setup_sample_size);
  take<double>(j, "hamiltonian_scale", cfg.hamiltonian_scale);
}

ordered_json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgs("cannot open config file: " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgs("config parse error in " + path.string() + ": " + e.what());
  }
}

}  // namespace ltomo
