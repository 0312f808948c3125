#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ltomo/errors.hpp"
#include "ltomo/io.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/rng.hpp"

using namespace ltomo;

TEST_CASE("doubles survive the 17-digit round trip") {
  for (double v : {2.15997e-6, 1.0 / 3.0, 0.9999, 1.4175e-2, 6562.59}) {
    CHECK(std::stod(format_g17(v)) == v);
  }
  CHECK(format_g17(1.0) == "1");
}

TEST_CASE("static trial CSV is stable") {
  std::vector<StaticTrial> trials(1);
  trials[0] = {0, 0.5, 2.0, 0.25, 4.0};
  CHECK(static_trials_csv(trials) ==
        "trial,loss,efficiency,control_loss,control_efficiency\n"
        "0,0.5,2,0.25,4\n");
}

TEST_CASE("tracking CSV reports per-step fraction extremes") {
  std::vector<TrackingRecord> recs(1);
  recs[0].step = 1;
  recs[0].recon_fidelity = 0.5;
  recs[0].loss = 0.5;
  recs[0].efficiency = 2.0;
  recs[0].backaction_fidelity = 0.25;
  recs[0].detection_fractions = RVec::Zero(3);
  recs[0].detection_fractions << 0.125, 0.5, 0.25;
  CHECK(tracking_steps_csv(recs) ==
        "step,recon_fidelity,loss,efficiency,max_detection_fraction,"
        "sum_detection_fraction,backaction_fidelity\n"
        "1,0.5,0.5,2,0.5,0.875,0.25\n");
}

TEST_CASE("config json round trips through apply_json") {
  StaticConfig cfg;
  cfg.dim = 4;
  cfg.rank = 2;
  cfg.sample_size = 5e3;
  cfg.master_seed = 77;
  StaticConfig parsed;
  apply_json(parsed, static_config_json(cfg));
  CHECK(parsed.dim == cfg.dim);
  CHECK(parsed.rank == cfg.rank);
  CHECK(parsed.sample_size == cfg.sample_size);
  CHECK(parsed.master_seed == cfg.master_seed);

  EvolutionConfig tcfg;
  tcfg.dim = 4;
  tcfg.eps = 2e-4;
  tcfg.period = 123;
  tcfg.noise_seed = 5;
  tcfg.bootstrap_estimate = true;
  EvolutionConfig tparsed;
  apply_json(tparsed, evolution_config_json(tcfg));
  CHECK(tparsed.dim == tcfg.dim);
  CHECK(tparsed.eps == tcfg.eps);
  CHECK(tparsed.period == tcfg.period);
  CHECK(tparsed.noise_seed == tcfg.noise_seed);
  CHECK(tparsed.bootstrap_estimate == tcfg.bootstrap_estimate);
}

TEST_CASE("unknown config keys are refused") {
  StaticConfig cfg;
  CHECK_THROWS_AS(apply_json(cfg, ordered_json{{"no_such_key", 1}}), InvalidArgs);
  EvolutionConfig tcfg;
  CHECK_THROWS_AS(apply_json(tcfg, ordered_json{{"bogus", true}}), InvalidArgs);
}

TEST_CASE("lambda0 sets both static weights and derives tracking seeds") {
  StaticConfig cfg;
  apply_json(cfg, ordered_json{{"lambda0", 0.42}});
  CHECK(cfg.dominant_weight == 0.42);
  CHECK(cfg.target_weight == 0.42);

  EvolutionConfig tcfg;
  apply_json(tcfg, ordered_json{{"seed", 10}});
  CHECK(tcfg.hamiltonian_seed == derive_seed(10, 11));
  CHECK(tcfg.state_seed == derive_seed(10, 12));
  CHECK(tcfg.noise_seed == derive_seed(10, 13));
}

TEST_CASE("summary json embeds config echo and version") {
  const StaticConfig cfg;
  const StaticSummary sum{};
  const ordered_json j = static_summary_json(cfg, sum);
  CHECK(j.contains("version"));
  CHECK(j.contains("config"));
  CHECK(j["config"]["dim"] == cfg.dim);
  CHECK(j.contains("mean_loss"));
}

TEST_CASE("protocol json carries rows, weights, and the povm defect") {
  const InstrumentalMatrix x = mub_protocol(2);
  const ordered_json j = protocol_json(x);
  CHECK(j["dim"] == 2);
  CHECK(j["row_count"] == 6);
  CHECK(j["rows"].size() == 6);
  CHECK(j["rows"][0].size() == 2);
  CHECK(j["rows"][0][0].size() == 2);  // [re, im]
  CHECK(j["weights"].size() == 6);
  CHECK(j["povm_defect"].get<double>() < 1e-10);
}

TEST_CASE("text files are written and json files are parsed") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ltomo_io_test";
  fs::remove_all(dir);
  const fs::path file = dir / "x" / "cfg.json";
  write_text_file(file, "{\"dim\": 4}\n");
  const ordered_json j = load_json_file(file);
  CHECK(j["dim"] == 4);
  std::ofstream(dir / "bad.json") << "{not json";
  CHECK_THROWS_AS(load_json_file(dir / "bad.json"), InvalidArgs);
  CHECK_THROWS_AS(load_json_file(dir / "missing.json"), InvalidArgs);
  fs::remove_all(dir);
}
