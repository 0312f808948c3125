#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltomo/experiments.hpp"
#include "ltomo/protocol.hpp"
#include "ltomo/tracker.hpp"

namespace ltomo {

using ordered_json = nlohmann::ordered_json;

// Doubles in CSV output carry 17 significant digits (lossless round trip).
std::string format_g17(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string static_trials_csv(const std::vector<StaticTrial>& trials);
std::string tracking_steps_csv(const std::vector<TrackingRecord>& records);

ordered_json histogram_json(const Histogram& h);
ordered_json static_config_json(const StaticConfig& cfg);
ordered_json evolution_config_json(const EvolutionConfig& cfg);
ordered_json static_summary_json(const StaticConfig& cfg, const StaticSummary& s);
ordered_json tracking_summary_json(const EvolutionConfig& cfg, const TrackingSummary& s);
ordered_json protocol_json(const InstrumentalMatrix& x);

// Strict partial overrides: unknown keys raise InvalidArgs so config typos
// surface as config errors instead of silently using defaults.
void apply_json(StaticConfig& cfg, const ordered_json& j);
void apply_json(EvolutionConfig& cfg, const ordered_json& j);

ordered_json load_json_file(const std::filesystem::path& path);

}  // namespace ltomo
