#pragma once

#include "panelfx/binning.hpp"
#include "panelfx/config.hpp"
#include "panelfx/panel.hpp"
#include "panelfx/textfilter.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace panelfx {

struct PlantedEvent {
    std::string name;
    std::string city; // base city name, platform suffix excluded
    std::vector<std::string> dates;
    double log_effect = 0.0;
};

struct SynthConfig {
    std::size_t n_cities = 20;
    std::size_t n_days = 200;
    std::uint64_t seed = 1;
    double base_log = 8.5; // ~4900 posts/day
    double fe_sd_city_month = 0.25;
    double fe_sd_day = 0.15;
    double fe_sd_user = 0.1;
    double noise_sd = 0.07;
    // Per-city override for the first cities (major markets have quieter
    // series); cities beyond the list keep noise_sd.
    std::vector<double> noise_sd_by_city;
    bool continuous = false; // skip rounding: exact log-linear outcomes
    bool poisson = false;    // robustness studies only
    std::size_t n_users = 0; // > 0 switches to a user-day panel
    std::string start_date = "2019-01-01";
    std::string city_prefix = "city";
    std::vector<std::string> city_names; // override the first labels
    std::string platform_suffix;         // e.g. "@facebook"
    double zero_day_rate = 0.0;

    // corpus generation for the classifier pipeline
    double posts_per_day = 0.0; // mean posts per city-day; 0 disables
    double weather_text_rate = 0.0;

    // weather process
    double temp_mean_low = 0.0;
    double temp_mean_high = 26.0;
    double temp_season_amp = 11.0;
    double temp_ar = 0.7;
    double temp_shock_sd = 5.0;
    double trange_mean = 9.0;
    double trange_sd = 4.0;
    double cloud_mean = 55.0;
    double cloud_sd = 25.0;
    double humidity_mean = 60.0;
    double humidity_sd = 18.0;
    double precip_prob = 0.35;
    double precip_mean_cm = 0.9;

    // planted structure; references must stay zero
    std::map<std::string, std::map<int, double>> planted_marginals;
    std::map<std::pair<int, int>, double> planted_surface; // coarse (t, p)
    std::vector<PlantedEvent> planted_events;

    void check() const;
};

struct TruthRow {
    std::string kind;  // "marginal:<variable>" | "cell" | "event"
    std::string label;
    double log_effect = 0.0;
    double pct = 0.0;
    std::int64_t occupancy = 0;
};

struct SynthTruth {
    std::vector<TruthRow> rows;

    const TruthRow* find(const std::string& kind, const std::string& label) const;
};

struct SynthResult {
    RawPanel raw;
    SynthTruth truth;
    std::vector<PostRecord> corpus;
};

SynthResult generate(const SynthConfig& config);
SynthTruth truth(const SynthConfig& config);

SynthConfig synth_from_config(const KeyValueConfig& cfg);
void synth_to_config(const SynthConfig& config, KeyValueConfig& cfg);

void write_truth_csv(const SynthTruth& truth, const std::string& path,
                     const std::string& manifest_id = "");

// Named calibrations; most map to one config, the pooled-platform
// comparison maps to two (stacked by the caller).
std::vector<SynthConfig> preset_configs(const std::string& name,
                                        std::uint64_t seed);
std::vector<std::string> preset_names();

} // namespace panelfx
