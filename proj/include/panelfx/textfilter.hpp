#pragma once

#include "panelfx/panel.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace panelfx {

struct WeatherDictionary {
    std::set<std::string> terms;

    static WeatherDictionary builtin();
    static WeatherDictionary load(const std::string& path);

    // Exact lookup after possessive stripping ('s or trailing ').
    bool matches(const std::string& token) const;
};

struct PostRecord {
    std::string text;
    std::string city_id;
    std::string date;
    std::string user_id;
};

// Case-folded maximal runs of letters plus internal apostrophes.
std::vector<std::string> tokenize(const std::string& text);

bool is_weather(const std::string& text, const WeatherDictionary& dict);
inline bool is_weather(const PostRecord& post, const WeatherDictionary& dict) {
    return is_weather(post.text, dict);
}

enum class OutcomeMode { Share, NonWeatherCount, AllCount };

OutcomeMode parse_outcome_mode(const std::string& name);

struct CityDayCounts {
    std::string city;
    std::string date;
    std::int64_t weather = 0;
    std::int64_t total = 0;

    std::int64_t nonweather() const { return total - weather; }
    double share() const { return total > 0 ? double(weather) / double(total) : 0.0; }
};

// Classify and aggregate per city-day, sorted by (city, date).
std::vector<CityDayCounts> aggregate_posts(const std::vector<PostRecord>& posts,
                                           const WeatherDictionary& dict);

// Replace the outcome of matching (city, date) rows. Share mode installs the
// share as a level outcome; the count modes install counts for the usual log
// pipeline. Rows without posts get zero counts (share 0).
void apply_outcomes(PanelFrame& frame, const std::vector<CityDayCounts>& counts,
                    OutcomeMode mode);

std::vector<PostRecord> read_posts_csv(const std::string& path);
void write_posts_csv(const std::vector<PostRecord>& posts,
                     const std::string& path,
                     const std::string& manifest_id = "");
void write_counts_csv(const std::vector<CityDayCounts>& counts,
                      const std::string& path,
                      const std::string& manifest_id = "");

} // namespace panelfx
