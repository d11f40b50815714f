#include "panelfx/textfilter.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

namespace panelfx {

namespace {

const char* kBuiltinTerms[] = {
    "aerovane", "air", "airstream", "altocumulus", "altostratus", "anemometer", 
    "anemometers", "anticyclone", "anticyclones", "arctic", "arid", "aridity", 
    "atmosphere", "atmospheric", "autumn", "autumnal", "balmy", "baroclinic", 
    "barometer", "barometers", "barometric", "blizzard", "blizzards", "blustering", 
    "blustery", "breeze", "breezes", "breezy", "brisk", "calm", "celsius", 
    "chill", "chilled", "chillier", "chilliest", "chilly", "chinook", "cirrocumulus", 
    "cirrostratus", "cirrus", "climate", "climates", "cloud", "cloudburst", 
    "cloudbursts", "cloudier", "cloudiest", "clouds", "cloudy", "cold", "colder", 
    "coldest", "condensation", "contrail", "contrails", "cool", "cooled", "cooling", 
    "cools", "cumulonimbus", "cumulus", "cyclone", "cyclones", "damp", "damper", 
    "dampest", "degree", "degrees", "deluge", "dew", "dews", "dewy", "doppler", 
    "downburst", "downbursts", "downdraft", "downdrafts", "downpour", "downpours", 
    "dried", "drier", "dries", "driest", "drizzle", "drizzled", "drizzles", 
    "drizzly", "drought", "droughts", "dry", "dryline", "fall", "fahrenheit", 
    "flood", "flooded", "flooding", "floods", "flurries", "flurry", "fog", 
    "fogbow", "fogbows", "fogged", "fogging", "foggy", "fogs", "forecast", 
    "forecasted", "forecasting", "forecasts", "freeze", "freezes", "freezing", 
    "frigid", "frost", "frostier", "frostiest", "frosts", "frosty", "froze", 
    "frozen", "gale", "gales", "galoshes", "gust", "gusting", "gusts", "gusty", 
    "haboob", "haboobs", "hail", "hailed", "hailing", "hails", "haze", "hazes", 
    "hazy", "heat", "heated", "heating", "heats", "hoarfrost", "hot", "hotter", 
    "hottest", "humid", "humidity", "hurricane", "hurricanes", "ice", "iced", 
    "ices", "icing", "icy", "inclement", "landspout", "landspouts", "lightning", 
    "lightnings", "macroburst", "macrobursts", "maelstrom", "mercury", "meteorologic", 
    "meteorologist", "meteorologists", "meteorology", "microburst", "microbursts", 
    "microclimate", "microclimates", "millibar", "millibars", "mist", "misted", 
    "mists", "misty", "moist", "moisture", "monsoon", "monsoons", "mugginess", 
    "muggy", "nexrad", "nippy", "noaa", "nor'easter", "nor'easters", "noreaster", 
    "noreasters", "overcast", "ozone", "parched", "parching", "pollen", "precipitate", 
    "precipitated", "precipitates", "precipitating", "precipitation", "psychrometer", 
    "radar", "rain", "rainboots", "rainbow", "rainbows", "raincoat", "raincoats", 
    "rained", "rainfall", "rainier", "rainiest", "raining", "rains", "rainy", 
    "sandstorm", "sandstorms", "scorcher", "scorching", "searing", "shower", 
    "showering", "showers", "skiff", "sleet", "slicker", "slickers", "slush", 
    "slushy", "smog", "smoggier", "smoggiest", "smoggy", "snow", "snowed", 
    "snowier", "snowiest", "snowing", "snowmageddon", "snowpocalypse", "snows", 
    "snowy", "spring", "sprinkle", "sprinkles", "sprinkling", "squall", "squalls", 
    "squally", "storm", "stormed", "stormier", "stormiest", "storming", "storms", 
    "stormy", "stratocumulus", "stratus", "subtropical", "summer", "summery", 
    "sun", "sunnier", "sunniest", "sunny", "temperate", "temperature", "tempest", 
    "thaw", "thawed", "thawing", "thaws", "thermometer", "thunder", "thundered", 
    "thundering", "thunders", "thunderstorm", "thunderstorms", "tornadic", 
    "tornado", "tornadoes", "tropical", "troposphere", "tsunami", "turbulent", 
    "twister", "twisters", "typhoon", "typhoons", "umbrella", "umbrellas", 
    "vane", "warm", "warmed", "warming", "warms", "warmth", "waterspout", "waterspouts", 
    "weather", "wet", "wetter", "wettest", "wind", "windchill", "windchills", 
    "windier", "windiest", "windspeed", "windy", "winter", "wintry"
};

bool is_letter(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

} // namespace

WeatherDictionary WeatherDictionary::builtin() {
    WeatherDictionary dict;
    for (const char* term : kBuiltinTerms) dict.terms.insert(term);
    return dict;
}

WeatherDictionary WeatherDictionary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read dictionary " + path);
    WeatherDictionary dict;
    std::string line;
    while (std::getline(in, line)) {
        std::string term = trim(line);
        if (term.empty() || term[0] == '#') continue;
        std::transform(term.begin(), term.end(), term.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        dict.terms.insert(term);
    }
    if (dict.terms.empty()) throw ValidationError("empty dictionary " + path);
    return dict;
}

bool WeatherDictionary::matches(const std::string& token) const {
    if (terms.count(token)) return true;
    if (token.size() >= 2 && token.compare(token.size() - 2, 2, "'s") == 0 &&
        terms.count(token.substr(0, token.size() - 2)))
        return true;
    if (token.size() >= 1 && token.back() == '\'' &&
        terms.count(token.substr(0, token.size() - 1)))
        return true;
    return false;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        char c = text[i];
        if (is_letter(c)) {
            current += char(std::tolower(static_cast<unsigned char>(c)));
        } else if (c == '\'' && !current.empty() && i + 1 < n &&
                   is_letter(text[i + 1])) {
            current += c;
        } else {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_weather(const std::string& text, const WeatherDictionary& dict) {
    for (const auto& token : tokenize(text))
        if (dict.matches(token)) return true;
    return false;
}

OutcomeMode parse_outcome_mode(const std::string& name) {
    if (name == "share") return OutcomeMode::Share;
    if (name == "nonweather-count") return OutcomeMode::NonWeatherCount;
    if (name == "all-count") return OutcomeMode::AllCount;
    throw InvalidConfigError("unknown outcome mode: " + name);
}

std::vector<CityDayCounts> aggregate_posts(const std::vector<PostRecord>& posts,
                                           const WeatherDictionary& dict) {
    std::map<std::pair<std::string, std::string>, CityDayCounts> grouped;
    for (const auto& post : posts) {
        auto& cell = grouped[{post.city_id, post.date}];
        cell.city = post.city_id;
        cell.date = post.date;
        ++cell.total;
        if (is_weather(post.text, dict)) ++cell.weather;
    }
    std::vector<CityDayCounts> out;
    out.reserve(grouped.size());
    for (auto& [key, cell] : grouped) out.push_back(std::move(cell));
    return out;
}

void apply_outcomes(PanelFrame& frame, const std::vector<CityDayCounts>& counts,
                    OutcomeMode mode) {
    std::map<std::pair<std::string, std::string>, const CityDayCounts*> index;
    for (const auto& c : counts) index[{c.city, c.date}] = &c;

    const auto& city = frame.cat("city");
    const auto& day = frame.cat("day");
    auto& raw = frame.numeric["outcome_raw"];
    for (std::size_t i = 0; i < frame.rows; ++i) {
        auto it = index.find({city.levels[std::size_t(city.codes[i])],
                              day.levels[std::size_t(day.codes[i])]});
        const CityDayCounts* c = it == index.end() ? nullptr : it->second;
        switch (mode) {
        case OutcomeMode::Share: raw[i] = c ? c->share() : 0.0; break;
        case OutcomeMode::NonWeatherCount: raw[i] = c ? double(c->nonweather()) : 0.0; break;
        case OutcomeMode::AllCount: raw[i] = c ? double(c->total) : 0.0; break;
        }
    }
    frame.validated = false;
}

std::vector<PostRecord> read_posts_csv(const std::string& path) {
    CsvTable csv = read_csv(path);
    int c_text = csv.column_index("text");
    int c_city = csv.column_index("city_id");
    int c_date = csv.column_index("date");
    int c_user = csv.column_index("user_id");
    if (c_text < 0) throw MissingColumnError("text");
    if (c_city < 0) throw MissingColumnError("city_id");
    if (c_date < 0) throw MissingColumnError("date");

    std::vector<PostRecord> posts;
    posts.reserve(csv.rows.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        PostRecord post;
        post.text = row[std::size_t(c_text)];
        if (trim(post.text).empty())
            throw ParseError(i + 1, "text", post.text);
        post.city_id = trim(row[std::size_t(c_city)]);
        post.date = trim(row[std::size_t(c_date)]);
        if (c_user >= 0) post.user_id = trim(row[std::size_t(c_user)]);
        posts.push_back(std::move(post));
    }
    return posts;
}

void write_posts_csv(const std::vector<PostRecord>& posts,
                     const std::string& path, const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    w.row({"text", "city_id", "date", "user_id"});
    for (const auto& p : posts) w.row({p.text, p.city_id, p.date, p.user_id});
}

void write_counts_csv(const std::vector<CityDayCounts>& counts,
                      const std::string& path, const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    w.row({"city", "date", "weather_count", "nonweather_count", "total_count", "share"});
    for (const auto& c : counts)
        w.row({c.city, c.date, std::to_string(c.weather),
               std::to_string(c.nonweather()), std::to_string(c.total),
               format_double(c.share())});
}

} // namespace panelfx
