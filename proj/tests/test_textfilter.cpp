#include <doctest.h>

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/panel.hpp"
#include "panelfx/rng.hpp"
#include "panelfx/textfilter.hpp"

#include "oracles.hpp"

#include <cstdio>
#include <fstream>

using namespace panelfx;

TEST_CASE("tokenizer folds case and strips punctuation") {
    CHECK(tokenize("SNOWMAGEDDON!! in NYC") ==
          std::vector<std::string>{"snowmageddon", "in", "nyc"});
    CHECK(tokenize("nor'easter's coming") ==
          std::vector<std::string>{"nor'easter's", "coming"});
    CHECK(tokenize("rock 'n' roll") ==
          std::vector<std::string>{"rock", "n", "roll"});
    CHECK(tokenize("dogs' toys") == std::vector<std::string>{"dogs", "toys"});
    CHECK(tokenize("a1b2c3") == std::vector<std::string>{"a", "b", "c"});
    CHECK(tokenize("...") == std::vector<std::string>{});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("it's") == std::vector<std::string>{"it's"});
}

TEST_CASE("dictionary matches exact terms and possessives") {
    WeatherDictionary dict = WeatherDictionary::builtin();
    CHECK(dict.matches("blizzard"));
    CHECK(dict.matches("blizzards"));
    CHECK(dict.matches("blizzard's"));
    CHECK(dict.matches("storms'"));
    CHECK(dict.matches("nor'easter"));
    CHECK(dict.matches("nor'easter's"));
    CHECK(!dict.matches("blizzarding"));
    CHECK(!dict.matches("chess"));
    CHECK(!dict.matches(""));

    CHECK(is_weather("SNOWMAGEDDON!! in NYC", dict));
    CHECK(is_weather("the blizzard's aftermath", dict));
    CHECK(!is_weather("lovely evening for chess", dict));
    CHECK(!is_weather("", dict));
}

TEST_CASE("every builtin term survives its own tokenizer") {
    WeatherDictionary dict = WeatherDictionary::builtin();
    CHECK(dict.terms.size() > 200);
    for (const auto& term : dict.terms) {
        auto toks = tokenize(term);
        REQUIRE(toks.size() == 1);
        CHECK(toks[0] == term);
        CHECK(dict.matches(toks[0]));
    }
}

TEST_CASE("tokenizer and classifier agree with the brute-force scan") {
    Rng rng(8101);
    const std::vector<std::string> words = {
        "blizzard", "rain",  "chess",  "xyzzy",   "nor'easter",
        "kitten",   "SNOW",  "Sunny",  "pizza",   "windchill"};
    const std::string seps = " ,.!?;:-_0123456789@#\"'";

    for (int trial = 0; trial < 60; ++trial) {
        std::string text;
        int pieces = 1 + int(rng.below(8));
        for (int p = 0; p < pieces; ++p) {
            if (rng.bernoulli(0.7)) {
                text += words[rng.below(words.size())];
                if (rng.bernoulli(0.2)) text += "'s";
            }
            int nsep = int(rng.below(3));
            for (int s = 0; s <= nsep; ++s)
                text += seps[rng.below(seps.size())];
        }
        CAPTURE(text);
        CHECK(tokenize(text) == oracle::brute_tokens(text));
        CHECK(is_weather(text, WeatherDictionary::builtin()) ==
              oracle::brute_is_weather(text, WeatherDictionary::builtin()));
    }
}

TEST_CASE("aggregation counts weather posts per city-day") {
    WeatherDictionary dict = WeatherDictionary::builtin();
    std::vector<PostRecord> posts;
    for (int i = 0; i < 96; ++i)
        posts.push_back({"thinking about lunch", "a", "2019-01-01", ""});
    for (int i = 0; i < 4; ++i)
        posts.push_back({"what a blizzard out there", "a", "2019-01-01", ""});
    posts.push_back({"rainy rainy day", "a", "2019-01-02", ""});
    posts.push_back({"meeting notes", "b", "2019-01-01", ""});

    std::vector<CityDayCounts> counts = aggregate_posts(posts, dict);
    REQUIRE(counts.size() == 3);
    // sorted by (city, date)
    CHECK(counts[0].city == "a");
    CHECK(counts[0].date == "2019-01-01");
    CHECK(counts[0].total == 100);
    CHECK(counts[0].weather == 4);
    CHECK(counts[0].nonweather() == 96);
    CHECK(counts[0].share() == doctest::Approx(0.04));
    CHECK(counts[1].date == "2019-01-02");
    CHECK(counts[1].weather == 1);
    CHECK(counts[2].city == "b");
    CHECK(counts[2].weather == 0);
    CHECK(counts[2].share() == 0.0);
}

namespace {

PanelFrame two_city_frame() {
    RawPanel raw;
    for (const char* city : {"a", "b"})
        for (const char* date : {"2019-01-01", "2019-01-02", "2019-01-03"}) {
            raw.city.push_back(city);
            raw.date.push_back(date);
            raw.outcome_raw.push_back(50.0);
            raw.tmax.push_back(10.0);
            raw.precip.push_back(0.0);
            raw.trange.push_back(8.0);
            raw.cloud.push_back(40.0);
            raw.humidity.push_back(60.0);
        }
    return build_frame(raw);
}

} // namespace

TEST_CASE("classified counts replace the panel outcome") {
    WeatherDictionary dict = WeatherDictionary::builtin();
    std::vector<PostRecord> posts;
    for (int i = 0; i < 3; ++i)
        posts.push_back({"snow day", "a", "2019-01-01", ""});
    posts.push_back({"quiet afternoon", "a", "2019-01-01", ""});
    posts.push_back({"quiet afternoon", "b", "2019-01-02", ""});
    std::vector<CityDayCounts> counts = aggregate_posts(posts, dict);

    PanelFrame share = two_city_frame();
    apply_outcomes(share, counts, OutcomeMode::Share);
    CHECK(!share.validated);
    CHECK(share.num("outcome_raw")[0] == doctest::Approx(0.75));
    CHECK(share.num("outcome_raw")[4] == 0.0); // b, day 2: no weather posts
    CHECK(share.num("outcome_raw")[1] == 0.0); // no posts at all
    validate(share, OutcomeTransform::Level);
    CHECK(share.rows == 6); // level outcomes keep the zero rows
    CHECK(share.num("outcome")[0] == doctest::Approx(0.75));

    PanelFrame nonw = two_city_frame();
    apply_outcomes(nonw, counts, OutcomeMode::NonWeatherCount);
    CHECK(nonw.num("outcome_raw")[0] == 1.0);
    CHECK(nonw.num("outcome_raw")[4] == 1.0);

    PanelFrame all = two_city_frame();
    apply_outcomes(all, counts, OutcomeMode::AllCount);
    CHECK(all.num("outcome_raw")[0] == 4.0);
    CHECK(all.num("outcome_raw")[4] == 1.0);
    CHECK(all.num("outcome_raw")[5] == 0.0);
}

TEST_CASE("outcome modes parse by name") {
    CHECK(parse_outcome_mode("share") == OutcomeMode::Share);
    CHECK(parse_outcome_mode("nonweather-count") == OutcomeMode::NonWeatherCount);
    CHECK(parse_outcome_mode("all-count") == OutcomeMode::AllCount);
    CHECK_THROWS_AS(parse_outcome_mode("bogus"), InvalidConfigError);
}

TEST_CASE("posts survive a CSV round trip") {
    std::string path = "/tmp/panelfx_test_posts.csv";
    std::vector<PostRecord> posts = {
        {"hello, \"world\"", "nyc", "2019-01-01", "u1"},
        {"line\nbreak", "boston", "2019-01-02", ""},
        {"plain", "nyc", "2019-01-03", "u2"},
    };
    write_posts_csv(posts, path, "abc123");
    std::vector<PostRecord> back = read_posts_csv(path);
    REQUIRE(back.size() == posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        CHECK(back[i].text == posts[i].text);
        CHECK(back[i].city_id == posts[i].city_id);
        CHECK(back[i].date == posts[i].date);
        CHECK(back[i].user_id == posts[i].user_id);
    }
    std::remove(path.c_str());

    {
        std::ofstream out(path, std::ios::binary);
        out << "text,city_id,date\n";
        out << ",nyc,2019-01-01\n";
    }
    CHECK_THROWS_AS(read_posts_csv(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("count tables write with stable formatting") {
    std::string path = "/tmp/panelfx_test_counts.csv";
    std::vector<CityDayCounts> counts = {{"a", "2019-01-01", 1, 4},
                                         {"b", "2019-01-02", 0, 0}};
    write_counts_csv(counts, path, "feed1");
    CsvTable csv = read_csv(path);
    REQUIRE(csv.header.size() == 6);
    CHECK(csv.header[0] == "city");
    CHECK(csv.header[5] == "share");
    REQUIRE(csv.rows.size() == 2);
    CHECK(csv.rows[0][2] == "1");
    CHECK(csv.rows[0][3] == "3");
    CHECK(csv.rows[0][4] == "4");
    CHECK(csv.rows[0][5] == "0.25");
    CHECK(csv.rows[1][5] == "0");
    std::remove(path.c_str());
}

TEST_CASE("dictionaries load from plain term lists") {
    std::string path = "/tmp/panelfx_test_dict.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "# local additions\n";
        out << "Blizzard\n";
        out << "  RAIN  \n";
        out << "\n";
        out << "nor'easter\n";
    }
    WeatherDictionary dict = WeatherDictionary::load(path);
    CHECK(dict.terms.size() == 3);
    CHECK(dict.matches("blizzard"));
    CHECK(dict.matches("rain"));
    CHECK(dict.matches("nor'easter"));
    CHECK(!dict.matches("snow"));
    std::remove(path.c_str());

    {
        std::ofstream out(path, std::ios::binary);
        out << "# nothing but comments\n";
    }
    CHECK_THROWS_AS(WeatherDictionary::load(path), ValidationError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(WeatherDictionary::load("/tmp/panelfx_no_such_dict.txt"),
                    ValidationError);
}
