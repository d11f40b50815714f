#include <doctest.h>

#include "panelfx/dates.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/panel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace panelfx;

namespace {

RawPanel two_city_panel() {
    RawPanel raw;
    auto push = [&](const char* city, const char* date, double posts) {
        raw.city.push_back(city);
        raw.date.push_back(date);
        raw.outcome_raw.push_back(posts);
        raw.tmax.push_back(10.0);
        raw.precip.push_back(0.0);
        raw.trange.push_back(8.0);
        raw.cloud.push_back(50.0);
        raw.humidity.push_back(60.0);
    };
    push("b", "2020-01-30", 100);
    push("b", "2020-01-31", 120);
    push("b", "2020-02-01", 140);
    push("a", "2020-01-30", 200);
    push("a", "2020-01-31", 210);
    push("a", "2020-02-01", 220);
    return raw;
}

std::string write_temp(const std::string& name, const std::string& body) {
    std::string path = "/tmp/panelfx_test_" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("build_frame codes in first-appearance order") {
    PanelFrame f = build_frame(two_city_panel());
    CHECK(f.rows == 6);
    const auto& city = f.cat("city");
    CHECK(city.levels == std::vector<std::string>{"b", "a"});
    CHECK(city.codes[0] == 0);
    CHECK(city.codes[3] == 1);
    const auto& day = f.cat("day");
    CHECK(day.level_count() == 3);
    CHECK(day.codes[0] == 0);
    CHECK(day.codes[3] == 0); // same date, same code across cities
    CHECK(f.num("date_code")[0] == double(parse_date("2020-01-30")));
    CHECK(f.fe_dims == std::vector<std::string>{"day", "city_month"});
    CHECK(f.cluster_dims == std::vector<std::string>{"city", "day"});
}

TEST_CASE("city_month splits on calendar month within city") {
    PanelFrame f = build_frame(two_city_panel());
    const auto& cm = f.cat("city_month");
    // two cities x two months
    CHECK(cm.level_count() == 4);
    CHECK(cm.codes[0] == cm.codes[1]);  // b Jan 30, b Jan 31
    CHECK(cm.codes[1] != cm.codes[2]);  // b Jan vs b Feb
    CHECK(cm.codes[0] != cm.codes[3]);  // b Jan vs a Jan
}

TEST_CASE("validate fills log outcome and drops zero counts") {
    RawPanel raw = two_city_panel();
    raw.outcome_raw[1] = 0.0;
    PanelFrame f = build_frame(raw);
    ValidationReport rep = validate(f);
    CHECK(rep.dropped_zero_outcome == 1);
    CHECK(rep.dropped_missing == 0);
    CHECK(f.rows == 5);
    CHECK(f.validated);
    CHECK(f.num("outcome")[0] == doctest::Approx(std::log(100.0)));
    // codes re-densified: the dropped row was the only 2020-01-31 b row,
    // but a's row for that date remains, so day still has 3 levels
    CHECK(f.cat("day").level_count() == 3);
}

TEST_CASE("validate drops rows with missing covariates") {
    RawPanel raw = two_city_panel();
    raw.tmax[2] = std::nan("");
    raw.humidity[4] = std::nan("");
    PanelFrame f = build_frame(raw);
    ValidationReport rep = validate(f);
    CHECK(rep.dropped_missing == 2);
    CHECK(f.rows == 4);
}

TEST_CASE("validate keeps zeros under the level transform") {
    RawPanel raw = two_city_panel();
    raw.outcome_raw[0] = 0.0;
    PanelFrame f = build_frame(raw);
    ValidationReport rep = validate(f, OutcomeTransform::Level);
    CHECK(rep.dropped_zero_outcome == 0);
    CHECK(f.rows == 6);
    CHECK(f.num("outcome")[0] == 0.0);
    CHECK(f.num("outcome")[1] == 120.0);
}

TEST_CASE("validate rejects negative counts") {
    RawPanel raw = two_city_panel();
    raw.outcome_raw[3] = -5.0;
    PanelFrame f = build_frame(raw);
    CHECK_THROWS_AS(validate(f), ValidationError);
}

TEST_CASE("validate throws when nothing survives") {
    RawPanel raw = two_city_panel();
    for (auto& v : raw.outcome_raw) v = 0.0;
    PanelFrame f = build_frame(raw);
    CHECK_THROWS_AS(validate(f), AllRowsDroppedError);
}

TEST_CASE("validate reports singleton levels") {
    RawPanel raw = two_city_panel();
    PanelFrame f = build_frame(raw);
    ValidationReport rep = validate(f);
    CHECK(rep.fe_level_counts.at("day") == 3);
    CHECK(rep.singleton_fe_levels.at("day") == 0);
    // city_month b-Feb and a-Feb each hold a single row
    CHECK(rep.singleton_fe_levels.at("city_month") == 2);
}

TEST_CASE("load_panel honors the schema mapping") {
    std::string path = write_temp(
        "schema.csv",
        "town,when,n,t,p,r,c,h\n"
        "x,2020-05-01,12,20,0,7,40,55\n"
        "y,2020-05-01,9,22,1.5,9,60,70\n");
    KeyValueConfig cfg = KeyValueConfig::parse(
        "schema.city = town\nschema.date = when\nschema.posts = n\n"
        "schema.tmax = t\nschema.precip = p\nschema.trange = r\n"
        "schema.cloud = c\nschema.humidity = h\n");
    PanelFrame f = load_panel(path, Schema::from_config(cfg));
    CHECK(f.rows == 2);
    CHECK(f.cat("city").levels == std::vector<std::string>{"x", "y"});
    CHECK(f.num("outcome_raw")[1] == 9.0);
    std::remove(path.c_str());
}

TEST_CASE("load_panel errors: missing column, bad value, header only") {
    std::string p1 = write_temp("mc.csv", "city,date\nx,2020-01-01\n");
    CHECK_THROWS_AS(load_panel(p1, Schema::defaults()), MissingColumnError);
    std::remove(p1.c_str());

    std::string p2 = write_temp(
        "bad.csv",
        "city,date,posts,tmax,precip,trange,cloud,humidity\n"
        "x,2020-01-01,ten,20,0,7,40,55\n");
    CHECK_THROWS_AS(load_panel(p2, Schema::defaults()), ParseError);
    std::remove(p2.c_str());

    std::string p3 = write_temp(
        "hdr.csv", "city,date,posts,tmax,precip,trange,cloud,humidity\n");
    CHECK_THROWS_AS(load_panel(p3, Schema::defaults()), EmptyFileError);
    std::remove(p3.c_str());
}

TEST_CASE("empty fields become missing values") {
    std::string path = write_temp(
        "gaps.csv",
        "city,date,posts,tmax,precip,trange,cloud,humidity\n"
        "x,2020-01-01,12,,0,7,40,55\n"
        "x,2020-01-02,13,18,0,7,40,55\n");
    PanelFrame f = load_panel(path, Schema::defaults());
    CHECK(std::isnan(f.num("tmax")[0]));
    ValidationReport rep = validate(f);
    CHECK(rep.dropped_missing == 1);
    CHECK(f.rows == 1);
    std::remove(path.c_str());
}

TEST_CASE("user column switches the fixed-effect layout") {
    RawPanel raw = two_city_panel();
    raw.user = {"u1", "u2", "u1", "u3", "u2", "u3"};
    PanelFrame f = build_frame(raw);
    CHECK(f.fe_dims == std::vector<std::string>{"user", "day", "city_month"});
    CHECK(f.cat("user").level_count() == 3);
}

TEST_CASE("write then load round trips the frame") {
    PanelFrame f = build_frame(two_city_panel());
    validate(f);
    std::string path = "/tmp/panelfx_test_rt_panel.csv";
    write_panel_csv(f, path, "cafe");
    PanelFrame g = load_panel(path, Schema::defaults());
    validate(g);
    REQUIRE(g.rows == f.rows);
    CHECK(g.cat("city").levels == f.cat("city").levels);
    for (std::size_t i = 0; i < f.rows; ++i) {
        CHECK(g.num("outcome_raw")[i] == f.num("outcome_raw")[i]);
        CHECK(g.num("tmax")[i] == f.num("tmax")[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("concat_frames stacks and re-codes") {
    RawPanel a = two_city_panel();
    RawPanel b = two_city_panel();
    for (auto& c : a.city) c += "@p1";
    for (auto& c : b.city) c += "@p2";
    PanelFrame fa = build_frame(a);
    PanelFrame fb = build_frame(b);
    validate(fa);
    validate(fb);
    PanelFrame f = concat_frames(fa, fb);
    CHECK(f.rows == 12);
    CHECK(f.cat("city").level_count() == 4);
    CHECK(f.cat("day").level_count() == 3); // same dates collapse
    CHECK(!f.validated);                    // pooling rebuilds the frame
    validate(f);
    CHECK(f.num("outcome")[6] == doctest::Approx(std::log(100.0)));
}
