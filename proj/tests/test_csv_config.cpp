#include <doctest.h>

#include "panelfx/config.hpp"
#include "panelfx/csv.hpp"
#include "panelfx/dates.hpp"
#include "panelfx/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace panelfx;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    std::string path = "/tmp/panelfx_test_" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("csv round trip with quoting") {
    std::ostringstream buf;
    CsvWriter w(buf);
    w.comment("manifest: deadbeef");
    w.row({"city", "note"});
    w.row({"a,b", "say \"hi\""});
    w.row({"line\nbreak", "plain"});

    std::string path = write_temp("roundtrip.csv", buf.str());
    CsvTable t = read_csv(path);
    REQUIRE(t.header.size() == 2);
    CHECK(t.header[0] == "city");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "a,b");
    CHECK(t.rows[0][1] == "say \"hi\"");
    CHECK(t.rows[1][0] == "line\nbreak");
    CHECK(t.column_index("note") == 1);
    CHECK(t.column_index("absent") == -1);
    std::remove(path.c_str());
}

TEST_CASE("csv leading comment lines are skipped") {
    std::string path = write_temp("comments.csv",
                                  "# one\n# two\nx,y\n1,2\n");
    CsvTable t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "2");
    std::remove(path.c_str());
}

TEST_CASE("csv empty file yields an empty table") {
    std::string path = write_temp("empty.csv", "");
    CsvTable t = read_csv(path);
    CHECK(t.header.empty());
    CHECK(t.rows.empty());
    std::remove(path.c_str());
}

TEST_CASE("format_double round trips exactly") {
    for (double v : {0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 12345.6789e-7,
                     101.0, 2.5758293035489004}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("format_fixed pins decimals") {
    CHECK(format_fixed(4.456, 2) == "4.46");
    CHECK(format_fixed(-0.5, 1) == "-0.5");
}

TEST_CASE("fnv hash is stable and sensitive") {
    CHECK(bytes_hash_hex("") == "cbf29ce484222325");
    CHECK(bytes_hash_hex("a") != bytes_hash_hex("b"));
    CHECK(bytes_hash_hex("abc").size() == 16);
    std::string path = write_temp("hash.bin", "abc");
    CHECK(file_hash_hex(path) == bytes_hash_hex("abc"));
    std::remove(path.c_str());
}

TEST_CASE("config parses, trims, accumulates") {
    KeyValueConfig cfg = KeyValueConfig::parse(
        "# comment\n"
        "a = 1\n"
        "  b=  two words  \n"
        "a = 3\n"
        "\n"
        "c.d = -2.5\n");
    CHECK(cfg.has("a"));
    CHECK(*cfg.get("a") == "3");
    CHECK(cfg.get_all("a") == std::vector<std::string>{"1", "3"});
    CHECK(cfg.get_or("b", "") == "two words");
    CHECK(cfg.get_double_or("c.d", 0.0) == -2.5);
    CHECK(cfg.get_long_or("a", 0) == 3);
    CHECK(cfg.get_long_or("missing", 7) == 7);
    CHECK(!cfg.get("missing").has_value());
}

TEST_CASE("config file load matches parse") {
    std::string path = write_temp("cfg.txt", "k = v\n");
    KeyValueConfig cfg = KeyValueConfig::load(path);
    CHECK(cfg.get_or("k", "") == "v");
    std::remove(path.c_str());
}

TEST_CASE("trim and split") {
    CHECK(trim("  x ") == "x");
    CHECK(trim("") == "");
    CHECK(split("a,b,,c", ',') ==
          std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split("lone", ',') == std::vector<std::string>{"lone"});
}

TEST_CASE("date codes round trip") {
    CHECK(parse_date("1970-01-01") == 0);
    CHECK(parse_date("2019-01-01") == 17897);
    CHECK(iso_date(17897) == "2019-01-01");
    for (std::int64_t d : {-1000, 0, 17897, 20000})
        CHECK(parse_date(iso_date(d)) == d);
    // leap day
    CHECK(iso_date(parse_date("2020-02-29")) == "2020-02-29");
    CHECK(parse_date("2020-03-01") - parse_date("2020-02-28") == 2);
}

TEST_CASE("month codes group calendar months") {
    CHECK(month_code(parse_date("2020-01-15")) ==
          month_code(parse_date("2020-01-31")));
    CHECK(month_code(parse_date("2020-01-31")) + 1 ==
          month_code(parse_date("2020-02-01")));
    CHECK(month_code(parse_date("2020-12-31")) + 1 ==
          month_code(parse_date("2021-01-01")));
}
