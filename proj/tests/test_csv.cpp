#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pansig/csv.hpp"

using namespace pansig;

TEST_CASE("read_csv parses header and rows", "[csv]") {
    std::istringstream in("a,b,c\n1,2,3\n4,5,6\n");
    const CsvTable t = read_csv(in, "test");
    REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][2] == "6");
    CHECK(t.col("b") == 1);
    CHECK(t.col("missing") == -1);
    CHECK_THROWS_AS(t.require_col("missing"), DataError);
}

TEST_CASE("read_csv handles quoting, CRLF and blank lines", "[csv]") {
    std::istringstream in("name,note\r\n\"Smith, John\",\"says \"\"hi\"\"\"\r\n\nplain,x\n");
    const CsvTable t = read_csv(in, "test");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "Smith, John");
    CHECK(t.rows[0][1] == "says \"hi\"");
    CHECK(t.rows[1][0] == "plain");
}

TEST_CASE("read_csv rejects ragged rows and unterminated quotes", "[csv]") {
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged, "test"), DataError);
    std::istringstream unterminated("a,b\n\"oops,2\n");
    CHECK_THROWS_AS(read_csv(unterminated, "test"), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty, "test"), DataError);
}

TEST_CASE("csv writer escapes and round-trips", "[csv]") {
    const auto path = std::filesystem::temp_directory_path() / "pansig_csv_test.csv";
    {
        CsvWriter w(path);
        w.row({"name", "value"});
        w.row({"comma, inside", "quote \" inside"});
        w.row({"newline\ninside", "plain"});
        w.close();
    }
    const CsvTable t = read_csv_file(path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "comma, inside");
    CHECK(t.rows[0][1] == "quote \" inside");
    CHECK(t.rows[1][0] == "newline\ninside");
    std::filesystem::remove(path);
}
