#include <catch2/catch_amalgamated.hpp>

#include "sepcf/series.hpp"

using namespace sepcf;

TEST_CASE("ISO-8601 parse matches known epochs") {
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601("1970-01-02T03:04:05Z") == 97445);
    CHECK(parse_iso8601("2000-03-01T12:30:45Z") == 951913845);
    CHECK(parse_iso8601("2025-01-01T00:00:00Z") == 1735689600);
    CHECK(parse_iso8601("2025-01-01 00:00:00") == 1735689600);
}

TEST_CASE("ISO-8601 format round-trips and is canonical") {
    CHECK(format_iso8601(0) == "1970-01-01T00:00:00Z");
    CHECK(format_iso8601(951913845) == "2000-03-01T12:30:45Z");
    for (std::int64_t t : {0L, 97445L, 951913845L, 1735689600L, 1735690200L})
        CHECK(parse_iso8601(format_iso8601(t)) == t);
}

TEST_CASE("ISO-8601 parse rejects malformed input") {
    CHECK_THROWS_AS(parse_iso8601(""), SchemaError);
    CHECK_THROWS_AS(parse_iso8601("2025-01-01"), SchemaError);
    CHECK_THROWS_AS(parse_iso8601("2025-13-01T00:00:00Z"), SchemaError);
    CHECK_THROWS_AS(parse_iso8601("2025-01-01T25:00:00Z"), SchemaError);
    CHECK_THROWS_AS(parse_iso8601("2025-01-01X00:00:00Z"), SchemaError);
}

TEST_CASE("format_double emits shortest round-trip form") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.5) == "2.5");
    CHECK(format_double(-3.25) == "-3.25");
    CHECK(format_double(1e-9) == "1e-09");
    CHECK(format_double(1234.5678) == "1234.5678");
}

TEST_CASE("channel layout indexes channel-major") {
    ChannelLayout layout{3, 4, {"P3", "P5", "P7"}};
    layout.validate();
    CHECK(layout.dimension() == 12);
    CHECK(layout.feature_index(0, 0) == 0);
    CHECK(layout.feature_index(0, 3) == 3);
    CHECK(layout.feature_index(1, 0) == 4);
    CHECK(layout.feature_index(2, 3) == 11);
}

TEST_CASE("channel layout validation") {
    CHECK_THROWS_AS((ChannelLayout{0, 4, {}}.validate()), InvalidConfig);
    CHECK_THROWS_AS((ChannelLayout{2, 0, {"a", "b"}}.validate()), InvalidConfig);
    CHECK_THROWS_AS((ChannelLayout{2, 4, {"a"}}.validate()), InvalidConfig);
    CHECK_THROWS_AS((ChannelLayout{2, 4, {"a", "a"}}.validate()), InvalidConfig);
}

TEST_CASE("feature names are 1-based per window") {
    CHECK(feature_name("P5", 1) == "P5_w2");
    ChannelLayout layout{2, 2, {"P3", "P5"}};
    CHECK(feature_names(layout) ==
          std::vector<std::string>{"P3_w1", "P3_w2", "P5_w1", "P5_w2"});
}

TEST_CASE("flux series accessors and validation") {
    FluxSeries s(1000, 60, {"P3", "P5"}, {{10.0, 11.0, 12.0}, {1.0, 2.0, 3.0}});
    CHECK(s.channels() == 2);
    CHECK(s.samples() == 3);
    CHECK(s.time_at(2) == 1120);
    CHECK(s.value(1, 1) == 2.0);
    CHECK_FALSE(s.is_missing(0, 0));
    CHECK(s.channel_index("P5") == 1);
    CHECK_THROWS_AS(s.channel_index("P9"), InvalidConfig);

    CHECK_THROWS_AS(FluxSeries(0, 0, {"a"}, {{1.0}}), InvalidConfig);
    CHECK_THROWS_AS(FluxSeries(0, 60, {"a", "b"}, {{1.0}}), InvalidConfig);
    CHECK_THROWS_AS(FluxSeries(0, 60, {"a", "b"}, {{1.0}, {1.0, 2.0}}), InvalidConfig);
    CHECK_THROWS_AS(FluxSeries(0, 60, {"a", "a"}, {{1.0}, {1.0}}), InvalidConfig);
}

TEST_CASE("missing mask permits non-finite placeholders") {
    FluxSeries s(0, 60, {"P3"}, {{1.0, std::nan(""), 3.0}}, {{false, true, false}});
    CHECK(s.is_missing(0, 1));
    CHECK_THROWS_AS(FluxSeries(0, 60, {"P3"}, {{1.0, std::nan("")}}), InvalidConfig);
}

TEST_CASE("slice_series keeps values, mask, and clock aligned") {
    FluxSeries s(1000, 60, {"P3", "P5"}, {{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}},
                 {{false, true, false, false, false}, {false, false, false, true, false}});
    const FluxSeries cut = slice_series(s, {1, 4});
    CHECK(cut.samples() == 3);
    CHECK(cut.start_time() == 1060);
    CHECK(cut.channel(0) == std::vector<double>{2, 3, 4});
    CHECK(cut.channel(1) == std::vector<double>{7, 8, 9});
    CHECK(cut.is_missing(0, 0));
    CHECK(cut.is_missing(1, 2));
    CHECK_FALSE(cut.is_missing(0, 1));
    CHECK_THROWS_AS(slice_series(s, {3, 6}), InvalidConfig);
    CHECK_THROWS_AS(slice_series(s, {2, 2}), InvalidConfig);
}

TEST_CASE("sliding grid tiles the series") {
    const auto g = WindowGrid::sliding(12, 4, 4);
    REQUIRE(g.count() == 3);
    CHECK(g.window(0).start == 0);
    CHECK(g.window(0).end == 4);
    CHECK(g.window(2).start == 8);
    CHECK(g.max_end() == 12);
    CHECK_FALSE(g.overlapping());
}

TEST_CASE("sliding grid with overlap") {
    const auto g = WindowGrid::sliding(10, 4, 2);
    REQUIRE(g.count() == 4);
    CHECK(g.window(1).start == 2);
    CHECK(g.window(3).end == 10);
    CHECK(g.overlapping());
}

TEST_CASE("window grid validation") {
    CHECK_THROWS_AS(WindowGrid::sliding(3, 4, 1), InvalidConfig);
    CHECK_THROWS_AS(WindowGrid::sliding(10, 0, 1), InvalidConfig);
    CHECK_THROWS_AS(WindowGrid({{2, 2}}, 1, 1), InvalidConfig);
    CHECK_THROWS_AS(WindowGrid({{4, 8}, {0, 4}}, 4, 4), InvalidConfig);
    CHECK_THROWS_AS(WindowGrid({}, 4, 4), InvalidConfig);
}
