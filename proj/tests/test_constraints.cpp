#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "sepcf/constraints.hpp"
#include "sepcf/rng.hpp"

using namespace sepcf;

namespace {

// Three channels, one window, generous bounds.
PhysicsSpec spec_3x1() {
    PhysicsSpec s;
    s.layout = {3, 1, {"P3", "P5", "P7"}};
    s.ordering_groups = {{0, 1, 2}};
    s.bounds = {{0, 100}, {0, 100}, {0, 100}};
    s.smoothness_tolerance = {10, 10, 10};
    s.validate();
    return s;
}

// Three channels, two windows; features channel-major.
PhysicsSpec spec_3x2() {
    PhysicsSpec s;
    s.layout = {3, 2, {"P3", "P5", "P7"}};
    s.ordering_groups = {{0, 2, 4}, {1, 3, 5}};
    s.bounds.assign(6, {0, 100});
    s.smoothness_tolerance = {10, 10, 10};
    s.validate();
    return s;
}

}  // namespace

TEST_CASE("ordering penalty counts adjacent-pair violations per window") {
    const auto s1 = spec_3x1();
    CHECK(ordering_penalty(std::vector<double>{9, 5, 1}, s1) == 0);
    CHECK(ordering_penalty(std::vector<double>{5, 7, 1}, s1) == 1);

    const auto s2 = spec_3x2();
    CHECK(ordering_penalty(std::vector<double>{5, 1, 7, 2, 1, 3}, s2) == 3);
    CHECK(ordering_penalty(std::vector<double>{9, 3, 5, 2, 1, 1}, s2) == 0);
    CHECK_THROWS_AS(ordering_penalty(std::vector<double>{1, 2}, s1), DimensionMismatch);
}

TEST_CASE("equal adjacent values satisfy the ordering") {
    CHECK(ordering_penalty(std::vector<double>{5, 5, 5}, spec_3x1()) == 0);
}

TEST_CASE("range penalty counts features outside inclusive bounds") {
    const auto s = spec_3x1();
    CHECK(range_penalty(std::vector<double>{0, 0, 0}, s) == 0);
    CHECK(range_penalty(std::vector<double>{100, 100, 100}, s) == 0);
    CHECK(range_penalty(std::vector<double>{150, 50, 50}, s) == 1);
    CHECK(range_penalty(std::vector<double>{150, -1, 101}, s) == 3);
}

TEST_CASE("magnitude penalty variants sum overshoot distances") {
    const auto s = spec_3x1();
    CHECK(ordering_penalty_magnitude(std::vector<double>{5, 7, 1}, s) == 2.0);
    CHECK(ordering_penalty_magnitude(std::vector<double>{9, 5, 1}, s) == 0.0);
    CHECK(range_penalty_magnitude(std::vector<double>{150, 50, 50}, s) == 50.0);
    CHECK(range_penalty_magnitude(std::vector<double>{-10, 50, 103}, s) == 13.0);
}

TEST_CASE("smoothness counts adjacent-window jumps beyond tolerance") {
    PhysicsSpec s;
    s.layout = {1, 2, {"P3"}};
    s.ordering_groups = {{0}, {1}};
    s.bounds.assign(2, {0, 100});
    s.smoothness_tolerance = {2};
    s.validate();
    CHECK(smoothness_violations(std::vector<double>{1, 5}, s) == 1);
    CHECK(smoothness_violations(std::vector<double>{3, 3}, s) == 0);

    PhysicsSpec s3;
    s3.layout = {1, 3, {"P3"}};
    s3.ordering_groups = {{0}, {1}, {2}};
    s3.bounds.assign(3, {0, 100});
    s3.smoothness_tolerance = {2};
    s3.validate();
    CHECK(smoothness_violations(std::vector<double>{1, 2.5, 4}, s3) == 0);
    CHECK(smoothness_violations(std::vector<double>{1, 5, 4}, s3) == 1);
}

TEST_CASE("rolling mean smooths within channels only") {
    ChannelLayout one{1, 3, {"P3"}};
    CHECK(rolling_mean_smooth(std::vector<double>{1, 4, 7}, 3, one) ==
          std::vector<double>{2.5, 4, 5.5});
    CHECK(rolling_mean_smooth(std::vector<double>{1, 4, 7}, 1, one) ==
          std::vector<double>{1, 4, 7});
    CHECK(rolling_mean_smooth(std::vector<double>{5, 5, 5}, 3, one) ==
          std::vector<double>{5, 5, 5});

    ChannelLayout two{2, 3, {"P3", "P5"}};
    const auto sm = rolling_mean_smooth(std::vector<double>{1, 4, 7, 100, 100, 100}, 3, two);
    CHECK(sm == std::vector<double>{2.5, 4, 5.5, 100, 100, 100});

    CHECK_THROWS_AS(rolling_mean_smooth(std::vector<double>{1, 2, 3}, 2, one), InvalidConfig);
    CHECK_THROWS_AS(rolling_mean_smooth(std::vector<double>{1, 2}, 3, one), DimensionMismatch);
}

TEST_CASE("fit_spec takes empirical min/max at margin zero") {
    ChannelLayout layout{1, 2, {"P3"}};
    std::vector<FeatureVector> train{{{0, 3}, {}, 0}, {{10, 7}, {}, 1}};
    const auto spec = fit_spec(train, layout);
    CHECK(spec.bounds[0].lo == 0.0);
    CHECK(spec.bounds[0].hi == 10.0);
    CHECK(spec.bounds[1].lo == 3.0);
    CHECK(spec.bounds[1].hi == 7.0);
    for (const auto& v : train) CHECK(range_penalty(v, spec) == 0);
}

TEST_CASE("fit_spec degenerates to point bounds for one instance") {
    ChannelLayout layout{1, 2, {"P3"}};
    const auto spec = fit_spec({FeatureVector{{4, 9}, {}, 0}}, layout);
    CHECK(spec.bounds[0].lo == 4.0);
    CHECK(spec.bounds[0].hi == 4.0);
    CHECK(spec.bounds[1].lo == 9.0);
    CHECK(spec.bounds[1].hi == 9.0);
}

TEST_CASE("fit_spec quantile margin interpolates order statistics") {
    ChannelLayout layout{1, 1, {"P3"}};
    std::vector<FeatureVector> train;
    for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) train.push_back({{v}, {}, 0});
    const auto spec = fit_spec(train, layout, {0.25, 1.5, false});
    CHECK(spec.bounds[0].lo == 2.0);
    CHECK(spec.bounds[0].hi == 4.0);
    CHECK(spec.quantile_margin == 0.25);
}

TEST_CASE("fit_spec widens bounds until the box respects channel ordering") {
    ChannelLayout layout{2, 1, {"P3", "P5"}};
    std::vector<FeatureVector> train{{{0, 3}, {}, 0}, {{5, 10}, {}, 1}};
    const auto spec = fit_spec(train, layout);
    CHECK(spec.bounds[0].hi >= spec.bounds[1].hi);
    CHECK(spec.bounds[0].lo <= spec.bounds[0].hi);
    CHECK(spec.bounds[1].lo <= spec.bounds[0].lo);
    CHECK(spec.bounds[0].hi == 10.0);
    CHECK(spec.bounds[1].lo == 0.0);
    for (const auto& v : train) CHECK(range_penalty(v, spec) == 0);
}

TEST_CASE("fit_spec smoothness tolerance follows the largest observed jump") {
    ChannelLayout layout{1, 2, {"P3"}};
    std::vector<FeatureVector> train{{{1, 4}, {}, 0}, {{2, 2}, {}, 1}};
    const auto spec = fit_spec(train, layout, {0.0, 1.5, false});
    CHECK(spec.smoothness_tolerance[0] == 4.5);

    const auto flat = fit_spec({FeatureVector{{3, 3}, {}, 0}}, layout);
    CHECK(flat.smoothness_tolerance[0] == 1.0);
}

TEST_CASE("fit_spec global mode shares one range per channel") {
    ChannelLayout layout{1, 2, {"P3"}};
    std::vector<FeatureVector> train{{{1, 5}, {}, 0}, {{2, 9}, {}, 1}};
    const auto spec = fit_spec(train, layout, {0.0, 1.5, true});
    CHECK(spec.bounds[0].lo == 1.0);
    CHECK(spec.bounds[0].hi == 9.0);
    CHECK(spec.bounds[1].lo == 1.0);
    CHECK(spec.bounds[1].hi == 9.0);
    CHECK(spec.global_per_channel);
}

TEST_CASE("fit_spec input validation") {
    ChannelLayout layout{1, 2, {"P3"}};
    CHECK_THROWS_AS(fit_spec({}, layout), EmptyTrainingSet);
    CHECK_THROWS_AS(fit_spec({FeatureVector{{1}, {}, 0}}, layout), DimensionMismatch);
    CHECK_THROWS_AS(fit_spec({FeatureVector{{1, 2}, {}, 0}}, layout, {0.5, 1.5, false}),
                    InvalidConfig);
}

TEST_CASE("clamping into bounds never raises the range penalty") {
    const auto spec = spec_3x2();
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-50.0, 150.0);
        const std::size_t before = range_penalty(x, spec);
        std::vector<double> clamped = x;
        for (std::size_t f = 0; f < clamped.size(); ++f)
            clamped[f] = std::clamp(clamped[f], spec.bounds[f].lo, spec.bounds[f].hi);
        CHECK(range_penalty(clamped, spec) == 0);
        CHECK(range_penalty(clamped, spec) <= before);
    }
}

TEST_CASE("spec text round-trips every field") {
    auto spec = spec_3x2();
    spec.bounds[3] = {0.125, 98.5};
    spec.smoothness_tolerance = {1.5, 2.25, 3.0};
    spec.quantile_margin = 0.01;
    spec.global_per_channel = true;

    std::stringstream ss(to_spec_text(spec));
    const auto back = parse_spec_text(ss);
    CHECK(back.layout.channels == spec.layout.channels);
    CHECK(back.layout.windows == spec.layout.windows);
    CHECK(back.layout.channel_names == spec.layout.channel_names);
    CHECK(back.ordering_groups == spec.ordering_groups);
    CHECK(back.smoothness_tolerance == spec.smoothness_tolerance);
    CHECK(back.quantile_margin == spec.quantile_margin);
    CHECK(back.global_per_channel == spec.global_per_channel);
    REQUIRE(back.bounds.size() == spec.bounds.size());
    for (std::size_t f = 0; f < spec.bounds.size(); ++f) {
        CHECK(back.bounds[f].lo == spec.bounds[f].lo);
        CHECK(back.bounds[f].hi == spec.bounds[f].hi);
    }
}

TEST_CASE("spec text parsing rejects malformed input") {
    std::stringstream empty("");
    CHECK_THROWS_AS(parse_spec_text(empty), SchemaError);
    std::stringstream bad("channels P3\nwindows x\n");
    CHECK_THROWS_AS(parse_spec_text(bad), SchemaError);
}
