#include <gtest/gtest.h>

#include "collapsekit/gallery.hpp"
#include "collapsekit/io.hpp"

using namespace collapsekit;

TEST(ComplexJson, RoundTripAndClosure) {
    const auto k = SimplicialComplex::full_simplex(2);
    EXPECT_EQ(simplicial_from_json(to_json(k)), k);
    EXPECT_EQ(simplicial_from_json(json::parse(R"({"simplices": [[2, 1, 0]]})")), k);
    EXPECT_THROW(simplicial_from_json(json::parse(R"({"simplices": [[]]})")), ParseError);
    EXPECT_THROW(simplicial_from_json(json::parse(R"({"vertices": [1]})")), ParseError);
}

TEST(ComplexJson, Cubical) {
    const auto j = json::parse(R"({"cells": [[[0, 1], [0, 1]]]})");
    ASSERT_TRUE(is_cubical_json(j));
    const auto k = cubical_from_json(j);
    EXPECT_EQ(k.size(), 9u);
    EXPECT_EQ(cubical_from_json(to_json(k)), k);
    EXPECT_THROW(cubical_from_json(json::parse(R"({"cells": [[[0, 2]]]})")), ParseError);
}

TEST(ScheduleJson, OrderedPairs) {
    const auto o = collapse_search(SimplicialComplex::full_simplex(3), SimplicialComplex{});
    const auto j = to_json(o.schedule);
    ASSERT_EQ(j["steps"].size(), 7u);
    EXPECT_EQ(j["steps"][0].size(), 2u);
    const auto back = schedule_from_json(j);
    EXPECT_EQ(back.steps, o.schedule.steps);
    EXPECT_EQ(back.filtration, o.schedule.filtration);
}

TEST(SystemJson, GalleryRebuildsFromSpec) {
    for (const auto& name : gallery_names()) {
        const auto sys = build(GallerySpec{name, 4});
        const auto j = to_json(sys);
        EXPECT_EQ(j["bonds"].size(), 4u);
        const auto again = system_from_json(j);
        EXPECT_EQ(dump(to_json(again)), dump(j)) << name;
    }
}

TEST(SystemJson, HandBuiltPiecewiseLinear) {
    const auto j = json::parse(R"({
        "name": "two-step",
        "spaces": [{"kind": "box", "lo": [0], "hi": [0]}, {"kind": "box", "lo": [0], "hi": [1]},
                   {"kind": "box", "lo": [0], "hi": [2]}],
        "bonds": [{"kind": "pl1d", "breakpoints": [[0, 0], [1, 0]]},
                  {"kind": "pl1d", "breakpoints": [[0, 0], [1, 1], [2, 0]], "tracks": false}]})");
    const auto sys = system_from_json(j);
    EXPECT_EQ(sys.depth(), 2);
    EXPECT_TRUE(sys.piecewise_linear());
    EXPECT_EQ(sys.bond(2)->eval(euclidean_point({1.5})).coords[0], 0.5);
    EXPECT_EQ(system_from_json(to_json(sys)).bond(2)->eval(euclidean_point({1.25})).coords[0], 0.75);
}

TEST(SystemJson, HandBuiltSchedule) {
    const auto j = json::parse(R"({
        "spaces": [{"kind": "complex", "metric": "tree-path", "simplices": [[0]]},
                   {"kind": "complex", "metric": "tree-path", "simplices": [[0, 1]]}],
        "bonds": [{"kind": "schedule", "steps": [[[1], [0, 1]]]}]})");
    const auto sys = system_from_json(j);
    EXPECT_EQ(sys.bond(1)->eval(GeometricPoint{{0, 1}, {0.5, 0.5}}), ComplexSpace::vertex_point(0));
}

TEST(SystemJson, Malformed) {
    EXPECT_THROW(system_from_json(json::array()), ParseError);
    EXPECT_THROW(system_from_json(json::parse(R"({"spaces": []})")), ParseError);
    EXPECT_THROW(system_from_json(json::parse(R"({"spaces": [{"kind": "sphere"}], "bonds": []})")), ParseError);
    EXPECT_THROW(system_from_json(json::parse(R"({"gallery": "nosuch"})")), InvalidSpec);
}

TEST(Rounding, TwelveSignificantDigits) {
    const json j{{"a", 0.1 + 0.2}, {"b", {1.0 / 3.0, 2}}, {"c", std::numeric_limits<double>::infinity()}, {"d", -0.0}};
    const auto r = rounded(j);
    EXPECT_EQ(r["a"].get<double>(), 0.3);
    EXPECT_EQ(r["b"][0].dump(), "0.333333333333");
    EXPECT_EQ(r["b"][1], 2);
    EXPECT_TRUE(r["c"].is_null());
    EXPECT_EQ(r["d"].dump(), "0.0");
}
