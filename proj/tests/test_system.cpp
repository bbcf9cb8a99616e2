#include <gtest/gtest.h>

#include <random>

#include "collapsekit/gallery.hpp"
#include "collapsekit/system.hpp"

using namespace collapsekit;

namespace {

InverseSystem ray(const std::string& name, int depth) { return build(GallerySpec{name, depth}); }

OpenSetRep closed_interval(double a, double b) {
    return OpenSetRep::of_intervals(IntervalSet({Interval::closed(to_rational(a), to_rational(b))}));
}

GeometricPoint at(double x) { return euclidean_point({x}); }

} // namespace

TEST(Composite, DiagonalIsIdentity) {
    const auto sys = ray("ray-endpoint", 4);
    const auto id = bond_composite(sys, 2, 2);
    EXPECT_EQ(id->kind(), MapKind::Identity);
    EXPECT_EQ(id->eval(at(1.3)), at(1.3));
    EXPECT_THROW(bond_composite(sys, 3, 2), IndexOutOfRange);
    EXPECT_THROW(bond_composite(sys, 0, 5), IndexOutOfRange);
}

TEST(Composite, EndpointRaysCrushToZero) {
    const auto sys = ray("ray-endpoint", 4);
    EXPECT_EQ(bond_composite(sys, 0, 2)->eval(at(1.7)).coords[0], 0.0);
    EXPECT_EQ(bond_composite(sys, 1, 2)->eval(at(1.7)).coords[0], 1.0);
}

TEST(Composite, BucketHandByHand) {
    const auto sys = ray("ray-bucket", 4);
    // r_2 reverses [1, 2] onto [0, 1]; r_1 crushes [0, 1] to 0.
    EXPECT_EQ(sys.bond(2)->eval(at(2.0)).coords[0], 0.0);
    EXPECT_EQ(sys.bond(2)->eval(at(1.5)).coords[0], 0.5);
    EXPECT_EQ(bond_composite(sys, 1, 2)->eval(at(1.5)).coords[0], 0.5);
    EXPECT_EQ(bond_composite(sys, 0, 2)->eval(at(1.5)).coords[0], 0.0);
    // r_3 reverses [2, 3] onto [0, 2]: 2.25 -> 1.5 -> 0.5.
    EXPECT_EQ(bond_composite(sys, 1, 3)->eval(at(2.25)).coords[0], 0.5);
}

TEST(Composite, CocycleExactOnBreakpointBonds) {
    for (const char* name : {"ray-endpoint", "ray-shift", "ray-bucket"}) {
        const auto sys = ray(name, 6);
        std::mt19937_64 rng(1);
        for (int i = 0; i <= 6; ++i)
            for (int j = i; j <= 6; ++j)
                for (int k = j; k <= 6; ++k) {
                    const auto ij = composite_function(sys, i, j), jk = composite_function(sys, j, k), ik = composite_function(sys, i, k);
                    for (const auto& [x, y] : ik.breakpoints()) EXPECT_EQ(ij(jk(x)), y) << name;
                    std::uniform_int_distribution<int> num(0, 1000 * k);
                    for (int s = 0; s < 20; ++s) {
                        const Rational x(num(rng), 1000);
                        EXPECT_EQ(ij(jk(x)), ik(x)) << name;
                    }
                }
    }
}

TEST(Composite, CocycleOnScheduleBonds) {
    const auto sys = build(GallerySpec{"tree-balls", 4, "binary"});
    std::mt19937_64 rng(2);
    for (int i = 0; i <= 4; ++i)
        for (int k = i; k <= 4; ++k) {
            const auto pts = sys.space(k)->random_points(30, rng);
            for (int j = i; j <= k; ++j) {
                const auto ij = bond_composite(sys, i, j), jk = bond_composite(sys, j, k), ik = bond_composite(sys, i, k);
                for (const auto& x : pts) EXPECT_LT(sys.space(i)->distance(ij->eval(jk->eval(x)), ik->eval(x)), 1e-9);
            }
        }
}

TEST(Stationary, EndpointRayHalfUnitPasses) {
    const auto sys = ray("ray-endpoint", 6);
    const auto c = stationary_check(sys, closed_interval(0.0, 0.5), 1, 6);
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.depth, 6);
}

TEST(Stationary, BucketHalfUnitFailsAtTwo) {
    const auto sys = ray("ray-bucket", 6);
    const auto c = stationary_check(sys, closed_interval(0.0, 0.5), 1, 6);
    ASSERT_FALSE(c.passed);
    ASSERT_TRUE(c.violating_k.has_value());
    EXPECT_EQ(*c.violating_k, 2);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_GE(c.witness->coords[0], 1.5);
    EXPECT_LE(c.witness->coords[0], 2.0);
}

TEST(Stationary, EmptySetPasses) {
    for (const auto& name : gallery_names()) {
        const auto sys = build(GallerySpec{name, 4});
        EXPECT_TRUE(stationary_check(sys, OpenSetRep::empty(), 0, 4).passed) << name;
    }
}

TEST(Stationary, MonotoneInLevel) {
    const auto sys = ray("ray-endpoint", 8);
    const auto a = closed_interval(0.0, 2.5);
    ASSERT_TRUE(stationary_check(sys, a, 3, 8).passed);
    for (int k = 3; k <= 8; ++k) EXPECT_TRUE(stationary_check(sys, a, k, 8).passed);
}

TEST(Stationary, UnionsAndSubsetsOfStationarySets) {
    const auto sys = ray("ray-endpoint", 8);
    const auto a = closed_interval(0.0, 0.5), b = closed_interval(1.2, 1.9);
    ASSERT_TRUE(stationary_check(sys, a, 2, 8).passed);
    ASSERT_TRUE(stationary_check(sys, b, 2, 8).passed);
    EXPECT_TRUE(stationary_check(sys, a.unite(b), 2, 8).passed);
    EXPECT_TRUE(stationary_check(sys, closed_interval(0.1, 0.2), 2, 8).passed);
}

TEST(Stationary, BallsOnPlanarSystem) {
    const auto sys = build(GallerySpec{"tangent-disks", 6});
    // A small ball away from the origin in C_3 is stationary; the origin's balls are not.
    EXPECT_TRUE(stationary_check(sys, OpenSetRep::ball(euclidean_point({0.0, 5.0}), 0.25), 3, 6).passed);
    EXPECT_FALSE(stationary_check(sys, OpenSetRep::ball(euclidean_point({0.0, 0.0}), 0.25), 3, 6).passed);
}

TEST(Insulated, RayFiltrationVertexPasses) {
    const auto sys = build(GallerySpec{"tree-balls", 6, "path"});
    for (Vertex v : {0, 1, 2}) {
        const auto c = insulated_check(sys, ComplexSpace::vertex_point(v), 6);
        EXPECT_TRUE(c.passed) << v;
        EXPECT_GE(c.j, v);
    }
}

TEST(Insulated, BucketOriginFails) {
    const auto sys = ray("ray-bucket", 10);
    const auto c = insulated_check(sys, at(0.0), 10);
    EXPECT_FALSE(c.passed);
    EXPECT_TRUE(c.inconclusive_beyond_depth);
    ASSERT_TRUE(c.last_failure.has_value());
    EXPECT_TRUE(c.last_failure->witness.has_value());
}

TEST(Insulated, TangentDiskOriginFails) {
    const auto sys = build(GallerySpec{"tangent-disks", 8});
    EXPECT_FALSE(insulated_check(sys, euclidean_point({0.0, 0.0}), 8).passed);
}

TEST(FullInsulation, EndpointRaysCertified) {
    const auto rep = fully_insulated_check(ray("ray-endpoint", 10), 10);
    EXPECT_EQ(rep.verdict, Verdict::Certified);
    EXPECT_EQ(rep.passed, rep.checked);
}

TEST(FullInsulation, BucketCounterexampleAtZero) {
    const auto rep = fully_insulated_check(ray("ray-bucket", 10), 10);
    EXPECT_EQ(rep.verdict, Verdict::CounterexampleCandidate);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_EQ(rep.witness->coords[0], 0.0);
}

TEST(FullInsulation, ConeCrushFailsOnlyAtConePoint) {
    // Every segment beyond any level is crushed onto q, so no neighborhood of q is stationary.
    const auto rep = fully_insulated_check(build(GallerySpec{"cone-crush", 10}), 10);
    EXPECT_EQ(rep.verdict, Verdict::CounterexampleCandidate);
    EXPECT_EQ(rep.passed + 1, rep.checked);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_EQ(*rep.witness, ComplexSpace::vertex_point(0));
}

TEST(FullInsulation, GalleryVerdicts) {
    const std::map<std::string, Verdict> expected{
        {"ray-shift", Verdict::Certified},       {"tree-balls", Verdict::Certified},
        {"rn-shells", Verdict::Certified},       {"telescope", Verdict::Certified},
        {"circle-hulls", Verdict::CounterexampleCandidate}, {"infinite-cube", Verdict::CounterexampleCandidate},
        {"cone-retract", Verdict::CounterexampleCandidate}};
    for (const auto& [name, v] : expected) {
        const auto rep = fully_insulated_check(build(GallerySpec{name, 7}), 7);
        EXPECT_EQ(rep.verdict, v) << name << ": " << rep.note;
    }
}

TEST(Systems, RetractionConditionHolds) {
    for (const auto& name : gallery_names()) {
        const auto sys = build(GallerySpec{name, 4});
        std::mt19937_64 rng(8);
        for (int i = 1; i <= sys.depth(); ++i)
            for (const auto& x : sys.space(i - 1)->random_points(20, rng)) {
                EXPECT_TRUE(sys.space(i)->contains(x, 1e-9)) << name;
                EXPECT_LT(sys.space(i)->distance(sys.bond(i)->eval(x), x), 1e-9) << name;
            }
    }
}

TEST(Systems, LevelOf) {
    const auto sys = ray("ray-endpoint", 5);
    EXPECT_EQ(sys.level_of(at(0.0)), 0);
    EXPECT_EQ(sys.level_of(at(2.5)), 3);
    EXPECT_EQ(sys.level_of(at(7.0)), -1);
    EXPECT_THROW(sys.bond(0), IndexOutOfRange);
}
