#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "collapsekit/gallery.hpp"

using namespace collapsekit;

namespace {

GeometricPoint at(double x) { return euclidean_point({x}); }

int heap_depth(int v) {
    int d = 0;
    while (v > 0) v = (v - 1) / 2, ++d;
    return d;
}

int lca_depth(int a, int b) {
    while (heap_depth(a) > heap_depth(b)) a = (a - 1) / 2;
    while (heap_depth(b) > heap_depth(a)) b = (b - 1) / 2;
    while (a != b) a = (a - 1) / 2, b = (b - 1) / 2;
    return heap_depth(a);
}

std::size_t remainder_components(const InverseSystem& sys, int depth, double spacing, double eps, ThreadCloud* out = nullptr,
                                 std::vector<std::size_t>* rem_out = nullptr) {
    auto cloud = sample_cloud(sys, depth, spacing);
    std::vector<std::size_t> rem;
    for (std::size_t i = 0; i < cloud.threads.size(); ++i)
        if (!is_stable(sys, cloud.threads[i], 3)) rem.push_back(i);
    const auto n = eps_components(sys, cloud.threads, rem, eps).size();
    if (out) *out = std::move(cloud);
    if (rem_out) *rem_out = std::move(rem);
    return n;
}

} // namespace

TEST(Build, RayEndpointSpacesAndBond) {
    const auto sys = build(GallerySpec{"ray-endpoint", 3});
    ASSERT_EQ(sys.depth(), 3);
    for (int i = 0; i <= 3; ++i) {
        const auto& box = dynamic_cast<const BoxSpace&>(*sys.space(i));
        EXPECT_EQ(box.lo()[0], 0.0);
        EXPECT_EQ(box.hi()[0], i);
    }
    EXPECT_EQ(sys.bond(2)->eval(at(1.5)).coords[0], 1.0);
}

TEST(Build, RayBucketReversal) {
    const auto sys = build(GallerySpec{"ray-bucket", 3});
    EXPECT_EQ(sys.bond(2)->eval(at(2.0)).coords[0], 0.0);
    EXPECT_EQ(sys.bond(2)->eval(at(1.5)).coords[0], 0.5);
}

TEST(Build, RayShiftOntoPreviousUnit) {
    const auto sys = build(GallerySpec{"ray-shift", 4});
    // [i-1, i] goes linearly onto [i-2, i-1] with i-1 fixed.
    EXPECT_EQ(sys.bond(3)->eval(at(3.0)).coords[0], 1.0);
    EXPECT_EQ(sys.bond(3)->eval(at(2.5)).coords[0], 1.5);
    EXPECT_EQ(sys.bond(3)->eval(at(2.0)).coords[0], 2.0);
}

TEST(Build, TreeBallsBinaryDepthThree) {
    const auto sys = build(GallerySpec{"tree-balls", 3, "binary"});
    for (int i = 0; i <= 3; ++i) {
        const auto& c = dynamic_cast<const ComplexSpace&>(*sys.space(i));
        EXPECT_EQ(c.complex().vertices.size(), (1u << (i + 1)) - 1) << i;
        for (Vertex v : c.complex().vertices) EXPECT_LE(heap_depth(v), i);
    }
    for (int i = 1; i <= 3; ++i) {
        const auto& b = dynamic_cast<const ScheduleMap&>(*sys.bond(i));
        ASSERT_EQ(b.steps().size(), 1u << i);
        for (const auto& st : b.steps()) {
            ASSERT_EQ(st.tau.size(), 1u);
            EXPECT_EQ(heap_depth(st.tau[0]), i);
            EXPECT_EQ(b.eval(ComplexSpace::vertex_point(st.tau[0])), ComplexSpace::vertex_point((st.tau[0] - 1) / 2));
        }
    }
}

TEST(Build, ConeSystems) {
    const auto crush = build(GallerySpec{"cone-crush", 4});
    const auto fold = build(GallerySpec{"cone-retract", 4});
    const GeometricPoint mid{{0, 3}, {0.5, 0.5}};
    EXPECT_EQ(crush.bond(3)->eval(mid), ComplexSpace::vertex_point(0));
    EXPECT_EQ(fold.bond(3)->eval(mid), (GeometricPoint{{0, 2}, {0.5, 0.5}}));
    EXPECT_EQ(fold.bond(1)->eval(ComplexSpace::vertex_point(1)), ComplexSpace::vertex_point(0));
}

TEST(Build, InvalidSpecs) {
    EXPECT_THROW(build(GallerySpec{"nosuch", 3}), InvalidSpec);
    EXPECT_THROW(build(GallerySpec{"ray-endpoint", 0}), InvalidSpec);
    EXPECT_THROW(build(GallerySpec{"telescope", 3, "binary", "degree7"}), InvalidSpec);
    EXPECT_THROW(build(GallerySpec{"tree-balls", 3, "star"}), InvalidSpec);
    EXPECT_THROW(build(GallerySpec{"tree-balls", 3, "hedge"}), InvalidSpec);
    EXPECT_THROW(build(json{{"depth", 3}}), InvalidSpec);
}

TEST(Build, SpecRoundTrip) {
    for (const auto& name : gallery_names()) {
        GallerySpec s{name, 5};
        const auto j = s.to_json();
        EXPECT_EQ(GallerySpec::from_json(j).to_json(), j);
        EXPECT_EQ(build(j).depth(), 5) << name;
    }
}

TEST(InfiniteCube, BasisVectorsConvergeInProductMetric) {
    const int n = 12;
    const auto sys = build(GallerySpec{"infinite-cube", n});
    auto e = [&](int i) {
        std::vector<double> c(n, 0.0);
        c[static_cast<std::size_t>(i)] = 1.0;
        return euclidean_point(c);
    };
    const auto zero = embed_e(sys, euclidean_point(std::vector<double>(n, 0.0)), n);
    double prev = 1e9;
    for (int i = 0; i < n; ++i) {
        const double d = product_metric(sys, embed_e(sys, e(i), n), zero);
        EXPECT_LT(d, prev);
        EXPECT_NEAR(d, 2.0 * std::ldexp(1.0, -(i + 1)) - std::ldexp(1.0, -n), 1e-12);
        prev = d;
        for (int j = 0; j < i; ++j) EXPECT_NEAR(sys.space(n)->distance(e(i), e(j)), std::sqrt(2.0), 1e-12);
    }
}

TEST(PlanarSystems, NotInsulatedAtBasePoint) {
    const auto disks = fully_insulated_check(build(GallerySpec{"tangent-disks", 8}), 8);
    EXPECT_EQ(disks.verdict, Verdict::CounterexampleCandidate);
    ASSERT_TRUE(disks.witness.has_value());
    EXPECT_LT(std::hypot(disks.witness->coords[0], disks.witness->coords[1]), 1e-12);
    const auto hulls = fully_insulated_check(build(GallerySpec{"circle-hulls", 8}), 8);
    EXPECT_EQ(hulls.verdict, Verdict::CounterexampleCandidate);
    EXPECT_TRUE(hulls.witness.has_value());
}

TEST(PlanarSystems, DiskBondsHitInnerBoundary) {
    const auto sys = build(GallerySpec{"tangent-disks", 5});
    std::mt19937_64 rng(1);
    for (int j = 2; j <= 5; ++j)
        for (const auto& x : sys.space(j)->random_points(50, rng)) {
            const auto y = sys.bond(j)->eval(x);
            if (sys.space(j - 1)->contains(x, 1e-12)) continue;
            // Moved points land on the circle of radius j-1 about (0, j-1), on the segment from the origin.
            EXPECT_NEAR(std::hypot(y.coords[0], y.coords[1] - (j - 1)), j - 1, 1e-9);
            EXPECT_NEAR(x.coords[0] * y.coords[1] - x.coords[1] * y.coords[0], 0.0, 1e-9);
        }
}

TEST(PlanarSystems, HullBondsAreRadial) {
    const auto sys = build(GallerySpec{"circle-hulls", 5});
    std::mt19937_64 rng(2);
    for (int j = 3; j <= 5; ++j) {
        const auto& inner = dynamic_cast<const HullSpace&>(*sys.space(j - 1));
        for (const auto& x : sys.space(j)->random_points(50, rng)) {
            if (inner.contains(x, 1e-12)) continue;
            const auto y = sys.bond(j)->eval(x);
            EXPECT_LT(inner.boundary_distance(y.coords), 1e-9);
            EXPECT_NEAR(x.coords[0] * y.coords[1] - x.coords[1] * y.coords[0], 0.0, 1e-9);
        }
    }
}

TEST(Telescope, PointStagesGiveOneRemainderThread) {
    const int n = 8;
    const auto sys = build(GallerySpec{"telescope", n, "binary", "point"});
    const auto [cloud, rep] = sample_limit(sys, n, SampleOptions{0.25});
    EXPECT_EQ(rep.remainder_components, 1u);
    EXPECT_LE(rep.remainder_diameter, std::ldexp(1.0, -(n - 3)));
    for (int i = 0; i <= n; ++i) EXPECT_EQ(sys.space(i)->grid(0.25).size(), static_cast<std::size_t>(4 * i + 1));
}

TEST(Telescope, DegreeOneRemainderIsOneCycle) {
    ThreadCloud cloud;
    std::vector<std::size_t> rem;
    const auto sys = build(GallerySpec{"telescope", 3, "binary", "degree1"});
    // Adjacent samples are up to about 3.5 * spacing apart, so eps = 0.5 chains a 1/8 grid.
    EXPECT_EQ(remainder_components(sys, 3, 0.125, 0.5, &cloud, &rem), 1u);
    // The remainder wraps once around: its base coordinates cover every lattice point of K_0.
    std::set<std::vector<double>> base;
    for (std::size_t i : rem) {
        auto e = sys.space(0)->embed(cloud.threads[i].coords[0]);
        for (auto& c : e) c = std::round(c * 1e9) / 1e9;
        base.insert(e);
    }
    EXPECT_EQ(base.size(), sys.space(0)->grid(0.125).size());
}

TEST(Telescope, DegreeTwoRemainderFragmentsWithDepth) {
    auto comps = [](const std::string& maps, int depth) {
        return remainder_components(build(GallerySpec{"telescope", depth, "binary", maps}), depth, 0.125, 0.05);
    };
    const auto d4 = comps("degree2", 4), d5 = comps("degree2", 5);
    EXPECT_GT(d5, d4);
    EXPECT_EQ(comps("degree1", 4), comps("degree1", 5));
}

TEST(Telescope, BuildRejectsMismatchedMaps) {
    auto [stages, maps] = telescope_family("degree1", 2);
    auto bad = maps;
    bad[2].codomain = stages[2].complex;
    EXPECT_THROW(telescope_build(stages, bad), MapMismatch);
    auto short_maps = maps;
    short_maps.pop_back();
    EXPECT_THROW(telescope_build(stages, short_maps), MapMismatch);
    auto unpositioned = stages;
    unpositioned[1].positions.erase(0);
    EXPECT_THROW(telescope_build(unpositioned, maps), MapMismatch);
    EXPECT_NO_THROW(telescope_build(stages, maps));
}

TEST(Telescope, IdentificationPushesDown) {
    const auto sys = build(GallerySpec{"telescope", 2, "binary", "degree1"});
    const auto& t = dynamic_cast<const TelescopeSpace&>(*sys.space(2));
    // (v, 1) on level 2 is f_2(v) on the top of level 1.
    const auto p = t.data().make_point(2, {3}, {1.0}, 1.0);
    EXPECT_EQ(p, t.data().make_point(1, {1}, {1.0}, 1.0));
    EXPECT_EQ(sys.bond(2)->eval(t.data().make_point(2, {3}, {1.0}, 1.7)), p);
}

TEST(TreeEnds, PathHasOneEnd) {
    const auto rep = tree_ends(build(GallerySpec{"tree-balls", 6, "path"}), 6);
    EXPECT_EQ(rep.classes, 1u);
}

TEST(TreeEnds, BinaryDepthSixHasSixtyFourSeparatedEnds) {
    const int n = 6;
    const auto sys = build(GallerySpec{"tree-balls", n, "binary"});
    const auto rep = tree_ends(sys, n);
    EXPECT_EQ(rep.classes, 64u);
    EXPECT_LE(rep.pattern_error, 1e-9);
    // Oracle: leaf threads at depth n differ from the level after their last common vertex on.
    const int first = (1 << n) - 1, last = (1 << (n + 1)) - 2;
    double worst = 0.0;
    for (int a = first; a <= last; ++a)
        for (int b = a + 1; b <= last; ++b) {
            const auto ta = thread_of(sys, ComplexSpace::vertex_point(a), n);
            const auto tb = thread_of(sys, ComplexSpace::vertex_point(b), n);
            const int k = lca_depth(a, b);
            worst = std::max(worst, std::abs(product_metric(sys, ta, tb) - (std::ldexp(1.0, -k) - std::ldexp(1.0, -n))));
            EXPECT_GE(product_metric(sys, ta, tb), std::ldexp(1.0, -(n)));
        }
    EXPECT_LE(worst, 1e-9);
}

TEST(TreeEnds, ThreeRayStar) {
    EXPECT_EQ(tree_ends(build(GallerySpec{"tree-balls", 5, "star3"}), 5).classes, 3u);
}

TEST(TreeEnds, WrongSystemKind) {
    EXPECT_THROW(tree_ends(build(GallerySpec{"ray-endpoint", 3}), 3), WrongSystemKind);
}

TEST(CountableTrees, InfiniteStarAddsOneSpokePerStage) {
    const auto sys = build(GallerySpec{"tree-countable", 6, "star"});
    ASSERT_EQ(sys.depth(), 6);
    for (int i = 1; i <= 6; ++i) {
        const auto& b = dynamic_cast<const ScheduleMap&>(*sys.bond(i));
        ASSERT_EQ(b.steps().size(), 1u);
        EXPECT_EQ(b.eval(ComplexSpace::vertex_point(i)), ComplexSpace::vertex_point(0));
        EXPECT_EQ(b.eval(GeometricPoint{{0, i}, {0.5, 0.5}}), ComplexSpace::vertex_point(0));
    }
}

TEST(CountableTrees, FiniteTreeTerminates) {
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {1, 3}, {0, 4}};
    const auto sys = countable_tree_filtration(edges, {0, 2, 3, 4, 1}, 50);
    EXPECT_EQ(sys.depth(), 3);
    const auto r = bond_composite(sys, 0, sys.depth());
    for (const auto& x : sys.space(sys.depth())->grid(0.25)) EXPECT_EQ(r->eval(x), ComplexSpace::vertex_point(0));
}

TEST(CountableTrees, RejectsNonTrees) {
    EXPECT_THROW(countable_tree_filtration({{0, 1}, {1, 2}, {2, 0}}, {0, 1, 2}, 3), NotATree);
    EXPECT_THROW(countable_tree_filtration({{0, 1}, {2, 3}}, {0, 1, 2, 3}, 3), NotATree);
    EXPECT_THROW(countable_tree_filtration({{0, 0}}, {0}, 3), NotATree);
    EXPECT_THROW(countable_tree_filtration({{0, 1}, {1, 0}}, {0, 1}, 3), NotATree);
}

TEST(CountableTrees, BreadthFirstBinaryMatchesBalls) {
    for (int n : {2, 3, 4}) {
        const int m = (1 << (n + 1)) - 2;
        const auto cnt = build(GallerySpec{"tree-countable", m, "binary"});
        const auto balls = build(GallerySpec{"tree-balls", n, "binary"});
        EXPECT_EQ(tree_ends(cnt, m).classes, tree_ends(balls, n).classes) << n;
        EXPECT_EQ(tree_ends(cnt, m).classes, 1u << n);
    }
}

TEST(RnShells, BondsRetractShellsOntoSimplex) {
    const auto sys = build(GallerySpec{"rn-shells", 4, "binary", "degree1", 2});
    std::mt19937_64 rng(3);
    const auto r = bond_composite(sys, 0, 4);
    for (const auto& x : sys.space(4)->random_points(50, rng)) EXPECT_TRUE(sys.space(0)->contains(r->eval(x), 1e-9));
    EXPECT_THROW(build(GallerySpec{"rn-shells", 4, "binary", "degree1", 7}), InvalidSpec);
}

TEST(DepthStability, SmallDepthsForEverySystem) {
    for (const auto& name : gallery_names()) {
        GallerySpec deep{name, 7};
        const auto sys = build(deep);
        const double spacing = aligned_spacing(deep);
        const auto a = sample_cloud(sys, 3, spacing), b = sample_cloud(sys, 7, spacing);
        EXPECT_LE(hausdorff(sys, a, b), std::ldexp(1.0, -2)) << name;
    }
}
