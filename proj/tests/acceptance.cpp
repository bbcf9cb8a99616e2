// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "collapsekit/complex.hpp"
#include "collapsekit/gallery.hpp"
#include "collapsekit/geometry.hpp"
#include "collapsekit/limitkit.hpp"
#include "collapsekit/system.hpp"

using namespace collapsekit;

namespace {

// Tolerances, pinned.
constexpr double kTrackTol = 1e-9;
constexpr double kCubeTol = 1e-9;
constexpr double kScheduleCocycleTol = 1e-9;
constexpr double kHomotopyTol = 1e-8;
constexpr double kPatternTol = 1e-9;
constexpr double kBucketLimit = 0.05;
constexpr double kDensityGap = 0.1;
constexpr double kOracleTol = 1e-12;
const double kStabilityBound = std::ldexp(1.0, -5);

// Collects failures; the first few are reported.
struct Check {
    int failures = 0;
    std::ostringstream why;
    std::ostringstream facts;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        if (failures++ < 3) why << (failures > 1 ? "; " : "") << what;
    }
    template <class T>
    void note(const std::string& key, const T& value) {
        facts << (facts.tellp() > 0 ? ", " : "") << key << "=" << value;
    }
};

GeometricPoint at(double x) { return euclidean_point({x}); }

// ---------------------------------------------------------------- 1: combinatorial collapses

std::vector<std::pair<Simplex, Simplex>> brute_free_pairs(const std::set<Simplex>& cells) {
    std::vector<std::pair<Simplex, Simplex>> out;
    for (const auto& tau : cells) {
        std::vector<Simplex> cofaces;
        for (const auto& s : cells)
            if (s.size() > tau.size() && std::includes(s.begin(), s.end(), tau.begin(), tau.end())) cofaces.push_back(s);
        if (cofaces.size() == 1 && cofaces[0].size() == tau.size() + 1) out.emplace_back(tau, cofaces[0]);
    }
    return out;
}

bool brute_collapsible(const std::set<Simplex>& cells, std::map<std::set<Simplex>, bool>& memo) {
    if (cells.size() == 1) return true;
    if (auto it = memo.find(cells); it != memo.end()) return it->second;
    bool ok = false;
    for (const auto& [tau, sigma] : brute_free_pairs(cells)) {
        auto next = cells;
        next.erase(tau);
        next.erase(sigma);
        if (brute_collapsible(next, memo)) {
            ok = true;
            break;
        }
    }
    return memo[cells] = ok;
}

SimplicialComplex random_complex(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nv(3, 5), coin(0, 2);
    const int n = nv(rng);
    std::vector<Simplex> gens{{0}};
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (coin(rng) == 0) gens.push_back({a, b});
            for (int c = b + 1; c < n; ++c)
                if (coin(rng) == 0 && coin(rng) == 0) gens.push_back({a, b, c});
        }
    return SimplicialComplex::closure_of(gens);
}

void collapse_soundness(Check& c) {
    const auto sigma3 = SimplicialComplex::full_simplex(3);
    const auto o = collapse_search(sigma3, SimplicialComplex{});
    c.expect(o.found() && o.schedule.steps.size() == 7, "3-simplex did not collapse in 7 steps");
    c.expect(o.found() && replay(sigma3, o.schedule).size() == 1, "3-simplex replay does not end at a vertex");
    c.note("sigma3_steps", o.schedule.steps.size());

    const auto boundary = collapse_search(SimplicialComplex::simplex_boundary(2), SimplicialComplex{});
    c.expect(boundary.status == SearchStatus::ProvenNotFound, "triangle boundary not proven non-collapsible");

    std::mt19937_64 rng(20261014);
    int compared = 0, schedules = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const auto k = random_complex(rng);
        if (k.size() > 25) continue;
        std::map<std::set<Simplex>, bool> memo;
        const bool oracle = brute_collapsible(k.simplices, memo);
        const auto res = collapse_search(k, SimplicialComplex{});
        c.expect(res.status != SearchStatus::Inconclusive, "exhaustive search inconclusive below 25 cells");
        c.expect(res.found() == oracle, "exhaustive search disagrees with brute force on " + std::to_string(k.size()) + " cells");
        ++compared;
        for (std::uint64_t seed : {0u, 3u}) {
            SearchOptions greedy;
            greedy.strategy = SearchStrategy::Greedy;
            greedy.seed = seed;
            for (const auto& out : {res, collapse_search(k, SimplicialComplex{}, greedy)}) {
                if (out.schedule.steps.empty()) continue;
                ++schedules;
                auto cur = k;
                for (std::size_t i = 0; i < out.schedule.steps.size(); ++i) {
                    cur = elementary_collapse(cur, out.schedule.steps[i]);
                    c.expect(cur.euler_characteristic() == k.euler_characteristic(), "Euler characteristic changed");
                    c.expect(cur.size() == out.schedule.filtration.at(i + 1), "filtration size mismatch");
                }
                c.expect(replay(k, out.schedule) == cur, "replay differs from stepwise collapse");
            }
        }
    }
    c.expect(compared >= 40, "too few complexes compared");
    c.note("brute_force_compared", compared);
    c.note("schedules_replayed", schedules);
}

// ---------------------------------------------------------------- 2: geometric collapses

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

void geometric_collapses(Check& c) {
    const Simplex sigma{0, 1, 2}, tau{0, 1};
    const auto apex = ComplexSpace::vertex_point(2);
    c.expect(simplicial_collapse_eval(sigma, tau, {sigma, {1.0 / 3, 1.0 / 3, 1.0 / 3}}) == apex, "barycenter of sigma misses apex");
    c.expect(simplicial_collapse_eval(sigma, tau, {tau, {0.5, 0.5}}) == apex, "barycenter of tau misses apex");

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int fixed = 0;
    for (int k = 0; k < 50; ++k) {
        const double s = u(rng);
        const GeometricPoint p = k % 2 == 0 ? GeometricPoint{{0, 2}, {s, 1.0 - s}} : GeometricPoint{{1, 2}, {s, 1.0 - s}};
        if (simplicial_collapse_eval(sigma, tau, p) == p) ++fixed;
    }
    c.expect(fixed == 50, "collapse moves points of the remaining boundary");
    c.note("boundary_fixed", fixed);

    std::uniform_real_distribution<double> cube(-1.0, 1.0);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 3; ++n) {
        for (int k = 0; k < 200; ++k) {
            std::vector<double> x(n);
            for (auto& v : x) v = cube(rng);
            const auto y = cubical_collapse_eval(x);
            worst = std::max(worst, dist(cubical_collapse_eval(y), y));
            // A point of J: the bottom face or a side face.
            std::vector<double> j(n);
            for (auto& v : j) v = cube(rng);
            const std::size_t face = static_cast<std::size_t>(k) % n;
            j[face] = face + 1 == n ? -1.0 : (k % 2 == 0 ? 1.0 : -1.0);
            worst = std::max(worst, dist(cubical_collapse_eval(j), j));
        }
    }
    c.expect(worst <= kCubeTol, "cubical collapse not idempotent or moves J");
    c.note("cube_worst", worst);
}

// ---------------------------------------------------------------- 3: track faithfulness

void track_faithfulness(Check& c) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    double worst = 0.0;
    int bonds = 0;
    for (const auto& name : gallery_names()) {
        const auto sys = build(GallerySpec{name, 5});
        for (int i = 1; i <= sys.depth(); ++i) {
            const auto& b = sys.bond(i);
            if (!b->has_tracks()) continue;
            ++bonds;
            for (const auto& x : b->domain()->random_points(200, rng)) {
                const double t = ut(rng);
                const double d = b->image()->distance(b->eval(b->track(x, t)), b->eval(x));
                if (d > worst) worst = d;
                c.expect(d <= kTrackTol, name + " bond " + std::to_string(i) + " moves a fiber");
            }
        }
    }
    c.note("bonds_with_tracks", bonds);
    c.note("worst", worst);

    const auto fold = folded_interval_system();
    const auto rep = track_faithful_check(HomotopyEvaluator(fold.bond(1)), fold.space(1)->grid(0.05), time_grid(11), kTrackTol);
    c.expect(!rep.passed && rep.witness.has_value(), "folded interval passes the track check");
    if (rep.witness) c.note("fold_witness", rep.witness->coords[0]);
}

// ---------------------------------------------------------------- 4: cocycle

void cocycle(Check& c) {
    std::mt19937_64 rng(4);
    std::size_t exact = 0;
    for (const char* name : {"ray-endpoint", "ray-shift", "ray-bucket"}) {
        const int n = 10;
        const auto sys = build(GallerySpec{name, n});
        for (int i = 0; i <= n; ++i)
            for (int j = i; j <= n; ++j)
                for (int k = j; k <= n; ++k) {
                    const auto ij = composite_function(sys, i, j), jk = composite_function(sys, j, k), ik = composite_function(sys, i, k);
                    std::vector<Rational> xs;
                    for (const auto& bp : ik.breakpoints()) xs.push_back(bp.first);
                    for (const auto& bp : jk.breakpoints()) xs.push_back(bp.first);
                    std::uniform_int_distribution<int> num(0, 997 * k);
                    for (int s = 0; s < 100; ++s) xs.emplace_back(num(rng), 997);
                    for (const auto& x : xs) {
                        const bool ok = ij(jk(x)) == ik(x);
                        c.expect(ok, std::string(name) + " cocycle fails between " + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k));
                        exact += ok;
                    }
                }
    }
    c.note("exact_pl_checks", exact);

    double worst = 0.0;
    for (const auto& name : gallery_names()) {
        const auto probe = build(GallerySpec{name, 1});
        if (probe.piecewise_linear()) continue;
        const int n = 5;
        const auto sys = build(GallerySpec{name, n});
        for (int i = 0; i <= n; ++i)
            for (int k = i; k <= n; ++k) {
                const auto pts = sys.space(k)->random_points(25, rng);
                const auto ik = bond_composite(sys, i, k);
                for (int j = i; j <= k; ++j) {
                    const auto ij = bond_composite(sys, i, j), jk = bond_composite(sys, j, k);
                    for (const auto& x : pts) worst = std::max(worst, sys.space(i)->distance(ij->eval(jk->eval(x)), ik->eval(x)));
                }
            }
    }
    c.expect(worst <= kScheduleCocycleTol, "non-PL cocycle defect above tolerance");
    c.note("non_pl_worst", worst);
}

// ---------------------------------------------------------------- 5: insulation verdicts

void insulation(Check& c) {
    for (const char* name : {"ray-endpoint", "ray-shift"}) {
        const auto rep = fully_insulated_check(build(GallerySpec{name, 10}), 10);
        c.expect(rep.verdict == Verdict::Certified, std::string(name) + " is " + to_string(rep.verdict));
    }
    for (const char* name : {"ray-bucket", "tangent-disks", "circle-hulls"}) {
        const auto rep = fully_insulated_check(build(GallerySpec{name, 10}), 10);
        c.expect(rep.verdict == Verdict::CounterexampleCandidate && rep.witness.has_value(),
                 std::string(name) + " is " + to_string(rep.verdict));
        if (rep.witness) c.note(std::string(name) + "_witness", to_json(*rep.witness).dump());
    }
}

// ---------------------------------------------------------------- 6: bucket handles converge

// Bucket bond by hand: identity below k-1, the top unit folded back over [0, k-1].
double bucket_bond(int k, double x) { return x <= k - 1 ? x : (k - 1) * (k - x); }

void bucket_convergence(Check& c) {
    const int depth = 14;
    const auto sys = build(GallerySpec{"ray-bucket", depth});
    const auto zero = embed_e(sys, at(0.0), depth);
    double prev = std::numeric_limits<double>::infinity(), worst_oracle = 0.0;
    for (int n = 1; n <= 12; ++n) {
        const auto e = embed_e(sys, at(n), depth);
        const double d = product_metric(sys, e, zero);
        c.expect(d < prev, "e(" + std::to_string(n) + ") did not get closer");
        prev = d;
        if (n <= 4) {
            std::vector<double> coords(depth + 1, static_cast<double>(n));
            for (int i = n - 1; i >= 0; --i) coords[i] = bucket_bond(i + 1, coords[i + 1]);
            double oracle = 0.0;
            for (int i = 0; i <= depth; ++i) {
                oracle += std::ldexp(1.0, -i) * std::min(std::abs(coords[i]), 1.0);
                worst_oracle = std::max(worst_oracle, std::abs(e.coords[i].coords[0] - coords[i]));
            }
            worst_oracle = std::max(worst_oracle, std::abs(oracle - d));
        }
    }
    c.expect(prev < kBucketLimit, "distance at n = 12 is " + std::to_string(prev));
    c.expect(worst_oracle <= kOracleTol, "hand-composed oracle disagrees");
    c.note("d12", prev);
    c.note("oracle_worst", worst_oracle);
}

// ---------------------------------------------------------------- 7: remainder sampling

void remainder_sampling(Check& c) {
    auto run = [](const std::string& name, int depth) {
        GallerySpec spec{name, depth};
        SampleOptions opt;
        opt.spacing = aligned_spacing(spec);
        return sample_limit(build(spec), depth, opt).second;
    };
    const auto endpoint = run("ray-endpoint", 8);
    c.expect(endpoint.remainder_components == 1, "endpoint rays: " + std::to_string(endpoint.remainder_components) + " regions");
    const auto shift = run("ray-shift", 8);
    c.expect(shift.remainder_components == 1, "shift rays: " + std::to_string(shift.remainder_components) + " components");
    GallerySpec bucket_spec{"ray-bucket", 10};
    c.expect(aligned_spacing(bucket_spec) == 1.0 / 256, "bucket grid is not 1/256");
    const auto bucket = run("ray-bucket", 10);
    c.expect(bucket.density_gap <= kDensityGap, "bucket density gap " + std::to_string(bucket.density_gap));
    c.note("endpoint_regions", endpoint.remainder_components);
    c.note("shift_components", shift.remainder_components);
    c.note("bucket_gap", bucket.density_gap);
}

// ---------------------------------------------------------------- 8: telescope homotopy

double thread_gap(const InverseSystem& sys, const Thread& a, const Thread& b) {
    double worst = 0.0;
    for (int i = 0; i <= a.depth(); ++i) worst = std::max(worst, sys.space(i)->distance(a.coords[i], b.coords[i]));
    return worst;
}

void telescope_homotopy(Check& c) {
    const int depth = 5;
    const auto sys = build(GallerySpec{"telescope", depth, "binary", "degree1"});
    NegligibilityOptions opt;
    opt.spacing = 0.25;
    opt.sample_budget = 200;
    opt.tol = kHomotopyTol;
    const auto rep = homotopy_negligibility_check(sys, depth, opt);
    c.expect(rep.stable_ok, "some H_t(x) is not stable by its level");
    c.expect(rep.tracks_ok, "bond tracks are not faithful");

    const auto cloud = sample_cloud(sys, depth, opt.spacing);
    std::vector<double> ts = time_grid(17);
    double identity_gap = 0.0, consistency = 0.0, commutation = 0.0;
    for (std::size_t n = 0; n < cloud.threads.size(); n += 7) {
        const auto& x = cloud.threads[n];
        c.expect(homotopy_H(sys, x, 0.0) == x, "H(., 0) is not the identity");
        for (double t : ts) {
            const auto y = homotopy_H(sys, x, t);
            commutation = std::max(commutation, consistency_defect(sys, y));
            for (int m = 1; m < depth; ++m) {
                consistency = std::max(consistency, thread_gap(sys, y.truncated(m), homotopy_H(sys, x.truncated(m), t)));
            }
        }
    }
    for (int i = 0; i <= depth; ++i)
        for (const auto& p : sys.space(i)->grid(0.25)) {
            const auto e = embed_e(sys, p, depth);
            for (double t : {std::ldexp(1.0, -i), std::ldexp(1.0, -i - 1), std::ldexp(1.0, -i - 3)})
                identity_gap = std::max(identity_gap, thread_gap(sys, homotopy_H(sys, e, t), e));
        }
    c.expect(identity_gap <= kHomotopyTol, "H moves e(C_i) before time 2^-i");
    c.expect(consistency <= kHomotopyTol, "H does not agree across truncations");
    c.expect(commutation <= kHomotopyTol, "H_t(x) is not a thread");
    c.note("threads", rep.threads);
    c.note("consistency", consistency);
    c.note("commutation", commutation);
}

// ---------------------------------------------------------------- 9: tree ends

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

void tree_ends_counts(Check& c) {
    const int n = 6;
    const auto binary = build(GallerySpec{"tree-balls", n, "binary"});
    const auto rep = tree_ends(binary, n);
    c.expect(rep.classes == 64, "binary tree: " + std::to_string(rep.classes) + " classes");
    c.expect(rep.pattern_error <= kPatternTol, "separation pattern error " + std::to_string(rep.pattern_error));
    double worst = 0.0;
    const int first = (1 << n) - 1, last = (1 << (n + 1)) - 2;
    for (int a = first; a <= last; a += 3)
        for (int b = a + 1; b <= last; ++b) {
            const double d = product_metric(binary, thread_of(binary, ComplexSpace::vertex_point(a), n),
                                            thread_of(binary, ComplexSpace::vertex_point(b), n));
            worst = std::max(worst, std::abs(d - (std::ldexp(1.0, -lca_depth(a, b)) - std::ldexp(1.0, -n))));
        }
    c.expect(worst <= kPatternTol, "separations disagree with the common-ancestor oracle");
    const auto path = tree_ends(build(GallerySpec{"tree-balls", n, "path"}), n).classes;
    const auto star = tree_ends(build(GallerySpec{"tree-balls", n, "star3"}), n).classes;
    c.expect(path == 1, "path: " + std::to_string(path) + " classes");
    c.expect(star == 3, "star3: " + std::to_string(star) + " classes");
    c.note("binary", rep.classes);
    c.note("path", path);
    c.note("star3", star);
}

// ---------------------------------------------------------------- 10: depth stability

void depth_stability(Check& c) {
    double worst = 0.0;
    std::string worst_name;
    for (const auto& name : gallery_names()) {
        GallerySpec spec{name, 10};
        const auto sys = build(spec);
        const double spacing = aligned_spacing(spec);
        const double h = hausdorff(sys, sample_cloud(sys, 6, spacing), sample_cloud(sys, 10, spacing));
        c.expect(h <= kStabilityBound, name + ": " + std::to_string(h));
        if (h >= worst) worst = h, worst_name = name;
    }
    c.note("worst", worst);
    c.note("at", worst_name);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"collapse search, replay and brute-force oracle", collapse_soundness},
        {"simplicial and cubical geometric collapses", geometric_collapses},
        {"track faithfulness of gallery bonds", track_faithfulness},
        {"bond cocycle", cocycle},
        {"insulation verdicts", insulation},
        {"bucket handle convergence", bucket_convergence},
        {"remainder sampling", remainder_sampling},
        {"telescope homotopy", telescope_homotopy},
        {"tree ends", tree_ends_counts},
        {"depth stability", depth_stability},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[k].second(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = c.failures == 0;
        failed += !ok;
        std::printf("criterion %2zu %s  %s [%.1fs] %s%s%s\n", k + 1, ok ? "PASS" : "FAIL", criteria[k].first.c_str(), secs,
                    c.facts.str().c_str(), ok ? "" : " | ", c.why.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
