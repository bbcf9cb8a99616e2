#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "gallery_builders.hpp"

namespace collapsekit {

namespace {

struct RootedTree {
    Vertex root = 0;
    std::map<Vertex, Vertex> parent;
    std::map<Vertex, int> depth;
    std::vector<Vertex> bfs;
};

RootedTree root_tree(const std::vector<std::pair<int, int>>& edges, Vertex root, const std::set<Vertex>& extra = {}) {
    std::map<Vertex, std::vector<Vertex>> adj;
    std::set<Vertex> verts(extra);
    verts.insert(root);
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
        if (a == b) throw NotATree("self-loop at vertex " + std::to_string(a));
        if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
            throw NotATree("repeated edge " + std::to_string(a) + "-" + std::to_string(b));
        adj[a].push_back(b);
        adj[b].push_back(a);
        verts.insert(a);
        verts.insert(b);
    }
    if (edges.size() + 1 != verts.size())
        throw NotATree(edges.size() + 1 > verts.size() ? "edge list contains a cycle" : "edge list is disconnected");
    RootedTree t;
    t.root = root;
    t.parent[root] = root;
    t.depth[root] = 0;
    std::deque<Vertex> queue{root};
    while (!queue.empty()) {
        const Vertex v = queue.front();
        queue.pop_front();
        t.bfs.push_back(v);
        auto nbrs = adj[v];
        std::sort(nbrs.begin(), nbrs.end());
        for (Vertex w : nbrs)
            if (!t.depth.count(w)) {
                t.parent[w] = v;
                t.depth[w] = t.depth[v] + 1;
                queue.push_back(w);
            }
    }
    if (t.bfs.size() != verts.size()) throw NotATree("edge list is disconnected");
    return t;
}

SimplicialComplex tree_complex(const std::set<Vertex>& verts, const RootedTree& t) {
    std::vector<Simplex> gens;
    for (Vertex v : verts) {
        gens.push_back({v});
        if (v != t.root && verts.count(t.parent.at(v))) gens.push_back(make_simplex({t.parent.at(v), v}));
    }
    return SimplicialComplex::closure_of(gens);
}

// Vertices of a named tree in breadth-first order, `count` of them.
TreeGraph bfs_prefix(const std::string& name, int count) {
    int radius = 1;
    auto size_at = [&](int r) {
        if (name == "binary") return (1L << (r + 1)) - 1;
        if (name == "star3") return 3L * r + 1;
        if (name == "star") return 1L + count;
        return static_cast<long>(r) + 1;
    };
    while (size_at(radius) < count) ++radius;
    auto full = named_tree(name, name == "star" ? count : radius);
    const auto t = root_tree(full.edges, full.root);
    std::set<Vertex> keep(t.bfs.begin(), t.bfs.begin() + std::min<std::size_t>(t.bfs.size(), static_cast<std::size_t>(count)));
    TreeGraph out;
    out.root = full.root;
    for (auto [a, b] : full.edges)
        if (keep.count(a) && keep.count(b)) out.edges.emplace_back(a, b);
    return out;
}

} // namespace

TreeGraph named_tree(const std::string& name, int radius) {
    if (radius < 0) throw InvalidSpec("tree radius must be nonnegative");
    TreeGraph g;
    if (name == "binary") {
        if (radius > 18) throw InvalidSpec("binary tree radius is capped at 18");
        const int last = (1 << (radius + 1)) - 1;
        for (int v = 1; v < last; ++v) g.edges.emplace_back((v - 1) / 2, v);
    } else if (name == "path") {
        for (int v = 0; v < radius; ++v) g.edges.emplace_back(v, v + 1);
    } else if (name == "star3") {
        for (int d = 1; d <= radius; ++d)
            for (int r = 0; r < 3; ++r) g.edges.emplace_back(d == 1 ? 0 : 3 * (d - 2) + r + 1, 3 * (d - 1) + r + 1);
    } else if (name == "star") {
        // The infinite star truncated to `radius` spokes.
        for (int v = 1; v <= radius; ++v) g.edges.emplace_back(0, v);
    } else {
        throw InvalidSpec("unknown tree '" + name + "' (binary, path, star3, star)");
    }
    return g;
}

InverseSystem countable_tree_filtration(const std::vector<std::pair<int, int>>& edges, const std::vector<int>& order,
                                        int depth, json spec) {
    if (order.empty()) throw InvalidSpec("the vertex enumeration is empty");
    const auto t = root_tree(edges, order.front(), {order.begin(), order.end()});
    std::set<Vertex> current{t.root};
    std::vector<std::shared_ptr<const ComplexSpace>> spaces{std::make_shared<ComplexSpace>(tree_complex(current, t))};
    std::vector<std::vector<CollapseStep>> schedules;
    for (std::size_t k = 1; k < order.size() && static_cast<int>(schedules.size()) < depth; ++k) {
        Vertex w = order[k];
        if (current.count(w)) continue;
        // The arc from w back to the subtree, collapsed starting at its far end.
        std::vector<CollapseStep> steps;
        while (!current.count(w)) {
            const Vertex p = t.parent.at(w);
            steps.push_back({{w}, make_simplex({p, w})});
            current.insert(w);
            w = p;
        }
        spaces.push_back(std::make_shared<ComplexSpace>(tree_complex(current, t)));
        schedules.push_back(std::move(steps));
    }
    std::vector<MapPtr> bonds;
    for (std::size_t i = 0; i < schedules.size(); ++i)
        bonds.push_back(std::make_shared<ScheduleMap>(spaces[i + 1], spaces[i], schedules[i]));
    std::string name = spec.is_object() ? spec.value("gallery", std::string("tree-countable")) : "tree-countable";
    return InverseSystem(std::move(name), {spaces.begin(), spaces.end()}, std::move(bonds), std::move(spec));
}

json TreeEndsReport::to_json() const {
    return {{"depth", depth},
            {"candidates", candidates},
            {"classes", classes},
            {"threshold", threshold},
            {"min_separation", min_separation},
            {"max_separation", max_separation},
            {"pattern_error", pattern_error}};
}

TreeEndsReport tree_ends(const InverseSystem& sys, int depth) {
    const std::string kind = sys.spec().is_object() ? sys.spec().value("gallery", std::string()) : std::string();
    if (kind != "tree-balls" && kind != "tree-countable")
        throw WrongSystemKind("tree_ends needs a tree-balls or tree-countable system, got '" + sys.name() + "'");
    if (depth < 0 || depth > sys.depth()) throw IndexOutOfRange("depth beyond the loaded prefix");
    const bool balls = kind == "tree-balls";
    const auto& top = dynamic_cast<const ComplexSpace&>(*sys.space(depth)).complex();

    std::vector<Vertex> leaves;
    if (balls) {
        const auto* below = depth > 0 ? &dynamic_cast<const ComplexSpace&>(*sys.space(depth - 1)).complex() : nullptr;
        for (Vertex v : top.vertices)
            if (!below || !below->vertices.count(v)) leaves.push_back(v);
    } else {
        std::map<Vertex, int> degree;
        for (const auto& s : top.simplices)
            if (s.size() == 2) ++degree[s[0]], ++degree[s[1]];
        const Vertex root = *dynamic_cast<const ComplexSpace&>(*sys.space(0)).complex().vertices.begin();
        for (Vertex v : top.vertices)
            if (v != root && degree[v] <= 1) leaves.push_back(v);
        if (leaves.empty()) leaves.push_back(root);
    }

    TreeEndsReport rep;
    rep.depth = depth;
    rep.candidates = leaves.size();
    rep.threshold = balls ? std::ldexp(1.0, -(depth + 1)) : 0.0;
    std::vector<Thread> threads;
    for (Vertex v : leaves) threads.push_back(thread_of(sys, ComplexSpace::vertex_point(v), depth));
    std::vector<std::size_t> all(threads.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto classes = eps_components(sys, threads, all, rep.threshold);
    rep.classes = classes.size();

    rep.min_separation = classes.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t a = 0; a < classes.size(); ++a)
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            const auto& ta = threads[classes[a].front()];
            const auto& tb = threads[classes[b].front()];
            const double d = product_metric(sys, ta, tb);
            rep.min_separation = std::min(rep.min_separation, d);
            rep.max_separation = std::max(rep.max_separation, d);
            if (balls) {
                int k = 0;
                while (k < depth && ta.coords[static_cast<std::size_t>(k + 1)] == tb.coords[static_cast<std::size_t>(k + 1)]) ++k;
                const double expected = std::ldexp(1.0, -k) - std::ldexp(1.0, -depth);
                rep.pattern_error = std::max(rep.pattern_error, std::abs(d - expected));
            }
        }
    return rep;
}

namespace detail {

InverseSystem tree_ball_system(const GallerySpec& spec) {
    TreeGraph g;
    if (!spec.edges.empty()) {
        g.edges = spec.edges;
        g.root = spec.order.empty() ? std::min(spec.edges.front().first, spec.edges.front().second) : spec.order.front();
    } else {
        if (spec.tree == "star") throw InvalidSpec("the infinite star is not locally finite; use tree-countable");
        g = named_tree(spec.tree, spec.depth);
    }
    const auto t = root_tree(g.edges, g.root);
    std::vector<std::shared_ptr<const ComplexSpace>> spaces;
    for (int i = 0; i <= spec.depth; ++i) {
        std::set<Vertex> ball;
        for (const auto& [v, d] : t.depth)
            if (d <= i) ball.insert(v);
        spaces.push_back(std::make_shared<ComplexSpace>(tree_complex(ball, t)));
    }
    std::vector<MapPtr> bonds;
    for (int i = 1; i <= spec.depth; ++i) {
        // Every outer edge of the ball, crushed onto its inner endpoint.
        std::vector<CollapseStep> steps;
        for (const auto& [v, d] : t.depth)
            if (d == i) steps.push_back({{v}, make_simplex({t.parent.at(v), v})});
        bonds.push_back(std::make_shared<ScheduleMap>(spaces[i], spaces[i - 1], std::move(steps)));
    }
    return InverseSystem(spec.name, {spaces.begin(), spaces.end()}, std::move(bonds), spec.to_json());
}

InverseSystem countable_tree_system(const GallerySpec& spec) {
    if (!spec.edges.empty()) {
        std::vector<int> order = spec.order;
        if (order.empty()) order = root_tree(spec.edges, std::min(spec.edges.front().first, spec.edges.front().second)).bfs;
        return countable_tree_filtration(spec.edges, order, spec.depth, spec.to_json());
    }
    named_tree(spec.tree, 0);
    const auto g = bfs_prefix(spec.tree, spec.depth + 1);
    return countable_tree_filtration(g.edges, root_tree(g.edges, g.root).bfs, spec.depth, spec.to_json());
}

InverseSystem rn_shell_system(const GallerySpec& spec) {
    const int n = spec.dimension;
    if (n < 1 || n > 4) throw InvalidSpec("rn-shells dimension must lie in [1, 4]");
    if (spec.depth > 64) throw InvalidSpec("rn-shells depth is capped at 64");
    const int shells = spec.depth - 1;
    const auto filt = rn_shell_filtration(n, shells);
    const SimplexChart chart(n);
    std::vector<double> center(static_cast<std::size_t>(n), 0.0);
    for (const auto& p : chart.vertices())
        for (std::size_t k = 0; k < center.size(); ++k) center[k] += p[k] / (n + 1);
    std::map<Vertex, std::vector<double>> positions;
    for (Vertex w : filt.complex.vertices) {
        const int v = w % filt.stride, level = w / filt.stride;
        std::vector<double> x(center);
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] += (level + 1) * (chart.vertices()[static_cast<std::size_t>(v)][k] - center[k]);
        positions[w] = std::move(x);
    }
    // C_depth is the whole complex; each stage of the schedule peels one bond.
    std::vector<SimplicialComplex> complexes(static_cast<std::size_t>(spec.depth) + 1);
    std::vector<std::vector<CollapseStep>> stages(static_cast<std::size_t>(spec.depth) + 1);
    complexes.back() = filt.complex;
    std::size_t begin = 0;
    for (std::size_t q = 0; q < filt.schedule.stage_ends.size(); ++q) {
        const std::size_t end = filt.schedule.stage_ends[q];
        const auto bond = static_cast<std::size_t>(spec.depth) - q;
        CollapseSchedule part;
        part.steps.assign(filt.schedule.steps.begin() + static_cast<std::ptrdiff_t>(begin),
                          filt.schedule.steps.begin() + static_cast<std::ptrdiff_t>(end));
        complexes[bond - 1] = replay(complexes[bond], part);
        stages[bond] = std::move(part.steps);
        begin = end;
    }
    std::vector<std::shared_ptr<const ComplexSpace>> spaces;
    for (const auto& k : complexes) {
        std::map<Vertex, std::vector<double>> pos;
        for (Vertex v : k.vertices) pos[v] = positions.at(v);
        spaces.push_back(std::make_shared<ComplexSpace>(k, std::move(pos), 8));
    }
    std::vector<MapPtr> bonds;
    for (int i = 1; i <= spec.depth; ++i)
        bonds.push_back(std::make_shared<ScheduleMap>(spaces[i], spaces[i - 1], stages[static_cast<std::size_t>(i)]));
    return InverseSystem(spec.name, {spaces.begin(), spaces.end()}, std::move(bonds), spec.to_json());
}

} // namespace detail

} // namespace collapsekit
