#include "collapsekit/limitkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "collapsekit/parallel.hpp"

namespace collapsekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

using ThreadKey = std::vector<std::pair<std::vector<int>, std::vector<double>>>;

ThreadKey key_of(const Thread& t) {
    ThreadKey k;
    k.reserve(t.coords.size());
    for (const auto& p : t.coords) k.emplace_back(p.carrier, p.coords);
    return k;
}

// Threads with their coordinates embedded once, when every level's metric is Euclidean in its embedding.
class ThreadTable {
public:
    ThreadTable(const InverseSystem& sys, const std::vector<Thread>& threads, const MetricConfig& m)
        : sys_(sys), threads_(threads), m_(m) {
        if (threads.empty()) return;
        const int depth = threads.front().depth();
        for (int i = 0; i <= depth; ++i)
            if (!sys.space(i)->euclidean_embedding()) return;
        flat_.resize(threads.size());
        parallel_for(threads.size(), [&](std::size_t k) {
            for (int i = 0; i <= depth; ++i) {
                auto e = sys.space(i)->embed(threads[k].coords[static_cast<std::size_t>(i)]);
                flat_[k].insert(flat_[k].end(), e.begin(), e.end());
            }
        });
        for (int i = 0; i <= depth; ++i) offsets_.push_back(sys.space(i)->embed(threads.front().coords[static_cast<std::size_t>(i)]).size());
        for (const auto& f : flat_)
            if (f.size() != flat_.front().size()) {
                flat_.clear();
                return;
            }
    }

    const Thread& operator[](std::size_t k) const { return threads_[k]; }
    std::size_t size() const { return threads_.size(); }

    /// Product-metric distance between thread a of this table and thread b of `other`.
    double distance(std::size_t a, const ThreadTable& other, std::size_t b) const {
        if (flat_.empty() || other.flat_.empty() || offsets_ != other.offsets_)
            return product_metric(sys_, threads_[a], other.threads_[b], m_);
        const double* x = flat_[a].data();
        const double* y = other.flat_[b].data();
        double sum = 0.0, w = 1.0;
        for (std::size_t len : offsets_) {
            double s = 0.0;
            for (std::size_t k = 0; k < len; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
            if (s > 0.0) sum += w * std::min(std::sqrt(s), m_.cap);
            x += len;
            y += len;
            w *= m_.ratio;
        }
        return sum;
    }

private:
    const InverseSystem& sys_;
    const std::vector<Thread>& threads_;
    MetricConfig m_;
    std::vector<std::vector<double>> flat_;
    std::vector<std::size_t> offsets_;
};

// Min distance from each thread of `from` to the set `to`.
std::vector<double> nearest(const InverseSystem& sys, const std::vector<Thread>& from, const std::vector<Thread>& to,
                            const MetricConfig& m) {
    std::vector<double> out(from.size(), kInf);
    std::set<ThreadKey> exact;
    for (const auto& t : to) exact.insert(key_of(t));
    std::vector<char> hit(from.size());
    std::vector<Thread> rest;
    std::vector<std::size_t> rest_index;
    for (std::size_t i = 0; i < from.size(); ++i)
        if (exact.count(key_of(from[i]))) out[i] = 0.0;
        else {
            rest.push_back(from[i]);
            rest_index.push_back(i);
        }
    if (rest.empty() || to.empty()) return out;
    const ThreadTable a(sys, rest, m), b(sys, to, m);
    parallel_for(rest.size(), [&](std::size_t i) {
        double best = kInf;
        for (std::size_t k = 0; k < b.size() && best > 0.0; ++k) best = std::min(best, a.distance(i, b, k));
        out[rest_index[i]] = best;
    });
    return out;
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a), b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

Thread Thread::truncated(int d) const {
    if (d < 0 || d > depth()) throw DepthMismatch("cannot truncate a depth-" + std::to_string(depth()) + " thread to " +
                                                  std::to_string(d));
    return {std::vector<GeometricPoint>(coords.begin(), coords.begin() + d + 1)};
}

double consistency_defect(const InverseSystem& sys, const Thread& t) {
    double worst = 0.0;
    for (int i = 1; i <= t.depth(); ++i) {
        const auto& xi = t.coords[static_cast<std::size_t>(i)];
        const auto& prev = t.coords[static_cast<std::size_t>(i - 1)];
        worst = std::max(worst, sys.space(i - 1)->distance(sys.bond(i)->eval(xi), prev));
    }
    return worst;
}

std::optional<int> stabilization_index(const InverseSystem& sys, const Thread& t, double tol) {
    const int n = t.depth();
    const auto& top = t.coords.back();
    const auto& space = *sys.space(n);
    int i = n;
    while (i > 0 && space.distance(t.coords[static_cast<std::size_t>(i - 1)], top) <= tol) --i;
    if (i == n && n > 0) return std::nullopt;
    return i;
}

bool is_stable(const InverseSystem& sys, const Thread& t, int window, double tol) {
    const int n = t.depth();
    const auto& space = *sys.space(n);
    for (int k = std::max(0, n - window + 1); k < n; ++k)
        if (space.distance(t.coords[static_cast<std::size_t>(k)], t.coords.back()) > tol) return false;
    return true;
}

Thread thread_of(const InverseSystem& sys, const GeometricPoint& x, int depth) {
    if (depth < 0 || depth > sys.depth()) throw IndexOutOfRange("depth beyond the loaded prefix");
    Thread t;
    t.coords.resize(static_cast<std::size_t>(depth) + 1);
    t.coords.back() = x;
    for (int i = depth; i >= 1; --i)
        t.coords[static_cast<std::size_t>(i - 1)] = sys.bond(i)->eval(t.coords[static_cast<std::size_t>(i)]);
    return t;
}

Thread embed_e(const InverseSystem& sys, const GeometricPoint& x, int depth) {
    const int k = sys.level_of(x);
    if (k < 0 || k > depth || depth > sys.depth())
        throw IndexOutOfRange("point not in C_k for any k <= depth");
    Thread t = thread_of(sys, x, k);
    t.coords.resize(static_cast<std::size_t>(depth) + 1, x);
    return t;
}

double product_metric(const InverseSystem& sys, const Thread& a, const Thread& b, const MetricConfig& m) {
    if (a.depth() != b.depth())
        throw DepthMismatch("threads of depth " + std::to_string(a.depth()) + " and " + std::to_string(b.depth()));
    double sum = 0.0, w = 1.0;
    for (int i = 0; i <= a.depth(); ++i, w *= m.ratio) {
        const auto& p = a.coords[static_cast<std::size_t>(i)];
        const auto& q = b.coords[static_cast<std::size_t>(i)];
        if (p == q) continue;
        sum += w * std::min(sys.space(i)->distance(p, q), m.cap);
    }
    return sum;
}

ThreadCloud sample_cloud(const InverseSystem& sys, int depth, double spacing) {
    if (depth < 0 || depth > sys.depth()) throw IndexOutOfRange("depth beyond the loaded prefix");
    const auto grid = sys.space(depth)->grid(spacing);
    std::vector<Thread> threads(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { threads[i] = thread_of(sys, grid[i], depth); });
    ThreadCloud cloud;
    cloud.depth = depth;
    std::set<ThreadKey> seen;
    for (auto& t : threads)
        if (seen.insert(key_of(t)).second) cloud.threads.push_back(std::move(t));
    cloud.labels = {{"system", sys.name()}, {"depth", depth}, {"spacing", spacing}, {"grid_points", grid.size()}};
    return cloud;
}

std::vector<std::vector<std::size_t>> eps_components(const InverseSystem& sys, const std::vector<Thread>& threads,
                                                     const std::vector<std::size_t>& members, double eps,
                                                     const MetricConfig& m) {
    const std::size_t n = members.size();
    std::vector<Thread> chosen;
    chosen.reserve(n);
    for (std::size_t k : members) chosen.push_back(threads[k]);
    const ThreadTable table(sys, chosen, m);
    std::vector<std::vector<std::size_t>> near(n);
    parallel_for(n, [&](std::size_t a) {
        for (std::size_t b = a + 1; b < n; ++b)
            if (table.distance(a, table, b) <= eps) near[a].push_back(b);
    });
    DisjointSets ds(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b : near[a]) ds.unite(a, b);
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t a = 0; a < n; ++a) groups[ds.find(a)].push_back(members[a]);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, g] : groups) out.push_back(std::move(g));
    return out;
}

json RemainderReport::to_json() const {
    return {{"window", window},
            {"eps", eps},
            {"stable", stable.size()},
            {"remainder_candidates", remainder.size()},
            {"density_gap", finite_or_null(density_gap)},
            {"stable_gap", finite_or_null(stable_gap)},
            {"remainder_components", remainder_components},
            {"remainder_diameter", remainder_diameter}};
}

RemainderReport classify(const InverseSystem& sys, const ThreadCloud& cloud, const SampleOptions& options) {
    RemainderReport rep;
    rep.window = options.window;
    rep.eps = options.eps;
    std::vector<char> stable(cloud.threads.size());
    parallel_for(cloud.threads.size(), [&](std::size_t i) {
        stable[i] = is_stable(sys, cloud.threads[i], options.window, options.tol);
    });
    std::vector<Thread> rem, st;
    for (std::size_t i = 0; i < stable.size(); ++i) {
        (stable[i] ? rep.stable : rep.remainder).push_back(i);
        (stable[i] ? st : rem).push_back(cloud.threads[i]);
    }
    const auto to_rem = nearest(sys, cloud.threads, rem, options.metric);
    const auto to_st = nearest(sys, cloud.threads, st, options.metric);
    rep.density_gap = to_rem.empty() ? 0.0 : *std::max_element(to_rem.begin(), to_rem.end());
    rep.stable_gap = to_st.empty() ? 0.0 : *std::max_element(to_st.begin(), to_st.end());
    rep.remainder_components = eps_components(sys, cloud.threads, rep.remainder, options.eps, options.metric).size();
    const ThreadTable rem_table(sys, rem, options.metric);
    std::vector<double> diam(rem.size(), 0.0);
    parallel_for(rem.size(), [&](std::size_t a) {
        for (std::size_t b = a + 1; b < rem.size(); ++b) diam[a] = std::max(diam[a], rem_table.distance(a, rem_table, b));
    });
    rep.remainder_diameter = diam.empty() ? 0.0 : *std::max_element(diam.begin(), diam.end());
    return rep;
}

std::pair<ThreadCloud, RemainderReport> sample_limit(const InverseSystem& sys, int depth, const SampleOptions& options) {
    auto cloud = sample_cloud(sys, depth, options.spacing);
    cloud.labels["window"] = options.window;
    auto rep = classify(sys, cloud, options);
    return {std::move(cloud), std::move(rep)};
}

ThreadCloud truncate(const ThreadCloud& c, int depth) {
    ThreadCloud out;
    out.depth = depth;
    out.labels = c.labels;
    out.labels["truncated_to"] = depth;
    std::set<ThreadKey> seen;
    for (const auto& t : c.threads) {
        auto s = t.truncated(depth);
        if (seen.insert(key_of(s)).second) out.threads.push_back(std::move(s));
    }
    return out;
}

double hausdorff(const InverseSystem& sys, const ThreadCloud& a, const ThreadCloud& b, const MetricConfig& m) {
    for (const auto* c : {&a, &b})
        for (const auto& t : c->threads)
            if (t.depth() != c->depth) throw DepthMismatch("cloud contains a thread of the wrong depth");
    const int d = std::min(a.depth, b.depth);
    const auto ta = a.depth == d ? a : truncate(a, d);
    const auto tb = b.depth == d ? b : truncate(b, d);
    if (ta.threads.empty() || tb.threads.empty()) return ta.threads.empty() && tb.threads.empty() ? 0.0 : kInf;
    const auto ab = nearest(sys, ta.threads, tb.threads, m);
    const auto ba = nearest(sys, tb.threads, ta.threads, m);
    return std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
}

namespace {

GeometricPoint level_homotopy(const InverseSystem& sys, int i, const GeometricPoint& x, double t) {
    if (i == 0) return x;
    if (t <= std::ldexp(1.0, -i)) return x;
    if (t <= std::ldexp(1.0, -(i - 1))) return sys.bond(i)->track(x, std::ldexp(t, i) - 1.0);
    return level_homotopy(sys, i - 1, sys.bond(i)->eval(x), t);
}

} // namespace

Thread homotopy_H(const InverseSystem& sys, const Thread& x, double t) {
    if (x.depth() > sys.depth()) throw DepthMismatch("thread deeper than the system");
    for (int i = 1; i <= x.depth(); ++i)
        if (!sys.bond(i)->has_tracks()) throw MissingHomotopy("bond r_" + std::to_string(i) + " carries no tracks");
    t = std::clamp(t, 0.0, 1.0);
    Thread out;
    out.coords.reserve(x.coords.size());
    for (int i = 0; i <= x.depth(); ++i) out.coords.push_back(level_homotopy(sys, i, x.coords[static_cast<std::size_t>(i)], t));
    return out;
}

json NegligibilityReport::to_json() const {
    json j{{"passed", passed()},
           {"stable", stable_ok},
           {"commutes", commutes_ok},
           {"track_faithful", tracks_ok},
           {"worst_defect", worst_defect},
           {"worst_track_violation", worst_track},
           {"threads", threads},
           {"times", times}};
    if (witness_bond) j["witness_bond"] = *witness_bond;
    if (witness_point) {
        j["witness_point"] = collapsekit::to_json(*witness_point);
        j["witness_t"] = witness_t;
    }
    return j;
}

NegligibilityReport homotopy_negligibility_check(const InverseSystem& sys, int depth,
                                                 const NegligibilityOptions& options) {
    if (depth < 1 || depth > sys.depth()) throw IndexOutOfRange("depth beyond the loaded prefix");
    NegligibilityReport rep;
    std::vector<double> ts = options.ts;
    if (ts.empty()) {
        ts = time_grid(17);
        for (int j = 0; j <= depth; ++j) ts.push_back(std::ldexp(1.0, -j));
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    }
    rep.times = ts.size();

    auto cloud = sample_cloud(sys, depth, options.spacing);
    std::vector<Thread> threads;
    const std::size_t stride = std::max<std::size_t>(1, cloud.threads.size() / std::max<std::size_t>(1, options.sample_budget));
    for (std::size_t i = 0; i < cloud.threads.size(); i += stride) threads.push_back(cloud.threads[i]);
    rep.threads = threads.size();

    // (c) first: a bond that is not track-faithful makes the assembled H meaningless.
    for (int k = 1; k <= depth; ++k) {
        HomotopyEvaluator h(sys.bond(k));
        auto samples = sys.space(k)->grid(options.spacing);
        for (const auto& t : threads) samples.push_back(t.coords[static_cast<std::size_t>(k)]);
        const auto tr = track_faithful_check(h, samples, ts, options.tol);
        if (tr.worst > rep.worst_track) rep.worst_track = tr.worst;
        if (!tr.passed && rep.tracks_ok) {
            rep.tracks_ok = false;
            rep.witness_bond = k;
            rep.witness_point = tr.witness;
            rep.witness_t = tr.witness_t;
        }
    }

    std::vector<double> defect(threads.size(), 0.0);
    std::vector<char> stable_ok(threads.size(), 1);
    parallel_for(threads.size(), [&](std::size_t n) {
        for (double t : ts) {
            const auto y = homotopy_H(sys, threads[n], t);
            defect[n] = std::max(defect[n], consistency_defect(sys, y));
            if (t <= 0.0 || t < std::ldexp(1.0, -depth)) continue;
            int jt = 0;
            while (std::ldexp(1.0, -jt) > t) ++jt;
            // The last coordinate always agrees with itself, so an unobserved index counts as depth.
            if (stabilization_index(sys, y, options.tol).value_or(depth) > jt) stable_ok[n] = 0;
        }
    });
    for (std::size_t n = 0; n < threads.size(); ++n) {
        rep.worst_defect = std::max(rep.worst_defect, defect[n]);
        if (!stable_ok[n] && rep.stable_ok) {
            rep.stable_ok = false;
            if (!rep.witness) rep.witness = threads[n];
        }
        if (defect[n] > options.tol && rep.commutes_ok) {
            rep.commutes_ok = false;
            if (!rep.witness) rep.witness = threads[n];
        }
    }
    return rep;
}

std::string cloud_csv(const InverseSystem& sys, const ThreadCloud& cloud, const RemainderReport& rep) {
    std::vector<char> is_rem(cloud.threads.size(), 0);
    for (auto i : rep.remainder) is_rem[i] = 1;
    std::ostringstream os;
    os << "index,stabilization,class";
    if (!cloud.threads.empty()) {
        const auto& t = cloud.threads.front();
        for (int i = 0; i <= t.depth(); ++i) {
            const auto e = sys.space(i)->embed(t.coords[static_cast<std::size_t>(i)]);
            for (std::size_t k = 0; k < e.size(); ++k) os << ",x" << i << '_' << k;
        }
    }
    os << '\n';
    for (std::size_t n = 0; n < cloud.threads.size(); ++n) {
        const auto& t = cloud.threads[n];
        const auto idx = stabilization_index(sys, t);
        os << n << ',' << (idx ? std::to_string(*idx) : std::string("none")) << ','
           << (is_rem[n] ? "remainder" : "stable");
        for (int i = 0; i <= t.depth(); ++i)
            for (double v : sys.space(i)->embed(t.coords[static_cast<std::size_t>(i)])) os << ',' << fmt12(v);
        os << '\n';
    }
    return os.str();
}

} // namespace collapsekit
