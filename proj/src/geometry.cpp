#include "collapsekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace collapsekit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZero = 1e-13;

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Compositions of m into k positive parts, as barycentric coordinates with denominator m.
void interior_lattice(std::size_t k, int m, std::vector<std::vector<double>>& out) {
    if (static_cast<int>(k) > m) return;
    std::vector<int> parts(k, 1);
    parts.back() = m - static_cast<int>(k) + 1;
    auto emit = [&] {
        std::vector<double> b(k);
        for (std::size_t i = 0; i < k; ++i) b[i] = static_cast<double>(parts[i]) / m;
        out.push_back(std::move(b));
    };
    if (k == 1) {
        emit();
        return;
    }
    // Enumerate by recursion over the first k-1 parts.
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == k) {
            parts[i] = left;
            emit();
            return;
        }
        for (int v = 1; v <= left - static_cast<int>(k - i - 1); ++v) {
            parts[i] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, m);
}

} // namespace

json to_json(const GeometricPoint& p) { return {{"carrier", p.carrier}, {"coords", p.coords}}; }

GeometricPoint point_from_json(const json& j) {
    GeometricPoint p;
    if (j.is_array()) {
        p.coords = j.get<std::vector<double>>();
        return p;
    }
    if (j.contains("carrier")) {
        if (j["carrier"].is_array())
            p.carrier = j["carrier"].get<std::vector<int>>();
        else
            p.carrier = {j["carrier"].get<int>()};
    }
    p.coords = j.at("coords").get<std::vector<double>>();
    return p;
}

GeometricPoint euclidean_point(std::vector<double> coords) { return {{}, std::move(coords)}; }

double point_simplex_distance(std::span<const double> x, const std::vector<std::vector<double>>& vertices) {
    if (vertices.empty()) return kInf;
    const auto rows = static_cast<Eigen::Index>(x.size());
    const Eigen::Map<const Eigen::VectorXd> target(x.data(), rows);
    // Project onto the affine hull; if the foot leaves the simplex, the nearest point lies on a facet.
    std::function<double(const std::vector<std::size_t>&)> rec = [&](const std::vector<std::size_t>& f) -> double {
        const Eigen::Map<const Eigen::VectorXd> b0(vertices[f[0]].data(), rows);
        if (f.size() == 1) return (target - b0).norm();
        Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(f.size() - 1));
        for (std::size_t i = 1; i < f.size(); ++i)
            a.col(static_cast<Eigen::Index>(i - 1)) = Eigen::Map<const Eigen::VectorXd>(vertices[f[i]].data(), rows) - b0;
        const Eigen::VectorXd w = a.colPivHouseholderQr().solve(target - b0);
        if (w.minCoeff() >= -1e-12 && w.sum() <= 1.0 + 1e-12) return (a * w + b0 - target).norm();
        double best = kInf;
        for (std::size_t drop = 0; drop < f.size(); ++drop) {
            std::vector<std::size_t> g;
            for (std::size_t i = 0; i < f.size(); ++i)
                if (i != drop) g.push_back(f[i]);
            best = std::min(best, rec(g));
        }
        return best;
    };
    std::vector<std::size_t> all(vertices.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return rec(all);
}

std::vector<GeometricPoint> Space::random_points(std::size_t count, std::mt19937_64& rng) const {
    auto cloud = grid(1.0 / 16.0);
    std::vector<GeometricPoint> out;
    if (cloud.empty()) return out;
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(cloud[pick(rng)]);
    return out;
}

// ---------------------------------------------------------------------------------------------- BoxSpace

BoxSpace::BoxSpace(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw std::invalid_argument("box bounds differ in dimension");
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (hi_[i] < lo_[i]) throw std::invalid_argument("box has hi < lo");
}

double BoxSpace::distance(const GeometricPoint& a, const GeometricPoint& b) const {
    return euclid(a.coords, b.coords);
}

bool BoxSpace::contains(const GeometricPoint& p, double tol) const {
    if (!p.carrier.empty() || p.coords.size() != lo_.size()) return false;
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (p.coords[i] < lo_[i] - tol || p.coords[i] > hi_[i] + tol) return false;
    return true;
}

std::vector<GeometricPoint> BoxSpace::grid(double spacing) const {
    std::vector<int> steps(lo_.size());
    for (;;) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < lo_.size(); ++i) {
            const double len = hi_[i] - lo_[i];
            steps[i] = len == 0.0 ? 0 : std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
            total *= static_cast<std::size_t>(steps[i] + 1);
        }
        if (total <= kMaxGrid) break;
        spacing *= 2.0;
    }
    std::vector<GeometricPoint> out;
    std::vector<int> idx(lo_.size(), 0);
    for (;;) {
        std::vector<double> x(lo_.size());
        for (std::size_t i = 0; i < lo_.size(); ++i)
            x[i] = steps[i] == 0 ? lo_[i]
                                 : (idx[i] == steps[i] ? hi_[i] : lo_[i] + (hi_[i] - lo_[i]) * idx[i] / steps[i]);
        out.push_back(euclidean_point(std::move(x)));
        std::size_t k = 0;
        while (k < idx.size() && idx[k] == steps[k]) idx[k++] = 0;
        if (k == idx.size()) break;
        ++idx[k];
    }
    return out;
}

std::vector<GeometricPoint> BoxSpace::landmarks() const {
    // Corners and center.
    std::vector<GeometricPoint> out;
    std::vector<std::size_t> free_axes;
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (hi_[i] > lo_[i]) free_axes.push_back(i);
    const std::size_t corners = free_axes.size() < 12 ? (std::size_t{1} << free_axes.size()) : 0;
    for (std::size_t mask = 0; mask < corners; ++mask) {
        auto x = lo_;
        for (std::size_t b = 0; b < free_axes.size(); ++b)
            if (mask >> b & 1) x[free_axes[b]] = hi_[free_axes[b]];
        out.push_back(euclidean_point(std::move(x)));
    }
    std::vector<double> c(lo_.size());
    for (std::size_t i = 0; i < lo_.size(); ++i) c[i] = (lo_[i] + hi_[i]) / 2;
    out.push_back(euclidean_point(std::move(c)));
    return out;
}

std::vector<GeometricPoint> BoxSpace::random_points(std::size_t count, std::mt19937_64& rng) const {
    std::vector<GeometricPoint> out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> x(lo_.size());
        for (std::size_t i = 0; i < lo_.size(); ++i) x[i] = lo_[i] + (hi_[i] - lo_[i]) * u(rng);
        out.push_back(euclidean_point(std::move(x)));
    }
    return out;
}

json BoxSpace::to_json() const { return {{"kind", "box"}, {"lo", lo_}, {"hi", hi_}}; }

// ------------------------------------------------------------------------------------------ ComplexSpace

ComplexSpace::ComplexSpace(SimplicialComplex complex, std::map<Vertex, std::vector<double>> positions, int face_refine)
    : complex_(std::move(complex)), metric_(Metric::Euclidean), positions_(std::move(positions)),
      face_refine_(std::max(1, face_refine)) {
    std::size_t dim = positions_.empty() ? 0 : positions_.begin()->second.size();
    for (Vertex v : complex_.vertices) {
        auto it = positions_.find(v);
        if (it == positions_.end()) throw std::invalid_argument("vertex " + std::to_string(v) + " has no position");
        if (it->second.size() != dim) throw std::invalid_argument("vertex positions differ in dimension");
    }
}

ComplexSpace::ComplexSpace(SimplicialComplex tree) : complex_(std::move(tree)), metric_(Metric::TreePath) {
    if (complex_.dimension() > 1) throw std::invalid_argument("path metric needs a 1-dimensional complex");
    std::map<Vertex, std::vector<Vertex>> adj;
    std::size_t edges = 0;
    for (const auto& s : complex_.simplices)
        if (s.size() == 2) {
            adj[s[0]].push_back(s[1]);
            adj[s[1]].push_back(s[0]);
            ++edges;
        }
    if (complex_.vertices.empty()) return;
    if (edges + 1 != complex_.vertices.size()) throw std::invalid_argument("path metric needs a tree");
    const Vertex root = *complex_.vertices.begin();
    std::deque<Vertex> queue{root};
    parent_[root] = root;
    depth_[root] = 0;
    while (!queue.empty()) {
        const Vertex v = queue.front();
        queue.pop_front();
        for (Vertex w : adj[v])
            if (!depth_.count(w)) {
                parent_[w] = v;
                depth_[w] = depth_[v] + 1;
                queue.push_back(w);
            }
    }
    if (depth_.size() != complex_.vertices.size()) throw std::invalid_argument("path metric needs a connected tree");
}

int ComplexSpace::vertex_tree_distance(Vertex a, Vertex b) const {
    int da = depth_.at(a), db = depth_.at(b), hops = 0;
    while (da > db) a = parent_.at(a), --da, ++hops;
    while (db > da) b = parent_.at(b), --db, ++hops;
    while (a != b) a = parent_.at(a), b = parent_.at(b), hops += 2;
    return hops;
}

double ComplexSpace::tree_distance(const GeometricPoint& a, const GeometricPoint& b) const {
    if (a.carrier == b.carrier) {
        if (a.carrier.size() == 1) return 0.0;
        return std::abs(a.coords[1] - b.coords[1]);
    }
    // Distance from the point to each endpoint of its carrier.
    auto ends = [](const GeometricPoint& p) {
        std::vector<std::pair<Vertex, double>> e;
        if (p.carrier.size() == 1) {
            e.emplace_back(p.carrier[0], 0.0);
        } else {
            e.emplace_back(p.carrier[0], p.coords[1]);
            e.emplace_back(p.carrier[1], p.coords[0]);
        }
        return e;
    };
    double best = kInf;
    for (const auto& [u, du] : ends(a))
        for (const auto& [v, dv] : ends(b)) best = std::min(best, du + dv + vertex_tree_distance(u, v));
    return best;
}

std::vector<double> ComplexSpace::realize(const GeometricPoint& p) const {
    if (positions_.empty()) throw std::logic_error("complex has no Euclidean realization");
    std::vector<double> x(positions_.begin()->second.size(), 0.0);
    for (std::size_t i = 0; i < p.carrier.size(); ++i) {
        const auto& v = positions_.at(p.carrier[i]);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += p.coords[i] * v[k];
    }
    return x;
}

double ComplexSpace::distance(const GeometricPoint& a, const GeometricPoint& b) const {
    if (metric_ == Metric::TreePath) return tree_distance(a, b);
    if (a == b) return 0.0;
    return euclid(realize(a), realize(b));
}

bool ComplexSpace::contains(const GeometricPoint& p, double tol) const {
    if (p.carrier.empty() || p.carrier.size() != p.coords.size()) return false;
    if (!std::is_sorted(p.carrier.begin(), p.carrier.end()) || !complex_.contains(p.carrier)) return false;
    double sum = 0.0;
    for (double c : p.coords) {
        if (c < -tol) return false;
        sum += c;
    }
    return std::abs(sum - 1.0) <= std::max(tol, 1e-12);
}

GeometricPoint ComplexSpace::make_point(const Simplex& s, std::vector<double> bary) {
    GeometricPoint p;
    double sum = 0.0;
    for (double& c : bary) {
        if (c < kZero) c = 0.0;
        sum += c;
    }
    for (std::size_t i = 0; i < s.size(); ++i)
        if (bary[i] > 0.0) {
            p.carrier.push_back(s[i]);
            p.coords.push_back(bary[i] / sum);
        }
    return p;
}

std::vector<GeometricPoint> ComplexSpace::grid(double spacing) const {
    const int top = complex_.dimension();
    std::vector<GeometricPoint> out;
    for (const auto& s : complex_.simplices) {
        double edge = 1.0;
        if (metric_ == Metric::Euclidean) {
            edge = 0.0;
            for (std::size_t a = 0; a < s.size(); ++a)
                for (std::size_t b = a + 1; b < s.size(); ++b)
                    edge = std::max(edge, euclid(positions_.at(s[a]), positions_.at(s[b])));
            if (s.size() == 1) edge = 1.0;
        }
        int m = std::max(1, static_cast<int>(std::ceil(edge / spacing - 1e-9)));
        if (cell_dim(s) < top) m *= face_refine_;
        std::vector<std::vector<double>> barys;
        interior_lattice(s.size(), m, barys);
        for (auto& b : barys) out.push_back({s, std::move(b)});
    }
    return out;
}

std::vector<GeometricPoint> ComplexSpace::landmarks() const {
    std::vector<GeometricPoint> out;
    for (Vertex v : complex_.vertices) out.push_back(vertex_point(v));
    for (const auto& s : complex_.simplices)
        if (s.size() > 1) out.push_back({s, std::vector<double>(s.size(), 1.0 / static_cast<double>(s.size()))});
    return out;
}

std::vector<GeometricPoint> ComplexSpace::random_points(std::size_t count, std::mt19937_64& rng) const {
    std::vector<Simplex> maximal;
    for (const auto& s : complex_.simplices) {
        bool top = true;
        for (const auto& t : complex_.simplices)
            if (t.size() == s.size() + 1 && is_face(s, t)) {
                top = false;
                break;
            }
        if (top) maximal.push_back(s);
    }
    std::vector<GeometricPoint> out;
    if (maximal.empty()) return out;
    std::uniform_int_distribution<std::size_t> pick(0, maximal.size() - 1);
    std::exponential_distribution<double> ex(1.0);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& s = maximal[pick(rng)];
        std::vector<double> b(s.size());
        for (double& c : b) c = ex(rng);
        out.push_back(make_point(s, std::move(b)));
    }
    return out;
}

std::vector<double> ComplexSpace::embed(const GeometricPoint& p) const {
    if (!positions_.empty()) return realize(p);
    // Tree without a drawing: (lower vertex, upper vertex, parameter).
    if (p.carrier.size() == 1) return {double(p.carrier[0]), double(p.carrier[0]), 0.0};
    return {double(p.carrier[0]), double(p.carrier[1]), p.coords[1]};
}

double ComplexSpace::distance_to_simplex(const GeometricPoint& p, const Simplex& s) const {
    if (metric_ == Metric::TreePath) {
        if (p.carrier.size() <= s.size() && is_face(p.carrier, s)) return 0.0;
        double best = kInf;
        for (Vertex v : s) best = std::min(best, tree_distance(p, vertex_point(v)));
        return best;
    }
    std::vector<std::vector<double>> verts;
    for (Vertex v : s) verts.push_back(positions_.at(v));
    return point_simplex_distance(realize(p), verts);
}

std::vector<GeometricPoint> simplex_lattice(const SimplicialComplex& k, int m) {
    std::vector<GeometricPoint> out;
    for (const auto& s : k.simplices) {
        std::vector<std::vector<double>> barys;
        interior_lattice(s.size(), m, barys);
        for (auto& b : barys) out.push_back({s, std::move(b)});
    }
    return out;
}

json ComplexSpace::to_json() const {
    json j{{"kind", "complex"},
           {"metric", metric_ == Metric::TreePath ? "tree-path" : "euclidean"},
           {"vertices", complex_.vertices},
           {"simplices", complex_.simplices}};
    if (!positions_.empty()) {
        json pos = json::object();
        for (const auto& [v, x] : positions_) pos[std::to_string(v)] = x;
        j["positions"] = pos;
    }
    return j;
}

// ------------------------------------------------------------------------------------------ SimplexChart

SimplexChart::SimplexChart(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("chart needs n >= 1");
    // Base vertices: the standard basis of R^n (pairwise distance sqrt 2), centered and written in an
    // orthonormal basis of the sum-zero hyperplane.
    Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
    e.rowwise() -= e.colwise().mean();
    Eigen::MatrixXd basis(n, n - 1);
    if (n > 1) {
        Eigen::MatrixXd span = Eigen::MatrixXd::Zero(n, n - 1);
        for (int k = 0; k < n - 1; ++k) {
            span(k, k) = 1.0;
            span(k + 1, k) = -1.0;
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
        basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, n - 1);
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k < n - 1; ++k) v[static_cast<std::size_t>(k)] = e.row(i).dot(basis.col(k));
        verts_.push_back(std::move(v));
    }
    std::vector<double> apex(static_cast<std::size_t>(n), 0.0);
    apex.back() = std::sqrt((n + 1.0) / n);
    verts_.push_back(std::move(apex));
}

std::vector<double> SimplexChart::to_euclidean(std::span<const double> bary) const {
    std::vector<double> x(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t i = 0; i < verts_.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) x[k] += bary[i] * verts_[i][k];
    return x;
}

std::vector<double> SimplexChart::to_barycentric(std::span<const double> x) const {
    const auto m = static_cast<Eigen::Index>(n_ + 1);
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m - 1; ++k) {
        for (Eigen::Index i = 0; i < m; ++i) a(k, i) = verts_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        rhs(k) = x[static_cast<std::size_t>(k)];
    }
    a.row(m - 1).setOnes();
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd b = a.partialPivLu().solve(rhs);
    return {b.data(), b.data() + b.size()};
}

// ------------------------------------------------------------------------------------ collapse formulas

std::vector<double> ray_collapse_barycentric(std::span<const double> bary, std::size_t apex) {
    const std::size_t n = bary.size() - 1;
    if (n < 1 || apex > n) throw std::invalid_argument("ray collapse needs a simplex of dimension >= 1");
    // The ray starts at the reflection of the apex through the barycenter of the free facet.
    const double base = 2.0 / static_cast<double>(n);
    double s = kInf;
    std::size_t exit_face = apex;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i == apex || bary[i] >= base) continue;
        const double si = base / (base - bary[i]);
        if (si < s) s = si, exit_face = i;
    }
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double from = i == apex ? -1.0 : base;
        out[i] = from + s * (bary[i] - from);
    }
    out[exit_face] = 0.0;
    return out;
}

GeometricPoint simplicial_collapse_eval(const Simplex& sigma, const Simplex& tau, const GeometricPoint& x,
                                        double tol) {
    if (sigma.size() != tau.size() + 1 || !is_face(tau, sigma))
        throw std::invalid_argument("tau must be a facet of sigma");
    if (x.carrier.size() != x.coords.size() || x.carrier.empty() || !is_face(x.carrier, sigma))
        throw OutsideDomain("point carrier " + format_cell(x.carrier) + " is not a face of " + format_cell(sigma));
    double sum = 0.0;
    for (double c : x.coords) {
        if (c < -tol) throw OutsideDomain("negative barycentric coordinate");
        sum += c;
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-9)) throw OutsideDomain("barycentric coordinates do not sum to 1");
    // Only the open cells tau and sigma move.
    if (x.carrier != tau && x.carrier != sigma) return x;
    std::vector<double> bary(sigma.size(), 0.0);
    for (std::size_t i = 0; i < x.carrier.size(); ++i) {
        const auto pos = std::lower_bound(sigma.begin(), sigma.end(), x.carrier[i]) - sigma.begin();
        bary[static_cast<std::size_t>(pos)] = std::max(0.0, x.coords[i]);
    }
    std::size_t apex = 0;
    while (apex < tau.size() && sigma[apex] == tau[apex]) ++apex;
    return ComplexSpace::make_point(sigma, ray_collapse_barycentric(bary, apex));
}

std::vector<double> cubical_collapse_eval(std::span<const double> x, double tol) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("cubical collapse needs n >= 1");
    double side = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(x[k]) > 1.0 + tol) throw OutsideDomain("point outside [-1,1]^n");
        if (k + 1 < n) side = std::max(side, std::abs(x[k]));
    }
    std::vector<double> out(x.begin(), x.end());
    if (side >= 1.0 - tol || x[n - 1] <= -1.0 + tol) return out;
    // Exit parameter of the ray from (0,...,0,2) through x.
    double s = 3.0 / (2.0 - x[n - 1]);
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (x[k] != 0.0) s = std::min(s, 1.0 / std::abs(x[k]));
    for (std::size_t k = 0; k + 1 < n; ++k) out[k] = std::clamp(s * x[k], -1.0, 1.0);
    out[n - 1] = std::clamp(2.0 + s * (x[n - 1] - 2.0), -1.0, 1.0);
    return out;
}

std::vector<double> cubical_cell_collapse_eval(const Cube& sigma, const Cube& tau, std::span<const double> x,
                                               double tol) {
    if (sigma.size() != tau.size() || x.size() != sigma.size() || !is_face(tau, sigma) ||
        cell_dim(tau) + 1 != cell_dim(sigma))
        throw std::invalid_argument("tau must be a facet of sigma with matching axes");
    std::size_t free_axis = sigma.size();
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        if (sigma[k].first == sigma[k].second) continue;
        if (tau[k].first == tau[k].second)
            free_axis = k;
        else
            axes.push_back(k);
    }
    for (std::size_t k = 0; k < sigma.size(); ++k)
        if (x[k] < sigma[k].first - tol || x[k] > sigma[k].second + tol) throw OutsideDomain("point outside the cell");
    // Chart onto [-1,1]^n with the free face on top.
    const bool free_at_hi = tau[free_axis].first == sigma[free_axis].second;
    std::vector<double> u;
    for (std::size_t k : axes) u.push_back(2.0 * (x[k] - sigma[k].first) - 1.0);
    const double t = 2.0 * (x[free_axis] - sigma[free_axis].first) - 1.0;
    u.push_back(free_at_hi ? t : -t);
    const auto q = cubical_collapse_eval(u, tol);
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < axes.size(); ++i) out[axes[i]] = sigma[axes[i]].first + (q[i] + 1.0) / 2.0;
    const double qt = free_at_hi ? q.back() : -q.back();
    out[free_axis] = sigma[free_axis].first + (qt + 1.0) / 2.0;
    return out;
}

void SimplicialMap::check() const {
    for (Vertex v : domain.vertices)
        if (!vertex_map.count(v) || !codomain.vertices.count(vertex_map.at(v)))
            throw std::invalid_argument("vertex " + std::to_string(v) + " has no image in the codomain");
    for (const auto& s : domain.simplices) {
        std::vector<Vertex> img;
        for (Vertex v : s) img.push_back(vertex_map.at(v));
        if (!codomain.contains(make_simplex(img)))
            throw std::invalid_argument("simplex " + format_cell(s) + " does not map onto a simplex");
    }
}

GeometricPoint SimplicialMap::operator()(const GeometricPoint& x) const {
    std::map<Vertex, double> weights;
    for (std::size_t i = 0; i < x.carrier.size(); ++i) {
        auto it = vertex_map.find(x.carrier[i]);
        if (it == vertex_map.end()) throw OutsideDomain("vertex outside the simplicial map's domain");
        weights[it->second] += x.coords[i];
    }
    GeometricPoint out;
    for (const auto& [v, w] : weights)
        if (w > 0.0) {
            out.carrier.push_back(v);
            out.coords.push_back(w);
        }
    return out;
}

GeometricPoint cylinder_collapse_eval(const SimplicialMap& f, const CylinderPoint& p) {
    return p.in_range ? p.point : f(p.point);
}

// ------------------------------------------------------------------------------------------------- maps

std::string to_string(MapKind k) {
    switch (k) {
    case MapKind::Identity: return "identity";
    case MapKind::ElementarySimplicial: return "elementary-simplicial";
    case MapKind::CylinderCollapse: return "cylinder-collapse";
    case MapKind::PiecewiseLinear1D: return "piecewise-linear-1d";
    case MapKind::Schedule: return "schedule";
    case MapKind::Composite: return "composite";
    case MapKind::Custom: return "custom";
    }
    return "unknown";
}

GeometricPoint RetractionMap::track(const GeometricPoint&, double) const {
    throw MissingHomotopy(to_string(kind()) + " map carries no deformation retraction");
}

double RetractionMap::moved_image_distance(const GeometricPoint& c) const {
    double best = kInf;
    for (const auto& y : domain_->grid(kProbeSpacing)) {
        if (image_->contains(y, 1e-12)) continue;
        best = std::min(best, image_->distance(eval(y), c));
    }
    return best;
}

std::optional<GeometricPoint> RetractionMap::lift(const GeometricPoint& c, double radius) const {
    for (double h = kProbeSpacing; h >= kProbeSpacing / 64; h /= 4)
        for (const auto& y : domain_->grid(h)) {
            if (image_->contains(y, 1e-12)) continue;
            if (image_->distance(eval(y), c) < radius) return y;
        }
    return std::nullopt;
}

double IdentityMap::moved_image_distance(const GeometricPoint&) const { return kInf; }

GeometricPoint FunctionMap::track(const GeometricPoint& x, double t) const {
    if (!track_) return RetractionMap::track(x, t);
    return track_(x, t);
}

PiecewiseLinearMap::PiecewiseLinearMap(SpacePtr domain, SpacePtr image, PiecewiseLinear f, bool straight_tracks)
    : RetractionMap(std::move(domain), std::move(image)), f_(std::move(f)), tracks_(straight_tracks) {
    auto box = std::dynamic_pointer_cast<const BoxSpace>(image_);
    auto dom = std::dynamic_pointer_cast<const BoxSpace>(domain_);
    if (!box || !dom || box->dim() != 1 || dom->dim() != 1)
        throw std::invalid_argument("piecewise-linear maps act on intervals");
    image_box_ = Interval::closed(to_rational(box->lo()[0]), to_rational(box->hi()[0]));
    const IntervalSet whole({Interval::closed(to_rational(dom->lo()[0]), to_rational(dom->hi()[0]))});
    const auto moved = whole.minus(IntervalSet({image_box_}));
    for (const auto& part : moved.parts()) moved_image_ = moved_image_.unite(f_.image(part));
}

GeometricPoint PiecewiseLinearMap::eval(const GeometricPoint& x) const {
    return euclidean_point({f_(x.coords.at(0))});
}

GeometricPoint PiecewiseLinearMap::track(const GeometricPoint& x, double t) const {
    if (!tracks_) return RetractionMap::track(x, t);
    const double a = x.coords.at(0);
    return euclidean_point({(1.0 - t) * a + t * f_(a)});
}

double PiecewiseLinearMap::moved_image_distance(const GeometricPoint& c) const {
    return moved_image_.distance_to(c.coords.at(0));
}

std::optional<GeometricPoint> PiecewiseLinearMap::lift(const GeometricPoint& c, double radius) const {
    const Rational x = to_rational(c.coords.at(0)), r = to_rational(radius);
    const auto pre = f_.preimage(IntervalSet({Interval::open(x - r, x + r)}));
    const IntervalSet moved =
        IntervalSet({Interval::closed(f_.lo(), f_.hi())}).minus(IntervalSet({image_box_}));
    const auto hit = pre.intersect(moved).sample();
    if (!hit) return std::nullopt;
    return euclidean_point({to_double(*hit)});
}

json PiecewiseLinearMap::to_json() const {
    json bps = json::array();
    for (const auto& [x, y] : f_.breakpoints()) bps.push_back({to_double(x), to_double(y)});
    return {{"kind", "pl1d"}, {"breakpoints", bps}, {"tracks", tracks_}};
}

ScheduleMap::ScheduleMap(std::shared_ptr<const ComplexSpace> domain, std::shared_ptr<const ComplexSpace> image,
                         std::vector<CollapseStep> steps)
    : RetractionMap(domain, image), domain_c_(std::move(domain)), image_c_(std::move(image)),
      steps_(std::move(steps)) {
    CollapseSchedule sched;
    sched.steps = steps_;
    if (!(replay(domain_c_->complex(), sched) == image_c_->complex()))
        throw std::invalid_argument("schedule does not end on the image complex");
    for (std::size_t k = 0; k < steps_.size(); ++k) {
        removed_by_[steps_[k].sigma] = k;
        removed_by_[steps_[k].tau] = k;
    }
    // Closed cells covering the image of everything the schedule moves.
    std::set<Simplex> moved;
    for (const auto& st : steps_) {
        moved.erase(st.sigma);
        moved.erase(st.tau);
        for (const auto& f : facets(st.sigma))
            if (f != st.tau) moved.insert(f);
    }
    // Drop cells that are faces of other listed cells.
    for (const auto& s : moved) {
        bool covered = false;
        for (const auto& t : moved)
            if (t.size() > s.size() && is_face(s, t)) {
                covered = true;
                break;
            }
        if (!covered) moved_cells_.push_back(s);
    }
}

std::size_t ScheduleMap::step_of(const Simplex& cell) const {
    const auto it = removed_by_.find(cell);
    return it == removed_by_.end() ? steps_.size() : it->second;
}

GeometricPoint ScheduleMap::apply_step(const CollapseStep& step, const GeometricPoint& x) const {
    if (x.carrier != step.sigma && x.carrier != step.tau) return x;
    return simplicial_collapse_eval(step.sigma, step.tau, x);
}

GeometricPoint ScheduleMap::partial_step(const CollapseStep& step, const GeometricPoint& x, double s) const {
    if (x.carrier != step.sigma && x.carrier != step.tau) return x;
    const auto end = apply_step(step, x);
    std::vector<double> a(step.sigma.size(), 0.0), b(step.sigma.size(), 0.0);
    auto scatter = [&](const GeometricPoint& p, std::vector<double>& out) {
        for (std::size_t i = 0; i < p.carrier.size(); ++i)
            out[static_cast<std::size_t>(std::lower_bound(step.sigma.begin(), step.sigma.end(), p.carrier[i]) -
                                         step.sigma.begin())] = p.coords[i];
    };
    scatter(x, a);
    scatter(end, b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (1.0 - s) * a[i] + s * b[i];
    return ComplexSpace::make_point(step.sigma, std::move(a));
}

GeometricPoint ScheduleMap::eval(const GeometricPoint& x) const {
    GeometricPoint y = x;
    // Each cell is removed by at most one step, and a collapse lands on cells that survive it.
    for (std::size_t k = step_of(y.carrier); k < steps_.size();) {
        y = apply_step(steps_[k], y);
        const std::size_t next = step_of(y.carrier);
        k = next > k ? next : steps_.size();
    }
    return y;
}

GeometricPoint ScheduleMap::track(const GeometricPoint& x, double t) const {
    if (steps_.empty()) return x;
    const auto n = static_cast<double>(steps_.size());
    t = std::clamp(t, 0.0, 1.0);
    const std::size_t full = std::min(steps_.size(), static_cast<std::size_t>(std::floor(t * n)));
    GeometricPoint y = x;
    for (std::size_t k = step_of(y.carrier); k < full;) {
        y = apply_step(steps_[k], y);
        const std::size_t next = step_of(y.carrier);
        k = next > k ? next : full;
    }
    if (full == steps_.size()) return y;
    return partial_step(steps_[full], y, t * n - static_cast<double>(full));
}

double ScheduleMap::moved_image_distance(const GeometricPoint& c) const {
    double best = kInf;
    for (const auto& s : moved_cells_) best = std::min(best, image_c_->distance_to_simplex(c, s));
    return best;
}

std::optional<GeometricPoint> ScheduleMap::lift(const GeometricPoint& c, double radius) const {
    // Interior samples of every removed cell, refined until one lands close enough.
    for (int m = 4; m <= 256; m *= 4)
        for (const auto& st : steps_)
            for (const auto* cell : {&st.sigma, &st.tau}) {
                std::vector<std::vector<double>> barys;
                interior_lattice(cell->size(), m + static_cast<int>(cell->size()), barys);
                for (auto& b : barys) {
                    const GeometricPoint y{*cell, std::move(b)};
                    if (image_c_->distance(eval(y), c) < radius) return y;
                }
            }
    return std::nullopt;
}

json ScheduleMap::to_json() const {
    json steps = json::array();
    for (const auto& st : steps_) steps.push_back({st.tau, st.sigma});
    return {{"kind", "schedule"}, {"steps", steps}};
}

CompositeMap::CompositeMap(std::vector<MapPtr> maps, SpacePtr space_if_empty)
    : RetractionMap(maps.empty() ? space_if_empty : maps.back()->domain(),
                    maps.empty() ? space_if_empty : maps.front()->image()),
      maps_(std::move(maps)) {
    for (std::size_t k = 0; k + 1 < maps_.size(); ++k)
        if (maps_[k + 1]->image() != maps_[k]->domain())
            throw ChainMismatch("map " + std::to_string(k + 1) + " does not land in the domain of map " +
                                std::to_string(k));
}

GeometricPoint CompositeMap::eval(const GeometricPoint& x) const {
    GeometricPoint y = x;
    for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) y = (*it)->eval(y);
    return y;
}

bool CompositeMap::has_tracks() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const MapPtr& m) { return m->has_tracks(); });
}

GeometricPoint CompositeMap::track(const GeometricPoint& x, double t) const {
    if (!has_tracks()) return RetractionMap::track(x, t);
    if (maps_.empty()) return x;
    const auto n = static_cast<double>(maps_.size());
    t = std::clamp(t, 0.0, 1.0);
    const std::size_t full = std::min(maps_.size(), static_cast<std::size_t>(std::floor(t * n)));
    GeometricPoint y = x;
    auto it = maps_.rbegin();
    for (std::size_t k = 0; k < full; ++k, ++it) y = (*it)->eval(y);
    if (full == maps_.size()) return y;
    return (*it)->track(y, t * n - static_cast<double>(full));
}

double CompositeMap::moved_image_distance(const GeometricPoint& c) const {
    if (maps_.size() == 1) return maps_.front()->moved_image_distance(c);
    return RetractionMap::moved_image_distance(c);
}

std::optional<GeometricPoint> CompositeMap::lift(const GeometricPoint& c, double radius) const {
    if (maps_.size() == 1) return maps_.front()->lift(c, radius);
    return RetractionMap::lift(c, radius);
}

json CompositeMap::to_json() const {
    json parts = json::array();
    for (const auto& m : maps_) parts.push_back(m->to_json());
    return {{"kind", "composite"}, {"maps", parts}};
}

MapPtr compose(const std::vector<MapPtr>& maps, SpacePtr space) {
    if (maps.empty()) {
        if (!space) throw std::invalid_argument("composing nothing needs a space");
        return std::make_shared<IdentityMap>(space);
    }
    if (maps.size() == 1) return maps.front();
    return std::make_shared<CompositeMap>(maps, space);
}

HomotopyEvaluator::HomotopyEvaluator(MapPtr map) : map_(std::move(map)) {
    if (!map_->has_tracks()) throw MissingHomotopy(to_string(map_->kind()) + " map carries no deformation retraction");
}

GeometricPoint concatenate(const HomotopyEvaluator& h, const HomotopyEvaluator& j, const GeometricPoint& x,
                           double t) {
    if (t <= 0.5) return h(x, 2.0 * t);
    return j(h.culmination(x), 2.0 * t - 1.0);
}

TrackReport track_faithful_check(const HomotopyEvaluator& h, const std::vector<GeometricPoint>& samples,
                                 const std::vector<double>& ts, double tol) {
    TrackReport rep;
    const Space& space = h.space();
    for (const auto& x : samples) {
        const auto end = h.culmination(x);
        for (double t : ts) {
            const double d = space.distance(h.culmination(h(x, t)), end);
            ++rep.checked;
            if (d > rep.worst) {
                rep.worst = d;
                if (d > tol) {
                    rep.witness = x;
                    rep.witness_t = t;
                }
            }
        }
    }
    rep.passed = rep.worst <= tol;
    return rep;
}

RetractionReport retraction_check(const RetractionMap& map, const std::vector<GeometricPoint>& domain_samples,
                                  const std::vector<GeometricPoint>& image_samples, double tol) {
    RetractionReport rep;
    const Space& space = *map.domain();
    auto note = [&](double d, const GeometricPoint& x, bool& flag) {
        if (d > tol) {
            flag = false;
            if (!rep.witness) rep.witness = x;
        }
        rep.worst = std::max(rep.worst, d);
    };
    for (const auto& x : domain_samples) {
        const auto r = map.eval(x);
        if (!map.image()->contains(r, tol)) {
            rep.lands_in_image = false;
            if (!rep.witness) rep.witness = x;
        }
        note(space.distance(map.eval(r), r), x, rep.idempotent);
    }
    for (const auto& c : image_samples) note(space.distance(map.eval(c), c), c, rep.fixes_image);
    return rep;
}

std::vector<double> time_grid(std::size_t n) {
    std::vector<double> ts;
    if (n == 1) return {0.0};
    for (std::size_t i = 0; i < n; ++i) ts.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
    ts.back() = 1.0;
    return ts;
}

} // namespace collapsekit
