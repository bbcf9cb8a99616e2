#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "gallery_builders.hpp"

namespace collapsekit {

namespace {

using Vec2 = std::array<double, 2>;
constexpr double kPi = std::numbers::pi;

Vec2 xy(const GeometricPoint& p) { return {p.coords.at(0), p.coords.at(1)}; }
GeometricPoint pt(Vec2 v) { return euclidean_point({v[0], v[1]}); }
double norm(Vec2 v) { return std::hypot(v[0], v[1]); }
Vec2 sub(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 lerp(Vec2 a, Vec2 b, double t) { return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; }

Vec2 nearest_on_segment(Vec2 p, Vec2 a, Vec2 b, double* param = nullptr) {
    const Vec2 ab = sub(b, a);
    const double len2 = ab[0] * ab[0] + ab[1] * ab[1];
    double t = len2 > 0.0 ? ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (param) *param = t;
    return lerp(a, b, t);
}

// Lattice points of [x0, x1] x [y0, y1] at the given spacing, centered on the origin.
template <class Keep>
void lattice(double x0, double x1, double y0, double y1, double h, Keep keep, std::vector<GeometricPoint>& out) {
    const auto a0 = static_cast<long>(std::floor(x0 / h)), a1 = static_cast<long>(std::ceil(x1 / h));
    const auto b0 = static_cast<long>(std::floor(y0 / h)), b1 = static_cast<long>(std::ceil(y1 / h));
    for (long a = a0; a <= a1; ++a)
        for (long b = b0; b <= b1; ++b) {
            const Vec2 v{static_cast<double>(a) * h, static_cast<double>(b) * h};
            if (keep(v)) out.push_back(pt(v));
        }
}

void dedupe(std::vector<GeometricPoint>& pts) {
    std::set<std::vector<double>> seen;
    std::erase_if(pts, [&](const GeometricPoint& p) { return !seen.insert(p.coords).second; });
}

GeometricPoint straight(const RetractionMap& m, const GeometricPoint& x, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const auto y = m.eval(x);
    return pt(lerp(xy(x), xy(y), t));
}

// --------------------------------------------------------------------------------------- tangent disks

Vec2 disk_center(int j) { return {0.0, static_cast<double>(j)}; }

/// Point on the circle of radius R through the origin, at angle phi from the origin.
Vec2 on_circle(double radius, double phi) { return {radius * std::sin(phi), radius - radius * std::cos(phi)}; }

class DiskRayMap final : public RetractionMap {
public:
    DiskRayMap(std::shared_ptr<const DiskSpace> domain, std::shared_ptr<const DiskSpace> image, int j)
        : RetractionMap(std::move(domain), std::move(image)), j_(j) {}

    MapKind kind() const override { return MapKind::Custom; }

    GeometricPoint eval(const GeometricPoint& x) const override {
        if (j_ == 1) return pt({0.0, 0.0});
        if (image_->contains(x, 1e-12)) return x;
        const Vec2 v = xy(x);
        const double n2 = v[0] * v[0] + v[1] * v[1];
        // Far intersection of the ray toward the origin with the circle of C_{j-1}.
        const double s = std::clamp(2.0 * (j_ - 1) * v[1] / n2, 0.0, 1.0);
        return pt({s * v[0], s * v[1]});
    }

    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double t) const override { return straight(*this, x, t); }

    // The moved part lands on the boundary circle of C_{j-1} minus the origin.
    double moved_image_distance(const GeometricPoint& c) const override {
        if (j_ == 1) return norm(xy(c));
        return std::abs(norm(sub(xy(c), disk_center(j_ - 1))) - (j_ - 1));
    }

    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override {
        const double d = moved_image_distance(c);
        if (d >= radius) return std::nullopt;
        if (j_ == 1) return pt({0.0, 1.0});
        const double inner = j_ - 1;
        const Vec2 rel = sub(xy(c), disk_center(j_ - 1));
        double phi = norm(rel) > 0.0 ? std::atan2(rel[0], -rel[1]) : kPi;
        // The origin is fixed by every bond; step along the circle away from it.
        const double step = (radius - d) / (4.0 * inner);
        if (std::abs(phi) < step) phi = std::min(step, kPi);
        const Vec2 b = on_circle(inner, phi);
        const double t = (1.0 + static_cast<double>(j_) / inner) / 2.0;
        return pt({t * b[0], t * b[1]});
    }

    json to_json() const override { return {{"kind", "disk-ray"}, {"j", j_}}; }

private:
    int j_;
};

// ---------------------------------------------------------------------------------------- circle hulls

int hull_vertices(int j) { return 1 << j; }

/// Boundary radius of the regular polygon with m vertices at angles 2 pi k / m, along direction theta.
double polygon_radius(int m, double theta) {
    const double w = 2.0 * kPi / m;
    const double center = (std::floor(theta / w) + 0.5) * w;
    return std::cos(kPi / m) / std::cos(theta - center);
}

class HullMap final : public RetractionMap {
public:
    HullMap(std::shared_ptr<const HullSpace> domain, std::shared_ptr<const HullSpace> image, int j)
        : RetractionMap(domain, image), dom_(std::move(domain)), img_(std::move(image)), j_(j) {}

    MapKind kind() const override { return MapKind::Custom; }

    GeometricPoint eval(const GeometricPoint& x) const override {
        const Vec2 v = xy(x);
        if (j_ == 1) return pt({0.0, 0.0});
        // Orthogonal projection onto the segment C_1.
        if (j_ == 2) return pt({v[0], 0.0});
        if (img_->contains(x, 1e-12)) return x;
        const double r = norm(v);
        const double s = polygon_radius(hull_vertices(j_ - 1), std::atan2(v[1], v[0])) / r;
        return pt({s * v[0], s * v[1]});
    }

    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double t) const override { return straight(*this, x, t); }

    // The moved part covers the boundary of C_{j-1} minus its vertices (the open segment when j = 2).
    double moved_image_distance(const GeometricPoint& c) const override {
        if (j_ == 1) return norm(xy(c));
        return img_->boundary_distance(c.coords);
    }

    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override {
        const double d = moved_image_distance(c);
        if (d >= radius) return std::nullopt;
        const Vec2 v = xy(c);
        if (j_ == 1) return pt({0.5, 0.0});
        if (j_ == 2) {
            const double margin = std::min(0.5, (radius - d) / 2.0);
            const double x = std::clamp(v[0], -1.0 + margin, 1.0 - margin);
            return pt({x, (1.0 - std::abs(x)) / 2.0});
        }
        const auto verts = img_->vertices();
        Vec2 best{};
        double best_d = std::numeric_limits<double>::infinity(), best_t = 0.0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < verts.size(); ++k) {
            double t = 0.0;
            const Vec2 q = nearest_on_segment(v, verts[k], verts[(k + 1) % verts.size()], &t);
            if (const double dq = norm(sub(q, v)); dq < best_d) best_d = dq, best = q, best_t = t, best_k = k;
        }
        const Vec2 a = verts[best_k], b = verts[(best_k + 1) % verts.size()];
        const double len = norm(sub(b, a));
        // Vertices lie on the unit circle and are never moved onto; slide into the edge.
        const double shift = std::min(0.5, (radius - d) / (2.0 * len));
        best = lerp(a, b, std::clamp(best_t, shift, 1.0 - shift));
        const double theta = std::atan2(best[1], best[0]);
        const double grow = polygon_radius(hull_vertices(j_), theta) / polygon_radius(hull_vertices(j_ - 1), theta);
        const double t = (1.0 + grow) / 2.0;
        return pt({t * best[0], t * best[1]});
    }

    json to_json() const override { return {{"kind", j_ == 2 ? "hull-projection" : "hull-radial"}, {"j", j_}}; }

private:
    std::shared_ptr<const HullSpace> dom_, img_;
    int j_;
};

} // namespace

// ------------------------------------------------------------------------------------------ DiskSpace

double DiskSpace::distance(const GeometricPoint& a, const GeometricPoint& b) const { return norm(sub(xy(a), xy(b))); }

bool DiskSpace::contains(const GeometricPoint& p, double tol) const {
    if (!p.carrier.empty() || p.coords.size() != 2) return false;
    if (j_ == 0) return norm(xy(p)) <= tol;
    return norm(sub(xy(p), disk_center(j_))) <= j_ + tol;
}

std::vector<GeometricPoint> DiskSpace::grid(double spacing) const {
    std::vector<GeometricPoint> out{pt({0.0, 0.0})};
    if (j_ == 0) return out;
    const double r = j_;
    lattice(-r, r, 0.0, 2.0 * r, spacing,
            [&](Vec2 v) { return norm(sub(v, disk_center(j_))) <= r + 1e-12; }, out);
    // One angle set for every inner circle, so bonds carry boundary samples to boundary samples.
    const auto n = std::max<long>(8, static_cast<long>(std::ceil(2.0 * kPi * r * 8.0 / spacing)));
    for (int i = 1; i <= j_; ++i)
        for (long k = 1; k < n; ++k) out.push_back(pt(on_circle(i, 2.0 * kPi * static_cast<double>(k) / n)));
    dedupe(out);
    return out;
}

std::vector<GeometricPoint> DiskSpace::landmarks() const {
    std::vector<GeometricPoint> out{pt({0.0, 0.0})};
    if (j_ == 0) return out;
    const double r = j_;
    for (Vec2 v : {Vec2{0.0, 2.0 * r}, Vec2{r, r}, Vec2{-r, r}, Vec2{0.0, r}}) out.push_back(pt(v));
    return out;
}

std::vector<GeometricPoint> DiskSpace::random_points(std::size_t count, std::mt19937_64& rng) const {
    std::vector<GeometricPoint> out;
    if (j_ == 0) return std::vector<GeometricPoint>(count, pt({0.0, 0.0}));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (out.size() < count) {
        const Vec2 v{u(rng), u(rng)};
        if (norm(v) <= 1.0) out.push_back(pt({j_ * v[0], j_ * (1.0 + v[1])}));
    }
    return out;
}

// ------------------------------------------------------------------------------------------ HullSpace

double HullSpace::distance(const GeometricPoint& a, const GeometricPoint& b) const { return norm(sub(xy(a), xy(b))); }

std::vector<std::array<double, 2>> HullSpace::vertices() const {
    if (j_ == 0) return {{0.0, 0.0}};
    std::vector<Vec2> out;
    const int m = hull_vertices(j_);
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * kPi * k / m;
        // Exact values at the quarter turns.
        out.push_back(k * 4 % m == 0 ? Vec2{std::round(std::cos(a)), std::round(std::sin(a))}
                                     : Vec2{std::cos(a), std::sin(a)});
    }
    return out;
}

bool HullSpace::contains(const GeometricPoint& p, double tol) const {
    if (!p.carrier.empty() || p.coords.size() != 2) return false;
    const Vec2 v = xy(p);
    if (j_ == 0) return norm(v) <= tol;
    if (j_ == 1) return std::abs(v[1]) <= tol && std::abs(v[0]) <= 1.0 + tol;
    const double r = norm(v);
    if (r == 0.0) return true;
    return r <= polygon_radius(hull_vertices(j_), std::atan2(v[1], v[0])) + tol;
}

double HullSpace::boundary_distance(std::span<const double> p) const {
    const Vec2 v{p[0], p[1]};
    if (j_ == 0) return norm(v);
    if (j_ == 1) return norm(sub(v, nearest_on_segment(v, {-1.0, 0.0}, {1.0, 0.0})));
    const int m = hull_vertices(j_);
    if (contains(pt(v), 0.0)) {
        // Inside a convex polygon the nearest boundary point lies on the closest supporting line.
        double best = std::numeric_limits<double>::infinity();
        const double apothem = std::cos(kPi / m);
        for (int k = 0; k < m; ++k) {
            const double a = 2.0 * kPi * k / m + kPi / m;
            best = std::min(best, apothem - (v[0] * std::cos(a) + v[1] * std::sin(a)));
        }
        return std::max(0.0, best);
    }
    const auto verts = vertices();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < verts.size(); ++k)
        best = std::min(best, norm(sub(v, nearest_on_segment(v, verts[k], verts[(k + 1) % verts.size()]))));
    return best;
}

std::vector<GeometricPoint> HullSpace::grid(double spacing) const {
    std::vector<GeometricPoint> out{pt({0.0, 0.0})};
    if (j_ == 0) return out;
    lattice(-1.0, 1.0, j_ == 1 ? 0.0 : -1.0, j_ == 1 ? 0.0 : 1.0, spacing,
            [&](Vec2 v) { return contains(pt(v), 1e-12); }, out);
    const double fine = spacing / 8.0;
    for (int i = 1; i <= j_; ++i) {
        const auto verts = HullSpace(i).vertices();
        const std::size_t edges = i == 1 ? 1 : verts.size();
        for (std::size_t k = 0; k < edges; ++k) {
            const Vec2 a = verts[k], b = verts[(k + 1) % verts.size()];
            const auto n = std::max<long>(1, static_cast<long>(std::ceil(norm(sub(b, a)) / fine)));
            for (long q = 0; q < n; ++q) out.push_back(pt(lerp(a, b, static_cast<double>(q) / n)));
            if (i == 1) out.push_back(pt(b));
        }
    }
    dedupe(out);
    return out;
}

std::vector<GeometricPoint> HullSpace::landmarks() const {
    if (j_ == 0) return {pt({0.0, 0.0})};
    std::vector<GeometricPoint> out{pt({1.0, 0.0}), pt({0.0, 0.0})};
    const auto verts = vertices();
    for (std::size_t k = 1; k < verts.size() && k < 64; ++k) out.push_back(pt(verts[k]));
    return out;
}

// ------------------------------------------------------------------------------------------- builders

namespace detail {

InverseSystem disk_system(const GallerySpec& spec) {
    std::vector<std::shared_ptr<const DiskSpace>> ds;
    for (int j = 0; j <= spec.depth; ++j) ds.push_back(std::make_shared<DiskSpace>(j));
    std::vector<MapPtr> bonds;
    for (int j = 1; j <= spec.depth; ++j) bonds.push_back(std::make_shared<DiskRayMap>(ds[j], ds[j - 1], j));
    return InverseSystem(spec.name, {ds.begin(), ds.end()}, std::move(bonds), spec.to_json());
}

InverseSystem hull_system(const GallerySpec& spec) {
    std::vector<std::shared_ptr<const HullSpace>> hs;
    for (int j = 0; j <= spec.depth; ++j) hs.push_back(std::make_shared<HullSpace>(j));
    std::vector<MapPtr> bonds;
    for (int j = 1; j <= spec.depth; ++j) bonds.push_back(std::make_shared<HullMap>(hs[j], hs[j - 1], j));
    return InverseSystem(spec.name, {hs.begin(), hs.end()}, std::move(bonds), spec.to_json());
}

} // namespace detail

} // namespace collapsekit
