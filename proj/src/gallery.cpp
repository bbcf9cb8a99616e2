#include "collapsekit/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "gallery_builders.hpp"

namespace collapsekit {

namespace {

const std::vector<std::string> kNames = {"cone-retract", "cone-crush",   "ray-endpoint", "ray-shift",
                                         "ray-bucket",   "infinite-cube", "tangent-disks", "circle-hulls",
                                         "telescope",    "tree-balls",   "tree-countable", "rn-shells"};

PiecewiseLinear pl(std::vector<std::pair<int, int>> pts) {
    std::vector<PiecewiseLinear::Breakpoint> bps;
    for (const auto& [x, y] : pts)
        if (bps.empty() || bps.back().first != Rational(x)) bps.emplace_back(Rational(x), Rational(y));
    return PiecewiseLinear(std::move(bps));
}

enum class RayRule { Endpoint, Shift, Bucket };

InverseSystem ray_system(const GallerySpec& spec, RayRule rule) {
    std::vector<SpacePtr> spaces;
    std::vector<MapPtr> bonds;
    for (int i = 0; i <= spec.depth; ++i) spaces.push_back(BoxSpace::interval(0.0, i));
    for (int i = 1; i <= spec.depth; ++i) {
        PiecewiseLinear f = pl({{0, 0}, {1, 0}});
        if (i >= 2) {
            switch (rule) {
            case RayRule::Endpoint: f = pl({{0, 0}, {i - 1, i - 1}, {i, i - 1}}); break;
            case RayRule::Shift: f = pl({{0, 0}, {i - 1, i - 1}, {i, i - 2}}); break;
            case RayRule::Bucket: f = pl({{0, 0}, {i - 1, i - 1}, {i, 0}}); break;
            }
        }
        // Only the endpoint rule's straight-line homotopy is track-faithful.
        const bool tracks = rule == RayRule::Endpoint || i == 1;
        bonds.push_back(std::make_shared<PiecewiseLinearMap>(spaces[i], spaces[i - 1], std::move(f), tracks));
    }
    return InverseSystem(spec.name, std::move(spaces), std::move(bonds), spec.to_json());
}

SimplicialComplex star_complex(int leaves) {
    std::vector<Simplex> gens{{0}};
    for (int k = 1; k <= leaves; ++k) gens.push_back({0, k});
    return SimplicialComplex::closure_of(gens);
}

/// Sends the segment [q, p_i] onto [q, p_{i-1}] preserving the distance to q; r_1 crushes onto q.
class ConeFoldMap final : public RetractionMap {
public:
    ConeFoldMap(std::shared_ptr<const ComplexSpace> domain, std::shared_ptr<const ComplexSpace> image, int leaf)
        : RetractionMap(domain, image), image_c_(std::move(image)), leaf_(leaf) {}

    MapKind kind() const override { return MapKind::Custom; }

    GeometricPoint eval(const GeometricPoint& x) const override {
        if (std::find(x.carrier.begin(), x.carrier.end(), leaf_) == x.carrier.end()) return x;
        if (leaf_ == 1) return ComplexSpace::vertex_point(0);
        if (x.carrier.size() == 1) return ComplexSpace::vertex_point(leaf_ - 1);
        return {{0, leaf_ - 1}, x.coords};
    }

    double moved_image_distance(const GeometricPoint& c) const override {
        if (leaf_ == 1) return image_c_->distance(c, ComplexSpace::vertex_point(0));
        return image_c_->distance_to_simplex(c, {0, leaf_ - 1});
    }

    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override {
        const double to_q = image_c_->distance(c, ComplexSpace::vertex_point(0));
        const bool on_target = leaf_ > 1 && std::find(c.carrier.begin(), c.carrier.end(), leaf_ - 1) != c.carrier.end();
        // Parameter of the point along its segment, measured from q.
        const double along = on_target ? to_q : 0.0;
        const double slack = on_target ? radius : radius - to_q;
        if (slack <= 0.0) return std::nullopt;
        const double s = along > 0.0 ? along : std::min(1.0, slack / 2.0);
        if (leaf_ == 1) return GeometricPoint{{0, 1}, {0.5, 0.5}};
        if (s >= 1.0) return ComplexSpace::vertex_point(leaf_);
        return GeometricPoint{{0, leaf_}, {1.0 - s, s}};
    }

    json to_json() const override { return {{"kind", "custom"}, {"name", "cone-fold"}, {"leaf", leaf_}}; }

private:
    std::shared_ptr<const ComplexSpace> image_c_;
    int leaf_;
};

InverseSystem cone_system(const GallerySpec& spec, bool crush) {
    std::vector<std::shared_ptr<const ComplexSpace>> cs;
    for (int i = 0; i <= spec.depth; ++i) cs.push_back(std::make_shared<ComplexSpace>(star_complex(i)));
    std::vector<MapPtr> bonds;
    for (int i = 1; i <= spec.depth; ++i) {
        if (crush)
            bonds.push_back(std::make_shared<ScheduleMap>(cs[i], cs[i - 1], std::vector<CollapseStep>{{{i}, {0, i}}}));
        else
            bonds.push_back(std::make_shared<ConeFoldMap>(cs[i], cs[i - 1], i));
    }
    return InverseSystem(spec.name, {cs.begin(), cs.end()}, std::move(bonds), spec.to_json());
}

/// Projection I^i -> I^{i-1} killing the last live axis.
class AxisProjection final : public RetractionMap {
public:
    AxisProjection(SpacePtr domain, SpacePtr image, std::size_t axis)
        : RetractionMap(std::move(domain), std::move(image)), axis_(axis) {}
    MapKind kind() const override { return MapKind::Custom; }
    GeometricPoint eval(const GeometricPoint& x) const override {
        GeometricPoint y = x;
        y.coords.at(axis_) = 0.0;
        return y;
    }
    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double t) const override {
        GeometricPoint y = x;
        y.coords.at(axis_) *= 1.0 - std::clamp(t, 0.0, 1.0);
        return y;
    }
    // Every point of the image is the projection of a moved point.
    double moved_image_distance(const GeometricPoint&) const override { return 0.0; }
    std::optional<GeometricPoint> lift(const GeometricPoint& c, double) const override {
        GeometricPoint y = c;
        y.coords.at(axis_) = 1.0;
        return y;
    }
    json to_json() const override { return {{"kind", "projection"}, {"axis", axis_}}; }

private:
    std::size_t axis_;
};

InverseSystem cube_system(const GallerySpec& spec) {
    const auto dim = static_cast<std::size_t>(spec.depth);
    std::vector<SpacePtr> spaces;
    for (std::size_t i = 0; i <= dim; ++i) {
        std::vector<double> hi(dim, 0.0);
        std::fill(hi.begin(), hi.begin() + static_cast<std::ptrdiff_t>(i), 1.0);
        spaces.push_back(std::make_shared<BoxSpace>(std::vector<double>(dim, 0.0), hi));
    }
    std::vector<MapPtr> bonds;
    for (std::size_t i = 1; i <= dim; ++i) bonds.push_back(std::make_shared<AxisProjection>(spaces[i], spaces[i - 1], i - 1));
    return InverseSystem(spec.name, std::move(spaces), std::move(bonds), spec.to_json());
}

} // namespace

const std::vector<std::string>& gallery_names() { return kNames; }

json GallerySpec::to_json() const {
    json j{{"gallery", name}, {"depth", depth}};
    if (name == "tree-balls" || name == "tree-countable") j["tree"] = tree;
    if (name == "telescope") j["maps"] = maps;
    if (name == "rn-shells") j["dimension"] = dimension;
    if (!edges.empty()) {
        j["edges"] = edges;
        j["order"] = order;
    }
    return j;
}

GallerySpec GallerySpec::from_json(const json& j) {
    try {
        GallerySpec s;
        s.name = j.at("gallery").get<std::string>();
        s.depth = j.value("depth", s.depth);
        s.tree = j.value("tree", s.tree);
        s.maps = j.value("maps", s.maps);
        s.dimension = j.value("dimension", s.dimension);
        if (j.contains("edges")) s.edges = j.at("edges").get<std::vector<std::pair<int, int>>>();
        if (j.contains("order")) s.order = j.at("order").get<std::vector<int>>();
        return s;
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("malformed gallery spec: ") + e.what());
    }
}

InverseSystem build(const GallerySpec& spec) {
    if (std::find(kNames.begin(), kNames.end(), spec.name) == kNames.end())
        throw InvalidSpec("unknown gallery system '" + spec.name + "'");
    if (spec.depth < 1) throw InvalidSpec("depth must be at least 1");
    if (spec.depth > 4096) throw InvalidSpec("depth too large");
    const auto& n = spec.name;
    if (n == "ray-endpoint") return ray_system(spec, RayRule::Endpoint);
    if (n == "ray-shift") return ray_system(spec, RayRule::Shift);
    if (n == "ray-bucket") return ray_system(spec, RayRule::Bucket);
    if (n == "cone-retract") return cone_system(spec, false);
    if (n == "cone-crush") return cone_system(spec, true);
    if (n == "infinite-cube") {
        if (spec.depth > 24) throw InvalidSpec("infinite-cube depth is capped at 24 axes");
        return cube_system(spec);
    }
    if (n == "tangent-disks") return detail::disk_system(spec);
    if (n == "circle-hulls") {
        if (spec.depth > 20) throw InvalidSpec("circle-hulls depth is capped at 20");
        return detail::hull_system(spec);
    }
    if (n == "telescope") return detail::telescope_system(spec);
    if (n == "tree-balls") return detail::tree_ball_system(spec);
    if (n == "tree-countable") return detail::countable_tree_system(spec);
    return detail::rn_shell_system(spec);
}

InverseSystem build(const json& spec) { return build(GallerySpec::from_json(spec)); }

double aligned_spacing(const GallerySpec& spec) {
    const auto& n = spec.name;
    if (n.rfind("ray-", 0) == 0) return 1.0 / 256.0;
    if (n.rfind("cone-", 0) == 0) return 1.0 / 16.0;
    if (n == "infinite-cube" || n == "tangent-disks" || n == "circle-hulls") return 0.5;
    if (n == "rn-shells") return 1.0;
    return 0.25;
}

InverseSystem folded_interval_system() {
    std::vector<SpacePtr> spaces{BoxSpace::interval(0.0, 1.0), BoxSpace::interval(-1.0, 1.0)};
    std::vector<MapPtr> bonds{std::make_shared<PiecewiseLinearMap>(spaces[1], spaces[0], pl({{-1, 1}, {0, 0}, {1, 1}}), true)};
    return InverseSystem("folded-interval", std::move(spaces), std::move(bonds));
}

} // namespace collapsekit
