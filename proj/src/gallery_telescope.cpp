#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "gallery_builders.hpp"

namespace collapsekit {

namespace {

struct Decoded {
    int level;
    GeometricPoint base;
    double h;
};

Decoded decode(const GeometricPoint& p) {
    if (p.carrier.size() < 2 || p.coords.size() != p.carrier.size())
        throw OutsideDomain("not a telescope point");
    Decoded d;
    d.level = p.carrier[0];
    d.base.carrier.assign(p.carrier.begin() + 1, p.carrier.end());
    d.base.coords.assign(p.coords.begin(), p.coords.end() - 1);
    d.h = p.coords.back();
    return d;
}

std::vector<double> realize(const TelescopeStage& st, const GeometricPoint& x, std::size_t dim) {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < x.carrier.size(); ++i) {
        const auto& v = st.positions.at(x.carrier[i]);
        for (std::size_t k = 0; k < dim; ++k) out[k] += x.coords[i] * v[k];
    }
    return out;
}

int lattice_denominator(double spacing) {
    int m = 1;
    while (m < 1.0 / spacing - 1e-9 && m < (1 << 12)) m *= 2;
    return m;
}

} // namespace

GeometricPoint TelescopeData::make_point(int level, const Simplex& s, std::vector<double> bary, double h) const {
    auto base = ComplexSpace::make_point(s, std::move(bary));
    if (level == 0) h = 0.0;
    // (x, l-1) in Map(f_l) is f_l(x) on the top of the level below.
    while (level > 0 && h <= level - 1 + 1e-12) {
        base = maps[static_cast<std::size_t>(level)](base);
        --level;
        h = level;
    }
    GeometricPoint p;
    p.carrier.push_back(level);
    p.carrier.insert(p.carrier.end(), base.carrier.begin(), base.carrier.end());
    p.coords = base.coords;
    p.coords.push_back(level == 0 ? 0.0 : h);
    return p;
}

std::vector<double> TelescopeData::embed(const GeometricPoint& p) const {
    auto d = decode(p);
    const auto& dim = position_dim;
    std::vector<double> out(1 + stages.size() * dim, 0.0);
    out[0] = d.h;
    auto put = [&](int block, const GeometricPoint& y, double scale) {
        const auto x = realize(stages[static_cast<std::size_t>(block)], y, dim);
        for (std::size_t k = 0; k < dim; ++k) out[1 + static_cast<std::size_t>(block) * dim + k] = scale * x[k];
    };
    put(d.level, d.base, d.h - d.level + 1.0);
    GeometricPoint y = d.base;
    for (int m = d.level - 1; m >= 0; --m) {
        y = maps[static_cast<std::size_t>(m + 1)](y);
        put(m, y, 1.0);
    }
    return out;
}

double TelescopeSpace::distance(const GeometricPoint& a, const GeometricPoint& b) const {
    if (a == b) return 0.0;
    const auto ea = embed(a), eb = embed(b);
    double s = 0.0;
    for (std::size_t k = 0; k < ea.size(); ++k) s += (ea[k] - eb[k]) * (ea[k] - eb[k]);
    return std::sqrt(s);
}

bool TelescopeSpace::contains(const GeometricPoint& p, double tol) const {
    if (p.carrier.size() < 2 || p.coords.size() != p.carrier.size()) return false;
    const auto d = decode(p);
    if (d.level < 0 || d.level > top_) return false;
    const auto& s = d.base.carrier;
    if (!std::is_sorted(s.begin(), s.end()) || !data_->stages[static_cast<std::size_t>(d.level)].complex.contains(s))
        return false;
    double sum = 0.0;
    for (double c : d.base.coords) {
        if (c < -tol) return false;
        sum += c;
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-12)) return false;
    if (d.level == 0) return std::abs(d.h) <= tol;
    return d.h >= d.level - 1 - tol && d.h <= d.level + tol;
}

std::vector<GeometricPoint> TelescopeSpace::grid(double spacing) const {
    // One combinatorial denominator for every stage: simplicial maps carry lattice points to lattice points.
    const int m = lattice_denominator(spacing);
    std::vector<GeometricPoint> out;
    for (int level = 0; level <= top_; ++level) {
        const auto base = simplex_lattice(data_->stages[static_cast<std::size_t>(level)].complex, m);
        for (const auto& x : base) {
            if (level == 0) {
                out.push_back(data_->make_point(0, x.carrier, x.coords, 0.0));
                continue;
            }
            for (int k = 1; k <= m; ++k)
                out.push_back(data_->make_point(level, x.carrier, x.coords, level - 1 + static_cast<double>(k) / m));
        }
    }
    return out;
}

std::vector<GeometricPoint> TelescopeSpace::landmarks() const {
    std::vector<GeometricPoint> out;
    for (int level = 0; level <= top_; ++level)
        for (Vertex v : data_->stages[static_cast<std::size_t>(level)].complex.vertices)
            out.push_back(data_->make_point(level, {v}, {1.0}, level));
    return out;
}

CylinderCollapseMap::CylinderCollapseMap(std::shared_ptr<const TelescopeSpace> domain,
                                         std::shared_ptr<const TelescopeSpace> image)
    : RetractionMap(domain, image), data_(domain->data()), level_(domain->top()) {
    if (image->top() != level_ - 1 || &image->data() != &data_)
        throw MapMismatch("cylinder collapse must go from C_i to C_{i-1} of one telescope");
    // The moved part lands on f_i(K_i) at the top of the level below, where the embedding is affine.
    const auto& f = data_.maps[static_cast<std::size_t>(level_)];
    std::set<Simplex> images;
    for (const auto& s : data_.stages[static_cast<std::size_t>(level_)].complex.simplices) {
        std::vector<Vertex> img;
        for (Vertex v : s) img.push_back(f.vertex_map.at(v));
        images.insert(make_simplex(std::move(img)));
    }
    for (const auto& s : images) {
        std::vector<std::vector<double>> verts;
        for (Vertex v : s) verts.push_back(data_.embed(data_.make_point(level_ - 1, {v}, {1.0}, level_ - 1)));
        image_cells_.push_back(std::move(verts));
    }
}

GeometricPoint CylinderCollapseMap::eval(const GeometricPoint& x) const {
    const auto d = decode(x);
    if (d.level < level_) return x;
    const auto y = data_.maps[static_cast<std::size_t>(level_)](d.base);
    return data_.make_point(level_ - 1, y.carrier, y.coords, level_ - 1);
}

GeometricPoint CylinderCollapseMap::track(const GeometricPoint& x, double t) const {
    const auto d = decode(x);
    if (d.level < level_) return x;
    t = std::clamp(t, 0.0, 1.0);
    const double h = t >= 1.0 ? level_ - 1.0 : d.h - t * (d.h - (level_ - 1));
    return data_.make_point(level_, d.base.carrier, d.base.coords, h);
}

double CylinderCollapseMap::moved_image_distance(const GeometricPoint& c) const {
    const auto target = data_.embed(c);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& verts : image_cells_) best = std::min(best, point_simplex_distance(target, verts));
    return best;
}

InverseSystem telescope_build(std::vector<TelescopeStage> stages, std::vector<SimplicialMap> maps, json spec) {
    if (stages.empty()) throw MapMismatch("a telescope needs at least one stage");
    if (maps.size() != stages.size())
        throw MapMismatch("expected one map per stage (maps[0] unused), got " + std::to_string(maps.size()) + " for " +
                          std::to_string(stages.size()) + " stages");
    auto data = std::make_shared<TelescopeData>();
    data->position_dim = stages.front().positions.empty() ? 0 : stages.front().positions.begin()->second.size();
    for (std::size_t l = 0; l < stages.size(); ++l)
        for (Vertex v : stages[l].complex.vertices) {
            auto it = stages[l].positions.find(v);
            if (it == stages[l].positions.end() || it->second.size() != data->position_dim)
                throw MapMismatch("stage " + std::to_string(l) + ": vertex " + std::to_string(v) + " has no position");
        }
    for (std::size_t l = 1; l < stages.size(); ++l) {
        if (!(maps[l].domain == stages[l].complex) || !(maps[l].codomain == stages[l - 1].complex))
            throw MapMismatch("f_" + std::to_string(l) + " does not go from K_" + std::to_string(l) + " to K_" +
                              std::to_string(l - 1));
        try {
            maps[l].check();
        } catch (const std::invalid_argument& e) {
            throw MapMismatch("f_" + std::to_string(l) + " is not simplicial: " + e.what());
        }
    }
    data->stages = std::move(stages);
    data->maps = std::move(maps);
    std::vector<std::shared_ptr<const TelescopeSpace>> spaces;
    for (int i = 0; i <= data->top(); ++i) spaces.push_back(std::make_shared<TelescopeSpace>(data, i));
    std::vector<MapPtr> bonds;
    for (int i = 1; i <= data->top(); ++i) bonds.push_back(std::make_shared<CylinderCollapseMap>(spaces[i], spaces[i - 1]));
    std::string name = spec.is_object() ? spec.value("gallery", std::string("telescope")) : std::string("telescope");
    return InverseSystem(std::move(name), {spaces.begin(), spaces.end()}, std::move(bonds), std::move(spec));
}

std::pair<std::vector<TelescopeStage>, std::vector<SimplicialMap>> telescope_family(const std::string& maps, int depth) {
    if (maps != "point" && maps != "degree1" && maps != "degree2")
        throw InvalidSpec("unknown telescope family '" + maps + "' (point, degree1, degree2)");
    if (depth < 0 || depth > 16) throw InvalidSpec("telescope depth must lie in [0, 16]");
    auto polygon_size = [&](int l) { return maps == "degree1" ? 3 * (1 << l) : 1 << (l + 2); };
    std::vector<TelescopeStage> stages;
    for (int l = 0; l <= depth; ++l) {
        TelescopeStage st;
        if (maps == "point") {
            st.complex = SimplicialComplex::closure_of({{0}});
            st.positions[0] = {0.0, 0.0};
        } else {
            const int n = polygon_size(l);
            std::vector<Simplex> edges;
            for (int k = 0; k < n; ++k) {
                edges.push_back(make_simplex({k, (k + 1) % n}));
                const double a = 2.0 * std::numbers::pi * k / n;
                st.positions[k] = {std::cos(a), std::sin(a)};
            }
            st.complex = SimplicialComplex::closure_of(edges);
        }
        stages.push_back(std::move(st));
    }
    std::vector<SimplicialMap> fs(stages.size());
    for (int l = 1; l <= depth; ++l) {
        auto& f = fs[static_cast<std::size_t>(l)];
        f.domain = stages[static_cast<std::size_t>(l)].complex;
        f.codomain = stages[static_cast<std::size_t>(l - 1)].complex;
        for (Vertex v : f.domain.vertices) {
            if (maps == "point") f.vertex_map[v] = 0;
            else if (maps == "degree1") f.vertex_map[v] = v / 2;
            else f.vertex_map[v] = v % polygon_size(l - 1);
        }
    }
    return {std::move(stages), std::move(fs)};
}

namespace detail {

InverseSystem telescope_system(const GallerySpec& spec) {
    auto [stages, maps] = telescope_family(spec.maps, spec.depth);
    return telescope_build(std::move(stages), std::move(maps), spec.to_json());
}

} // namespace detail

} // namespace collapsekit
