#ifndef COLLAPSEKIT_GALLERY_HPP
#define COLLAPSEKIT_GALLERY_HPP

#include <array>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collapsekit/limitkit.hpp"
#include "collapsekit/system.hpp"

namespace collapsekit {

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MapMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotATree : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class WrongSystemKind : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Names accepted by build().
const std::vector<std::string>& gallery_names();

struct GallerySpec {
    std::string name;
    int depth = 6;
    /// tree-balls / tree-countable: "binary", "path", "star3", "star" (countable only).
    std::string tree = "binary";
    /// telescope: "point", "degree1", "degree2".
    std::string maps = "degree1";
    /// rn-shells: simplex dimension.
    int dimension = 2;
    /// tree-countable with an explicit tree: edge list and vertex enumeration.
    std::vector<std::pair<int, int>> edges;
    std::vector<int> order;

    json to_json() const;
    static GallerySpec from_json(const json& j);
};

InverseSystem build(const GallerySpec& spec);
/// Rebuilds a system from its serialized gallery spec.
InverseSystem build(const json& spec);

/// C_0 = [0, 1], C_1 = [-1, 1] with r_1(x) = |x| and the straight-line homotopy, which is not
/// track-faithful.
InverseSystem folded_interval_system();

/// Default sample spacing aligned with the builder's bonds, so bonds send grid points to grid points
/// (or, for planar systems, onto finely sampled boundaries).
double aligned_spacing(const GallerySpec& spec);

// ------------------------------------------------------------------------------------- planar spaces

/// C_j of the tangent-disk system: the closed disk of radius j centered at (0, j), C_0 the origin.
class DiskSpace final : public Space {
public:
    explicit DiskSpace(int j) : j_(j) {}
    std::string kind() const override { return "disk"; }
    double distance(const GeometricPoint& a, const GeometricPoint& b) const override;
    bool contains(const GeometricPoint& p, double tol) const override;
    /// Lattice points plus boundary samples of every C_i, i <= j, eight times finer.
    std::vector<GeometricPoint> grid(double spacing) const override;
    std::vector<GeometricPoint> landmarks() const override;
    std::vector<GeometricPoint> random_points(std::size_t count, std::mt19937_64& rng) const override;
    bool euclidean_embedding() const override { return true; }
    json to_json() const override { return {{"kind", "disk"}, {"j", j_}}; }
    int index() const { return j_; }

private:
    int j_;
};

/// C_j of the circle-hull system: the convex hull of the 2^j points exp(k pi i / 2^(j-1)); C_0 the origin
/// and C_1 the segment [-1, 1] x {0}.
class HullSpace final : public Space {
public:
    explicit HullSpace(int j) : j_(j) {}
    std::string kind() const override { return "hull"; }
    double distance(const GeometricPoint& a, const GeometricPoint& b) const override;
    bool contains(const GeometricPoint& p, double tol) const override;
    std::vector<GeometricPoint> grid(double spacing) const override;
    std::vector<GeometricPoint> landmarks() const override;
    bool euclidean_embedding() const override { return true; }
    json to_json() const override { return {{"kind", "hull"}, {"j", j_}}; }
    int index() const { return j_; }
    /// Hull vertices in angle order.
    std::vector<std::array<double, 2>> vertices() const;
    /// Distance from p to the boundary of the hull (to the segment for j = 1).
    double boundary_distance(std::span<const double> p) const;

private:
    int j_;
};

// ---------------------------------------------------------------------------------------- telescope

/// One stage K_l of a telescope: a finite complex with vertex positions in a common R^d.
struct TelescopeStage {
    SimplicialComplex complex;
    std::map<Vertex, std::vector<double>> positions;
};

/// Shared data of an inverse mapping telescope: stages K_0..K_N and simplicial maps f_l : K_l -> K_{l-1}.
struct TelescopeData {
    std::vector<TelescopeStage> stages;
    /// maps[l] is f_l for l >= 1; maps[0] unused.
    std::vector<SimplicialMap> maps;
    std::size_t position_dim = 0;

    int top() const { return static_cast<int>(stages.size()) - 1; }
    /// Point of level l with the given simplex, barycentric coordinates and height, pushed down through the
    /// identification (x, l-1) ~ f_l(x) when it sits on the range end.
    GeometricPoint make_point(int level, const Simplex& s, std::vector<double> bary, double h) const;
    /// (h, P(y_0), ..., P(y_{l-1}), (h - l + 1) P(y_l), 0, ...), with y_m the images under the lower maps.
    std::vector<double> embed(const GeometricPoint& p) const;
};

/// C_i = Map(f_1) u ... u Map(f_i). Points: carrier [level, support vertices], coords [barycentric..., h]
/// with h in (level - 1, level] (h = 0 on K_0).
class TelescopeSpace final : public Space {
public:
    TelescopeSpace(std::shared_ptr<const TelescopeData> data, int top) : data_(std::move(data)), top_(top) {}
    std::string kind() const override { return "telescope"; }
    double distance(const GeometricPoint& a, const GeometricPoint& b) const override;
    bool contains(const GeometricPoint& p, double tol) const override;
    std::vector<GeometricPoint> grid(double spacing) const override;
    std::vector<GeometricPoint> landmarks() const override;
    std::vector<double> embed(const GeometricPoint& p) const override { return data_->embed(p); }
    bool euclidean_embedding() const override { return true; }
    json to_json() const override { return {{"kind", "telescope"}, {"top", top_}}; }
    const TelescopeData& data() const { return *data_; }
    int top() const { return top_; }

private:
    std::shared_ptr<const TelescopeData> data_;
    int top_;
};

/// Mapping-cylinder collapse r_i : C_i -> C_{i-1}, (x, t) -> f_i(x); tracks slide down the cylinder.
class CylinderCollapseMap final : public RetractionMap {
public:
    CylinderCollapseMap(std::shared_ptr<const TelescopeSpace> domain, std::shared_ptr<const TelescopeSpace> image);
    MapKind kind() const override { return MapKind::CylinderCollapse; }
    GeometricPoint eval(const GeometricPoint& x) const override;
    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double t) const override;
    double moved_image_distance(const GeometricPoint& c) const override;
    json to_json() const override { return {{"kind", "cylinder"}, {"level", level_}}; }

private:
    const TelescopeData& data_;
    int level_;
    /// Embedded vertices of each simplex of f_i(K_i) on the top of level i-1.
    std::vector<std::vector<std::vector<double>>> image_cells_;
};

/// Stages and maps must chain: maps[l] : stages[l] -> stages[l-1] simplicial. Throws MapMismatch.
InverseSystem telescope_build(std::vector<TelescopeStage> stages, std::vector<SimplicialMap> maps, json spec = {});

/// Stage families: "point", "degree1" (3*2^l-gons, subdivision-forgetting), "degree2" (2^(l+2)-gons, z -> z^2).
std::pair<std::vector<TelescopeStage>, std::vector<SimplicialMap>> telescope_family(const std::string& maps, int depth);

// -------------------------------------------------------------------------------------------- trees

struct TreeGraph {
    std::vector<std::pair<int, int>> edges;
    int root = 0;
};

/// Finite truncation of a named rooted tree to radius `radius`.
TreeGraph named_tree(const std::string& name, int radius);

/// T_0 = {v_0}; each stage attaches the arc from the next enumerated vertex outside the current subtree.
/// Bonds collapse the new arc onto its attachment point. Stops after `depth` stages or when the
/// enumeration runs out. Throws NotATree.
InverseSystem countable_tree_filtration(const std::vector<std::pair<int, int>>& edges, const std::vector<int>& order,
                                        int depth, json spec = {});

struct TreeEndsReport {
    int depth = 0;
    std::size_t candidates = 0;
    std::size_t classes = 0;
    double threshold = 0.0;
    /// Pairwise product-metric separations between class representatives.
    double min_separation = 0.0;
    double max_separation = 0.0;
    /// Worst deviation from 2^-k - 2^-N, with k the level of the last common vertex (tree-balls only).
    double pattern_error = 0.0;
    json to_json() const;
};

/// Remainder classes of a tree system: threads of the deepest leaves, clustered at threshold
/// 2^-(N+1) (tree-balls) or by exact distinctness (tree-countable). Throws WrongSystemKind.
TreeEndsReport tree_ends(const InverseSystem& sys, int depth);

} // namespace collapsekit

#endif
