#ifndef COLLAPSEKIT_GEOMETRY_HPP
#define COLLAPSEKIT_GEOMETRY_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapsekit/complex.hpp"
#include "collapsekit/pl1d.hpp"

namespace collapsekit {

using json = nlohmann::json;

class OutsideDomain : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChainMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingHomotopy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Carrier cell plus chart coordinates. What the carrier and coords mean is fixed by the hosting space:
/// a simplex and its barycentric coordinates, an edge and a parameter, a cylinder level and (base, height).
struct GeometricPoint {
    std::vector<int> carrier;
    std::vector<double> coords;

    bool operator==(const GeometricPoint&) const = default;
};

json to_json(const GeometricPoint& p);
GeometricPoint point_from_json(const json& j);
/// Plain Euclidean point with an empty carrier.
GeometricPoint euclidean_point(std::vector<double> coords);

/// Euclidean distance from x to the convex hull of affinely independent points.
double point_simplex_distance(std::span<const double> x, const std::vector<std::vector<double>>& vertices);

/// A compact metric space with a sampling scheme.
class Space {
public:
    virtual ~Space() = default;
    virtual std::string kind() const = 0;
    virtual double distance(const GeometricPoint& a, const GeometricPoint& b) const = 0;
    virtual bool contains(const GeometricPoint& p, double tol = 1e-9) const = 0;
    /// Deterministic sample cloud with the given spacing.
    virtual std::vector<GeometricPoint> grid(double spacing) const = 0;
    /// Vertices, cell barycenters and similar distinguished points.
    virtual std::vector<GeometricPoint> landmarks() const = 0;
    virtual std::vector<GeometricPoint> random_points(std::size_t count, std::mt19937_64& rng) const;
    /// Flat coordinates for export.
    virtual std::vector<double> embed(const GeometricPoint& p) const { return p.coords; }
    /// True when distance() is the Euclidean distance between embed() images.
    virtual bool euclidean_embedding() const { return false; }
    virtual json to_json() const = 0;
};

using SpacePtr = std::shared_ptr<const Space>;

/// Axis-aligned box in R^n with the Euclidean metric. Degenerate axes (lo == hi) are allowed.
class BoxSpace final : public Space {
public:
    BoxSpace(std::vector<double> lo, std::vector<double> hi);
    static std::shared_ptr<BoxSpace> interval(double lo, double hi) { return std::make_shared<BoxSpace>(std::vector{lo}, std::vector{hi}); }

    std::string kind() const override { return "box"; }
    double distance(const GeometricPoint& a, const GeometricPoint& b) const override;
    bool contains(const GeometricPoint& p, double tol) const override;
    std::vector<GeometricPoint> grid(double spacing) const override;
    std::vector<GeometricPoint> landmarks() const override;
    std::vector<GeometricPoint> random_points(std::size_t count, std::mt19937_64& rng) const override;
    bool euclidean_embedding() const override { return true; }
    json to_json() const override;

    std::size_t dim() const { return lo_.size(); }
    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    /// Grid cap: boxes refuse to emit more than this many grid points and coarsen instead.
    static constexpr std::size_t kMaxGrid = 200000;

private:
    std::vector<double> lo_, hi_;
};

/// Finite simplicial complex whose points are (support simplex, barycentric coordinates). Distances use
/// either a Euclidean realization of the vertices or, for 1-dimensional forests, the unit-edge path metric.
class ComplexSpace final : public Space {
public:
    enum class Metric { Euclidean, TreePath };

    /// Grids place about max-edge / spacing points along each simplex, `face_refine` times more on
    /// simplices below the top dimension.
    ComplexSpace(SimplicialComplex complex, std::map<Vertex, std::vector<double>> positions, int face_refine = 1);
    /// 1-dimensional complex with the path metric; must be a forest.
    explicit ComplexSpace(SimplicialComplex tree);

    std::string kind() const override { return "complex"; }
    double distance(const GeometricPoint& a, const GeometricPoint& b) const override;
    bool contains(const GeometricPoint& p, double tol) const override;
    std::vector<GeometricPoint> grid(double spacing) const override;
    std::vector<GeometricPoint> landmarks() const override;
    std::vector<GeometricPoint> random_points(std::size_t count, std::mt19937_64& rng) const override;
    std::vector<double> embed(const GeometricPoint& p) const override;
    bool euclidean_embedding() const override { return metric_ == Metric::Euclidean; }
    json to_json() const override;

    const SimplicialComplex& complex() const { return complex_; }
    Metric metric() const { return metric_; }
    const std::map<Vertex, std::vector<double>>& positions() const { return positions_; }
    /// Euclidean position of a point (Euclidean metric only).
    std::vector<double> realize(const GeometricPoint& p) const;
    /// Point of the given simplex with the given barycentric coordinates, reduced to its support.
    static GeometricPoint make_point(const Simplex& s, std::vector<double> bary);
    static GeometricPoint vertex_point(Vertex v) { return {{v}, {1.0}}; }
    /// Euclidean distance from a point to a closed simplex of this complex.
    double distance_to_simplex(const GeometricPoint& p, const Simplex& s) const;

private:
    double tree_distance(const GeometricPoint& a, const GeometricPoint& b) const;
    int vertex_tree_distance(Vertex a, Vertex b) const;

    SimplicialComplex complex_;
    Metric metric_;
    std::map<Vertex, std::vector<double>> positions_;
    int face_refine_ = 1;
    // Rooted forest data for the path metric.
    std::map<Vertex, Vertex> parent_;
    std::map<Vertex, int> depth_;
};

/// Points of every simplex of k with barycentric coordinates in (1/m)Z, each listed once on its support.
std::vector<GeometricPoint> simplex_lattice(const SimplicialComplex& k, int m);

/// Standard Euclidean realization of an n-simplex: the free facet (vertices 0..n-1) lies in
/// R^{n-1} x {0} with barycenter at the origin, the apex (vertex n) sits at height sqrt((n+1)/n), and
/// every edge has length sqrt(2).
class SimplexChart {
public:
    explicit SimplexChart(int n);
    int dim() const { return n_; }
    const std::vector<std::vector<double>>& vertices() const { return verts_; }
    std::vector<double> to_euclidean(std::span<const double> bary) const;
    std::vector<double> to_barycentric(std::span<const double> x) const;

private:
    int n_;
    std::vector<std::vector<double>> verts_;
};

/// Ray collapse in barycentric coordinates of an n-simplex whose free facet is opposite `apex`.
/// Returns coordinates on the faces containing the apex.
std::vector<double> ray_collapse_barycentric(std::span<const double> bary, std::size_t apex);

/// Elementary simplicial collapse of sigma across its free facet tau, applied to a point of |sigma|.
/// The point's carrier must be a face of sigma.
GeometricPoint simplicial_collapse_eval(const Simplex& sigma, const Simplex& tau, const GeometricPoint& x,
                                        double tol = 1e-12);

/// Apex collapse of [-1,1]^n onto J = boundary minus the open top face, rays from (0,...,0,2).
std::vector<double> cubical_collapse_eval(std::span<const double> x, double tol = 1e-12);

/// Elementary cubical collapse of a unit grid box across its free facet, in grid coordinates.
std::vector<double> cubical_cell_collapse_eval(const Cube& sigma, const Cube& tau, std::span<const double> x,
                                               double tol = 1e-12);

/// Simplicial map given by a vertex map, applied to barycentric points.
struct SimplicialMap {
    SimplicialComplex domain;
    SimplicialComplex codomain;
    std::map<Vertex, Vertex> vertex_map;

    /// Throws std::invalid_argument if some simplex does not map onto a simplex.
    void check() const;
    GeometricPoint operator()(const GeometricPoint& x) const;
};

/// Point of a mapping cylinder: either a base point x at height t (t = 1 is the domain end) or a point
/// of the range.
struct CylinderPoint {
    GeometricPoint point;
    double t = 0.0;
    bool in_range = false;
};

/// Mapping cylinder collapse (x, t) -> f(x); range points fixed.
GeometricPoint cylinder_collapse_eval(const SimplicialMap& f, const CylinderPoint& p);

enum class MapKind {
    Identity,
    ElementarySimplicial,
    CylinderCollapse,
    PiecewiseLinear1D,
    Schedule,
    Composite,
    Custom,
};

std::string to_string(MapKind k);

/// Retraction of `domain` onto the subspace `image`, optionally with the linear-track deformation
/// retraction that culminates in it.
class RetractionMap {
public:
    RetractionMap(SpacePtr domain, SpacePtr image) : domain_(std::move(domain)), image_(std::move(image)) {}
    virtual ~RetractionMap() = default;

    virtual MapKind kind() const = 0;
    virtual GeometricPoint eval(const GeometricPoint& x) const = 0;
    virtual bool has_tracks() const { return false; }
    /// H(x, t); H(x, 0) = x, H(x, 1) = eval(x). Throws MissingHomotopy without tracks.
    virtual GeometricPoint track(const GeometricPoint& x, double t) const;

    /// Infimum distance from c (a point of the image) to eval(domain minus image). Sample-based unless
    /// overridden.
    virtual double moved_image_distance(const GeometricPoint& c) const;
    /// A point y of domain minus image with d(eval(y), c) < radius, if one is found.
    virtual std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const;
    virtual json to_json() const = 0;

    const SpacePtr& domain() const { return domain_; }
    const SpacePtr& image() const { return image_; }

    /// Spacing used by the sample-based defaults above.
    static constexpr double kProbeSpacing = 1.0 / 32.0;

protected:
    SpacePtr domain_, image_;
};

using MapPtr = std::shared_ptr<const RetractionMap>;

class IdentityMap final : public RetractionMap {
public:
    explicit IdentityMap(SpacePtr space) : RetractionMap(space, space) {}
    MapKind kind() const override { return MapKind::Identity; }
    GeometricPoint eval(const GeometricPoint& x) const override { return x; }
    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double) const override { return x; }
    double moved_image_distance(const GeometricPoint&) const override;
    std::optional<GeometricPoint> lift(const GeometricPoint&, double) const override { return std::nullopt; }
    json to_json() const override { return {{"kind", "identity"}}; }
};

/// Retraction given by closures. The track, when supplied, is used as is: nothing checks it is faithful.
class FunctionMap final : public RetractionMap {
public:
    using Eval = std::function<GeometricPoint(const GeometricPoint&)>;
    using Track = std::function<GeometricPoint(const GeometricPoint&, double)>;

    FunctionMap(SpacePtr domain, SpacePtr image, std::string name, Eval eval, Track track = {})
        : RetractionMap(std::move(domain), std::move(image)), name_(std::move(name)), eval_(std::move(eval)),
          track_(std::move(track)) {}
    MapKind kind() const override { return MapKind::Custom; }
    GeometricPoint eval(const GeometricPoint& x) const override { return eval_(x); }
    bool has_tracks() const override { return static_cast<bool>(track_); }
    GeometricPoint track(const GeometricPoint& x, double t) const override;
    json to_json() const override { return {{"kind", "custom"}, {"name", name_}}; }

private:
    std::string name_;
    Eval eval_;
    Track track_;
};

/// Continuous piecewise-linear retraction of an interval [0, L] (or any [a, b]) onto a subinterval.
/// Tracks are the straight-line homotopy and exist only when declared.
class PiecewiseLinearMap final : public RetractionMap {
public:
    PiecewiseLinearMap(SpacePtr domain, SpacePtr image, PiecewiseLinear f, bool straight_tracks);
    MapKind kind() const override { return MapKind::PiecewiseLinear1D; }
    GeometricPoint eval(const GeometricPoint& x) const override;
    bool has_tracks() const override { return tracks_; }
    GeometricPoint track(const GeometricPoint& x, double t) const override;
    double moved_image_distance(const GeometricPoint& c) const override;
    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override;
    json to_json() const override;

    const PiecewiseLinear& function() const { return f_; }
    /// Image of the moved part, exactly.
    const IntervalSet& moved_image() const { return moved_image_; }
    /// Endpoints of the image interval.
    const Interval& image_interval() const { return image_box_; }

private:
    PiecewiseLinear f_;
    bool tracks_;
    Interval image_box_;
    IntervalSet moved_image_;
};

/// Composite of elementary simplicial collapses on a ComplexSpace, evaluated step by step with the ray
/// formula. Tracks run the steps one after another in equal time slices.
class ScheduleMap final : public RetractionMap {
public:
    ScheduleMap(std::shared_ptr<const ComplexSpace> domain, std::shared_ptr<const ComplexSpace> image,
                std::vector<CollapseStep> steps);
    MapKind kind() const override { return MapKind::Schedule; }
    GeometricPoint eval(const GeometricPoint& x) const override;
    bool has_tracks() const override { return true; }
    GeometricPoint track(const GeometricPoint& x, double t) const override;
    double moved_image_distance(const GeometricPoint& c) const override;
    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override;
    json to_json() const override;

    const std::vector<CollapseStep>& steps() const { return steps_; }
    /// Closed simplices of the image covering eval(domain minus image), from the schedule alone.
    const std::vector<Simplex>& moved_image_cells() const { return moved_cells_; }

private:
    GeometricPoint apply_step(const CollapseStep& step, const GeometricPoint& x) const;
    GeometricPoint partial_step(const CollapseStep& step, const GeometricPoint& x, double s) const;

    std::shared_ptr<const ComplexSpace> domain_c_, image_c_;
    /// Index of the step that removes each cell.
    std::size_t step_of(const Simplex& cell) const;

    std::vector<CollapseStep> steps_;
    std::map<Simplex, std::size_t> removed_by_;
    std::vector<Simplex> moved_cells_;
};

/// Right-to-left composite: maps[0] o maps[1] o ... o maps[n-1]. The homotopy runs the constituents in
/// equal time slices, innermost first.
class CompositeMap final : public RetractionMap {
public:
    CompositeMap(std::vector<MapPtr> maps, SpacePtr space_if_empty);
    MapKind kind() const override { return MapKind::Composite; }
    GeometricPoint eval(const GeometricPoint& x) const override;
    bool has_tracks() const override;
    GeometricPoint track(const GeometricPoint& x, double t) const override;
    double moved_image_distance(const GeometricPoint& c) const override;
    std::optional<GeometricPoint> lift(const GeometricPoint& c, double radius) const override;
    json to_json() const override;

    const std::vector<MapPtr>& maps() const { return maps_; }

private:
    std::vector<MapPtr> maps_;
};

/// Checks image(maps[k+1]) == domain(maps[k]) (same space object) and builds the composite.
/// An empty list gives the identity on `space`.
MapPtr compose(const std::vector<MapPtr>& maps, SpacePtr space = nullptr);

/// The linear-track deformation retraction attached to a map.
class HomotopyEvaluator {
public:
    explicit HomotopyEvaluator(MapPtr map);
    GeometricPoint operator()(const GeometricPoint& x, double t) const { return map_->track(x, t); }
    GeometricPoint culmination(const GeometricPoint& x) const { return map_->eval(x); }
    const Space& space() const { return *map_->domain(); }
    const MapPtr& map() const { return map_; }

private:
    MapPtr map_;
};

/// Concatenation H*J: H at double speed on [0, 1/2], then J from H(x, 1). J must be defined on the
/// image of H's culmination.
GeometricPoint concatenate(const HomotopyEvaluator& h, const HomotopyEvaluator& j, const GeometricPoint& x, double t);

struct TrackReport {
    bool passed = true;
    double worst = 0.0;
    std::optional<GeometricPoint> witness;
    double witness_t = 0.0;
    std::size_t checked = 0;
};

/// Verifies H1(Ht(x)) = H1(x) on every sample and time.
TrackReport track_faithful_check(const HomotopyEvaluator& h, const std::vector<GeometricPoint>& samples,
                                 const std::vector<double>& ts, double tol);

struct RetractionReport {
    bool idempotent = true;
    bool fixes_image = true;
    bool lands_in_image = true;
    double worst = 0.0;
    std::optional<GeometricPoint> witness;
};

/// Idempotence, image fixing and image containment on the given samples.
RetractionReport retraction_check(const RetractionMap& map, const std::vector<GeometricPoint>& domain_samples,
                                  const std::vector<GeometricPoint>& image_samples, double tol);

/// Evenly spaced time grid 0, 1/(n-1), ..., 1.
std::vector<double> time_grid(std::size_t n);

} // namespace collapsekit

#endif
