#ifndef COLLAPSEKIT_SYSTEM_HPP
#define COLLAPSEKIT_SYSTEM_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapsekit/geometry.hpp"

namespace collapsekit {

class IndexOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Nested spaces C_0 <= C_1 <= ... <= C_N with retractions r_i : C_i -> C_{i-1}.
/// Points of C_{i-1} are points of C_i as they stand, so inclusions are implicit.
class InverseSystem {
public:
    InverseSystem(std::string name, std::vector<SpacePtr> spaces, std::vector<MapPtr> bonds, json spec = {});

    const std::string& name() const { return name_; }
    /// Generating parameters (gallery spec), empty for hand-built systems.
    const json& spec() const { return spec_; }
    int depth() const { return static_cast<int>(spaces_.size()) - 1; }
    const SpacePtr& space(int i) const;
    /// r_i : C_i -> C_{i-1}, 1 <= i <= depth.
    const MapPtr& bond(int i) const;
    /// Smallest k with x in C_k, or -1.
    int level_of(const GeometricPoint& x, double tol = 1e-12) const;
    /// True when every bond is a 1-D piecewise-linear map.
    bool piecewise_linear() const;

private:
    std::string name_;
    std::vector<SpacePtr> spaces_;
    std::vector<MapPtr> bonds_;
    json spec_;
};

/// r_ij : C_j -> C_i. Exact breakpoint composition for piecewise-linear systems (no tracks for j > i + 1),
/// otherwise the right-to-left composite.
MapPtr bond_composite(const InverseSystem& sys, int i, int j);
/// Exact r_ij for piecewise-linear systems.
PiecewiseLinear composite_function(const InverseSystem& sys, int i, int j);

/// Subset of a fixed C_j: an exact interval set (1-D models) or a finite union of open metric balls.
struct OpenSetRep {
    enum class Kind { Intervals, Balls };
    struct Ball {
        GeometricPoint center;
        double radius;
    };

    Kind kind = Kind::Balls;
    IntervalSet intervals;
    std::vector<Ball> balls;

    static OpenSetRep empty() { return {}; }
    static OpenSetRep of_intervals(IntervalSet s) { return {Kind::Intervals, std::move(s), {}}; }
    static OpenSetRep ball(GeometricPoint c, double r) { return {Kind::Balls, {}, {{std::move(c), r}}}; }
    bool is_empty() const { return kind == Kind::Intervals ? intervals.empty() : balls.empty(); }
    bool contains(const Space& host, const GeometricPoint& p) const;
    OpenSetRep unite(const OpenSetRep& other) const;
    json to_json() const;
};

struct StationaryCertificate {
    bool passed = true;
    int j = 0;
    int depth = 0;
    /// First k with r_jk^{-1}(A) != A.
    std::optional<int> violating_k;
    /// A point of C_k outside C_{k-1} whose image under r_k lies in A.
    std::optional<GeometricPoint> witness;
    std::string detail;
    json to_json() const;
};

/// Checks r_jk^{-1}(A) = A for j <= k <= depth. Uses r_jk^{-1}(A) = A for all k up to depth iff each
/// r_k with j < k <= depth sends C_k - C_{k-1} outside A.
StationaryCertificate stationary_check(const InverseSystem& sys, const OpenSetRep& a, int j, int depth);

struct InsulationCertificate {
    bool passed = false;
    /// Always true for failures: the search is depth-bounded.
    bool inconclusive_beyond_depth = true;
    GeometricPoint x;
    int level = 0;
    int depth = 0;
    int j = -1;
    std::optional<OpenSetRep> neighborhood;
    /// Last failed stationarity check, for failures.
    std::optional<StationaryCertificate> last_failure;
    json to_json() const;
};

struct InsulationOptions {
    /// Candidate radii 2^-1 ... 2^-max_halvings.
    int max_halvings = 12;
};

/// Searches j in [level(x), depth) and shrinking neighborhoods of x in C_j for one that is j-stationary
/// to depth: symmetric intervals for 1-D models, open metric balls otherwise.
InsulationCertificate insulated_check(const InverseSystem& sys, const GeometricPoint& x, int depth,
                                      const InsulationOptions& options = {});

enum class Verdict { Certified, CounterexampleCandidate, Inconclusive };
std::string to_string(Verdict v);

struct CoverLevel {
    int level = 0;
    std::size_t grid_points = 0;
    std::size_t covered = 0;
};

struct FullInsulationReport {
    Verdict verdict = Verdict::Inconclusive;
    int depth = 0;
    int sample_level = 0;
    std::size_t checked = 0;
    std::size_t passed = 0;
    std::vector<InsulationCertificate> failures;
    std::optional<GeometricPoint> witness;
    /// Grid points of C_i covered by the stationary neighborhoods found.
    std::vector<CoverLevel> cover;
    bool cover_complete = false;
    std::string note;
    json to_json() const;
};

struct FullInsulationOptions {
    std::size_t sample_budget = 48;
    std::uint64_t seed = 1;
    /// Number of deepest bonds every sampled point is checked against.
    int margin = 3;
    double cover_spacing = 0.25;
    InsulationOptions insulation{};
};

/// Samples landmarks and random points of C_{depth - margin} and runs insulated_check on each.
FullInsulationReport fully_insulated_check(const InverseSystem& sys, int depth,
                                           const FullInsulationOptions& options = {});

} // namespace collapsekit

#endif
