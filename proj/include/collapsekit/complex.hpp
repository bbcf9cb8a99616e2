#ifndef COLLAPSEKIT_COMPLEX_HPP
#define COLLAPSEKIT_COMPLEX_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace collapsekit {

using Vertex = int;
/// Sorted, duplicate-free vertex list.
using Simplex = std::vector<Vertex>;
/// One (lo, hi) pair per axis; hi == lo (a point) or hi == lo + 1 (a unit interval).
using Cube = std::vector<std::pair<int, int>>;

Simplex make_simplex(std::vector<Vertex> vertices);

struct SimplicialComplex {
    std::set<Vertex> vertices;
    std::set<Simplex> simplices;

    /// Closure of the given simplices under taking nonempty faces.
    static SimplicialComplex closure_of(const std::vector<Simplex>& generators);
    /// The full n-simplex on vertices 0..n.
    static SimplicialComplex full_simplex(int n);
    /// The boundary of the n-simplex on vertices 0..n.
    static SimplicialComplex simplex_boundary(int n);
    /// Path 0-1-...-k.
    static SimplicialComplex path(int edges);

    bool contains(const Simplex& s) const { return simplices.count(s) != 0; }
    std::size_t size() const { return simplices.size(); }
    int dimension() const;
    long euler_characteristic() const;
    bool operator==(const SimplicialComplex&) const = default;
};

struct CubicalComplex {
    std::set<Cube> cells;

    /// All faces of the given boxes.
    static CubicalComplex closure_of(const std::vector<Cube>& generators);

    bool contains(const Cube& c) const { return cells.count(c) != 0; }
    std::size_t size() const { return cells.size(); }
    int dimension() const;
    long euler_characteristic() const;
    bool operator==(const CubicalComplex&) const = default;
};

int cell_dim(const Simplex& s);
int cell_dim(const Cube& c);
/// Codimension-one faces.
std::vector<Simplex> facets(const Simplex& s);
std::vector<Cube> facets(const Cube& c);
bool is_face(const Simplex& face, const Simplex& of);
bool is_face(const Cube& face, const Cube& of);

template <class Cell>
struct BasicCollapseStep {
    Cell tau;
    Cell sigma;
    bool operator==(const BasicCollapseStep&) const = default;
};

using CollapseStep = BasicCollapseStep<Simplex>;
using CubicalCollapseStep = BasicCollapseStep<Cube>;

template <class Cell>
struct BasicCollapseSchedule {
    std::vector<BasicCollapseStep<Cell>> steps;
    /// Cell count before the first step and after each step.
    std::vector<std::size_t> filtration;
    /// Step indices at which a declared stage (e.g. one prism shell) is fully collapsed.
    std::vector<std::size_t> stage_ends;
};

using CollapseSchedule = BasicCollapseSchedule<Simplex>;
using CubicalCollapseSchedule = BasicCollapseSchedule<Cube>;

struct ValidationIssue {
    std::string kind;   ///< "missing-face", "missing-singleton", "unknown-vertex", "empty-cell", "unsorted", "bad-factor"
    std::string cell;   ///< offending cell, printed
    std::string detail; ///< e.g. the missing face
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool valid() const { return issues.empty(); }
};

ValidationReport validate(const SimplicialComplex& k);
ValidationReport validate(const CubicalComplex& k);

class NotFree : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidExpansion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<CollapseStep> free_faces(const SimplicialComplex& k);
std::vector<CubicalCollapseStep> free_faces(const CubicalComplex& k);

SimplicialComplex elementary_collapse(const SimplicialComplex& k, const CollapseStep& step);
CubicalComplex elementary_collapse(const CubicalComplex& k, const CubicalCollapseStep& step);

SimplicialComplex elementary_expansion(const SimplicialComplex& k, const Simplex& new_sigma,
                                       const Simplex& new_tau);
CubicalComplex elementary_expansion(const CubicalComplex& k, const Cube& new_sigma, const Cube& new_tau);

enum class SearchStrategy { Greedy, Exhaustive };
enum class SearchStatus { Found, ProvenNotFound, Inconclusive };

std::string to_string(SearchStatus s);

struct SearchOptions {
    SearchStrategy strategy = SearchStrategy::Exhaustive;
    /// 0 keeps the lexicographic order; any other value randomizes greedy choices.
    std::uint64_t seed = 0;
    /// Greedy: maximum number of steps. Exhaustive: maximum number of explored states.
    std::size_t step_limit = 1'000'000;
    /// Exhaustive search is complete only below this many cells.
    std::size_t cell_budget = 64;
};

template <class Cell>
struct BasicSearchOutcome {
    SearchStatus status = SearchStatus::Inconclusive;
    BasicCollapseSchedule<Cell> schedule;
    std::string reason;
    bool found() const { return status == SearchStatus::Found; }
};

using SearchOutcome = BasicSearchOutcome<Simplex>;
using CubicalSearchOutcome = BasicSearchOutcome<Cube>;

/// Target given as a subcomplex. An empty target means "any single vertex".
SearchOutcome collapse_search(const SimplicialComplex& k, const SimplicialComplex& target,
                              const SearchOptions& options = {});
/// Collapse onto the named vertex.
SearchOutcome collapse_search(const SimplicialComplex& k, Vertex target, const SearchOptions& options = {});
CubicalSearchOutcome collapse_search(const CubicalComplex& k, const CubicalComplex& target,
                                     const SearchOptions& options = {});

/// Applies steps in order, checking each one. Throws NotFree on the first invalid step.
SimplicialComplex replay(const SimplicialComplex& k, const CollapseSchedule& schedule);
CubicalComplex replay(const CubicalComplex& k, const CubicalCollapseSchedule& schedule);

struct PrismFiltration {
    SimplicialComplex complex;
    /// Collapse order: outermost shell first, then any core collapse.
    CollapseSchedule schedule;
    /// Subcomplex the schedule ends on.
    SimplicialComplex target;
    /// Vertex id of base vertex v at level l is v + l * stride.
    int stride = 0;
};

/// base x [0, shells] with the staircase triangulation; the schedule collapses it onto base x {0}.
PrismFiltration prism_filtration(const SimplicialComplex& base, int shells);
/// The n-simplex with `shells` copies of its boundary times an interval stacked outside; the schedule
/// collapses every shell and then the simplex itself down to vertex 0.
PrismFiltration rn_shell_filtration(int n, int shells);

/// Vertex id helper matching prism_filtration's numbering.
inline Vertex level_vertex(Vertex v, int level, int stride) { return v + level * stride; }

std::string format_cell(const Simplex& s);
std::string format_cell(const Cube& c);

} // namespace collapsekit

#endif
