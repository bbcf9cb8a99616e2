#include "collapsekit/complex.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace collapsekit {

Simplex make_simplex(std::vector<Vertex> vertices) {
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    return vertices;
}

int cell_dim(const Simplex& s) { return static_cast<int>(s.size()) - 1; }

int cell_dim(const Cube& c) {
    return static_cast<int>(std::count_if(c.begin(), c.end(), [](const auto& f) { return f.second != f.first; }));
}

std::vector<Simplex> facets(const Simplex& s) {
    std::vector<Simplex> out;
    if (s.size() <= 1) return out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        Simplex f;
        f.reserve(s.size() - 1);
        for (std::size_t j = 0; j < s.size(); ++j)
            if (j != i) f.push_back(s[j]);
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Cube> facets(const Cube& c) {
    std::vector<Cube> out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].first == c[i].second) continue;
        Cube lo = c, hi = c;
        lo[i] = {c[i].first, c[i].first};
        hi[i] = {c[i].second, c[i].second};
        out.push_back(std::move(lo));
        out.push_back(std::move(hi));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_face(const Simplex& face, const Simplex& of) {
    return std::includes(of.begin(), of.end(), face.begin(), face.end());
}

bool is_face(const Cube& face, const Cube& of) {
    if (face.size() != of.size()) return false;
    for (std::size_t i = 0; i < face.size(); ++i)
        if (face[i].first < of[i].first || face[i].second > of[i].second) return false;
    return true;
}

std::string format_cell(const Simplex& s) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << '}';
    return os.str();
}

std::string format_cell(const Cube& c) {
    std::ostringstream os;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) os << 'x';
        if (c[i].first == c[i].second)
            os << '{' << c[i].first << '}';
        else
            os << '[' << c[i].first << ',' << c[i].second << ']';
    }
    return os.str();
}

namespace {

template <class Cell>
void add_closure(std::set<Cell>& out, const Cell& c) {
    if (!out.insert(c).second) return;
    for (const auto& f : facets(c)) add_closure(out, f);
}

template <class Cell>
int max_dim(const std::set<Cell>& cells) {
    int d = -1;
    for (const auto& c : cells) d = std::max(d, cell_dim(c));
    return d;
}

template <class Cell>
long euler(const std::set<Cell>& cells) {
    long chi = 0;
    for (const auto& c : cells) chi += (cell_dim(c) % 2 == 0) ? 1 : -1;
    return chi;
}

template <class Cell>
std::map<Cell, std::vector<Cell>> coface_map(const std::set<Cell>& cells) {
    std::map<Cell, std::vector<Cell>> cof;
    for (const auto& c : cells) cof[c];
    for (const auto& c : cells)
        for (const auto& f : facets(c)) {
            auto it = cof.find(f);
            if (it != cof.end()) it->second.push_back(c);
        }
    return cof;
}

template <class Cell>
std::vector<BasicCollapseStep<Cell>> free_pairs(const std::set<Cell>& cells) {
    std::vector<BasicCollapseStep<Cell>> out;
    for (const auto& [tau, cofaces] : coface_map(cells))
        if (cofaces.size() == 1) out.push_back({tau, cofaces.front()});
    return out;
}

template <class Cell>
void check_collapse(const std::set<Cell>& cells, const BasicCollapseStep<Cell>& step) {
    if (!cells.count(step.sigma) || !cells.count(step.tau))
        throw NotFree("collapse step " + format_cell(step.tau) + " < " + format_cell(step.sigma) +
                      " names a cell that is not present");
    if (cell_dim(step.sigma) != cell_dim(step.tau) + 1 || !is_face(step.tau, step.sigma))
        throw NotFree(format_cell(step.tau) + " is not a facet of " + format_cell(step.sigma));
    std::size_t count = 0;
    for (const auto& c : cells)
        if (c != step.tau && is_face(step.tau, c)) ++count;
    if (count != 1)
        throw NotFree(format_cell(step.tau) + " has " + std::to_string(count) + " proper cofaces");
}

template <class Cell>
void check_expansion(const std::set<Cell>& cells, const Cell& sigma, const Cell& tau) {
    if (cells.count(sigma) || cells.count(tau))
        throw InvalidExpansion("expansion cells must be new: " + format_cell(sigma) + ", " + format_cell(tau));
    if (cell_dim(sigma) != cell_dim(tau) + 1 || !is_face(tau, sigma))
        throw InvalidExpansion(format_cell(tau) + " is not a facet of " + format_cell(sigma));
    for (const auto& f : facets(sigma))
        if (f != tau && !cells.count(f))
            throw InvalidExpansion("face " + format_cell(f) + " of " + format_cell(sigma) + " is missing");
    for (const auto& f : facets(tau))
        if (!cells.count(f))
            throw InvalidExpansion("face " + format_cell(f) + " of " + format_cell(tau) + " is missing");
}

template <class Cell>
BasicSearchOutcome<Cell> greedy_search(std::set<Cell> cells, const std::set<Cell>& target, bool any_vertex,
                                       const SearchOptions& opt) {
    BasicSearchOutcome<Cell> out;
    out.schedule.filtration.push_back(cells.size());
    std::mt19937_64 rng(opt.seed);
    auto done = [&] { return any_vertex ? cells.size() == 1 : cells == target; };
    while (!done()) {
        if (out.schedule.steps.size() >= opt.step_limit) {
            out.status = SearchStatus::Inconclusive;
            out.reason = "greedy step budget exhausted";
            return out;
        }
        auto pairs = free_pairs(cells);
        std::erase_if(pairs, [&](const auto& p) { return target.count(p.tau) || target.count(p.sigma); });
        if (pairs.empty()) {
            if (out.schedule.steps.empty()) {
                out.status = SearchStatus::ProvenNotFound;
                out.reason = "no free face outside the target";
            } else {
                out.status = SearchStatus::Inconclusive;
                out.reason = "greedy search reached a complex without usable free faces";
            }
            return out;
        }
        std::size_t pick = 0;
        if (opt.seed != 0) pick = std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng);
        const auto step = pairs[pick];
        cells.erase(step.sigma);
        cells.erase(step.tau);
        out.schedule.steps.push_back(step);
        out.schedule.filtration.push_back(cells.size());
    }
    out.status = SearchStatus::Found;
    return out;
}

template <class Cell>
BasicSearchOutcome<Cell> exhaustive_search(const std::set<Cell>& cells, const std::set<Cell>& target, bool any_vertex,
                                           const SearchOptions& opt) {
    BasicSearchOutcome<Cell> out;
    const std::size_t budget = std::min<std::size_t>(opt.cell_budget, 64);
    if (cells.size() > budget) {
        out.status = SearchStatus::Inconclusive;
        out.reason = "complex has " + std::to_string(cells.size()) + " cells, above the exhaustive budget of " +
                     std::to_string(budget);
        return out;
    }
    const std::vector<Cell> index(cells.begin(), cells.end());
    const std::size_t n = index.size();
    std::map<Cell, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[index[i]] = i;
    std::vector<std::uint64_t> coface_mask(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& f : facets(index[i])) coface_mask[pos.at(f)] |= std::uint64_t{1} << i;
    std::uint64_t target_mask = 0;
    for (const auto& c : target) target_mask |= std::uint64_t{1} << pos.at(c);
    const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);

    std::unordered_set<std::uint64_t> dead;
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::size_t explored = 0;
    bool exhausted = false;

    auto goal = [&](std::uint64_t s) { return any_vertex ? std::popcount(s) == 1 : s == target_mask; };
    // Returns true once a schedule to the goal is on `path`.
    auto dfs = [&](auto&& self, std::uint64_t state) -> bool {
        if (goal(state)) return true;
        if (dead.count(state)) return false;
        if (++explored > opt.step_limit) {
            exhausted = true;
            return false;
        }
        for (std::size_t t = 0; t < n; ++t) {
            const std::uint64_t bit = std::uint64_t{1} << t;
            if (!(state & bit) || (target_mask & bit)) continue;
            const std::uint64_t live = coface_mask[t] & state;
            if (std::popcount(live) != 1) continue;
            const std::size_t s = static_cast<std::size_t>(std::countr_zero(live));
            if (target_mask & (std::uint64_t{1} << s)) continue;
            path.emplace_back(t, s);
            if (self(self, state & ~bit & ~(std::uint64_t{1} << s))) return true;
            path.pop_back();
            if (exhausted) return false;
        }
        dead.insert(state);
        return false;
    };

    out.schedule.filtration.push_back(n);
    if (dfs(dfs, full)) {
        out.status = SearchStatus::Found;
        std::size_t count = n;
        for (const auto& [t, s] : path) {
            out.schedule.steps.push_back({index[t], index[s]});
            count -= 2;
            out.schedule.filtration.push_back(count);
        }
    } else if (exhausted) {
        out.status = SearchStatus::Inconclusive;
        out.reason = "exhaustive state budget exhausted";
    } else {
        out.status = SearchStatus::ProvenNotFound;
        out.reason = "every free-face sequence was explored";
    }
    return out;
}

template <class Cell>
BasicSearchOutcome<Cell> search(const std::set<Cell>& cells, const std::set<Cell>& target, const SearchOptions& opt) {
    const bool any_vertex = target.empty();
    for (const auto& c : target)
        if (!cells.count(c)) {
            BasicSearchOutcome<Cell> out;
            out.status = SearchStatus::ProvenNotFound;
            out.reason = "target is not a subcomplex";
            return out;
        }
    // A first step is impossible: proven regardless of strategy.
    auto first = free_pairs(cells);
    std::erase_if(first, [&](const auto& p) { return target.count(p.tau) || target.count(p.sigma); });
    const bool at_goal = any_vertex ? cells.size() == 1 : cells == target;
    if (first.empty() && !at_goal) {
        BasicSearchOutcome<Cell> out;
        out.status = SearchStatus::ProvenNotFound;
        out.reason = "no free face outside the target";
        out.schedule.filtration.push_back(cells.size());
        return out;
    }
    if (opt.strategy == SearchStrategy::Greedy) return greedy_search(cells, target, any_vertex, opt);
    return exhaustive_search(cells, target, any_vertex, opt);
}

template <class Cell>
std::set<Cell> replay_cells(std::set<Cell> cells, const BasicCollapseSchedule<Cell>& schedule) {
    for (const auto& step : schedule.steps) {
        check_collapse(cells, step);
        cells.erase(step.sigma);
        cells.erase(step.tau);
    }
    return cells;
}

std::set<Vertex> vertices_of(const std::set<Simplex>& cells) {
    std::set<Vertex> v;
    for (const auto& c : cells)
        if (c.size() == 1) v.insert(c.front());
    return v;
}

} // namespace

SimplicialComplex SimplicialComplex::closure_of(const std::vector<Simplex>& generators) {
    SimplicialComplex k;
    for (const auto& g : generators) {
        const auto s = make_simplex(g);
        if (s.empty()) continue;
        add_closure(k.simplices, s);
    }
    k.vertices = vertices_of(k.simplices);
    return k;
}

SimplicialComplex SimplicialComplex::full_simplex(int n) {
    Simplex s(static_cast<std::size_t>(n + 1));
    std::iota(s.begin(), s.end(), 0);
    return closure_of({s});
}

SimplicialComplex SimplicialComplex::simplex_boundary(int n) {
    Simplex s(static_cast<std::size_t>(n + 1));
    std::iota(s.begin(), s.end(), 0);
    return closure_of(facets(s));
}

SimplicialComplex SimplicialComplex::path(int edges) {
    std::vector<Simplex> gens;
    for (int i = 0; i < edges; ++i) gens.push_back({i, i + 1});
    if (edges == 0) gens.push_back({0});
    return closure_of(gens);
}

int SimplicialComplex::dimension() const { return max_dim(simplices); }
long SimplicialComplex::euler_characteristic() const { return euler(simplices); }

CubicalComplex CubicalComplex::closure_of(const std::vector<Cube>& generators) {
    CubicalComplex k;
    for (const auto& g : generators) add_closure(k.cells, g);
    return k;
}

int CubicalComplex::dimension() const { return max_dim(cells); }
long CubicalComplex::euler_characteristic() const { return euler(cells); }

ValidationReport validate(const SimplicialComplex& k) {
    ValidationReport r;
    for (const auto& s : k.simplices) {
        if (s.empty()) {
            r.issues.push_back({"empty-cell", "{}", "simplices must be nonempty"});
            continue;
        }
        if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
            r.issues.push_back({"unsorted", format_cell(s), "vertex list must be strictly increasing"});
        for (Vertex v : s)
            if (!k.vertices.count(v))
                r.issues.push_back({"unknown-vertex", format_cell(s), std::to_string(v)});
        for (const auto& f : facets(s))
            if (!k.simplices.count(f)) r.issues.push_back({"missing-face", format_cell(s), format_cell(f)});
    }
    for (Vertex v : k.vertices)
        if (!k.simplices.count(Simplex{v}))
            r.issues.push_back({"missing-singleton", format_cell(Simplex{v}), format_cell(Simplex{v})});
    return r;
}

ValidationReport validate(const CubicalComplex& k) {
    ValidationReport r;
    std::size_t axes = k.cells.empty() ? 0 : k.cells.begin()->size();
    for (const auto& c : k.cells) {
        if (c.size() != axes) r.issues.push_back({"bad-factor", format_cell(c), "axis count differs"});
        for (const auto& [lo, hi] : c)
            if (hi != lo && hi != lo + 1)
                r.issues.push_back({"bad-factor", format_cell(c), "factor must be a point or a unit interval"});
        for (const auto& f : facets(c))
            if (!k.cells.count(f)) r.issues.push_back({"missing-face", format_cell(c), format_cell(f)});
    }
    return r;
}

std::vector<CollapseStep> free_faces(const SimplicialComplex& k) { return free_pairs(k.simplices); }
std::vector<CubicalCollapseStep> free_faces(const CubicalComplex& k) { return free_pairs(k.cells); }

SimplicialComplex elementary_collapse(const SimplicialComplex& k, const CollapseStep& step) {
    check_collapse(k.simplices, step);
    SimplicialComplex out = k;
    out.simplices.erase(step.sigma);
    out.simplices.erase(step.tau);
    if (step.tau.size() == 1) out.vertices.erase(step.tau.front());
    return out;
}

CubicalComplex elementary_collapse(const CubicalComplex& k, const CubicalCollapseStep& step) {
    check_collapse(k.cells, step);
    CubicalComplex out = k;
    out.cells.erase(step.sigma);
    out.cells.erase(step.tau);
    return out;
}

SimplicialComplex elementary_expansion(const SimplicialComplex& k, const Simplex& new_sigma, const Simplex& new_tau) {
    const auto sigma = make_simplex(new_sigma);
    const auto tau = make_simplex(new_tau);
    if (tau.empty()) throw InvalidExpansion("free face must be nonempty");
    check_expansion(k.simplices, sigma, tau);
    SimplicialComplex out = k;
    out.simplices.insert(sigma);
    out.simplices.insert(tau);
    if (tau.size() == 1) out.vertices.insert(tau.front());
    return out;
}

CubicalComplex elementary_expansion(const CubicalComplex& k, const Cube& new_sigma, const Cube& new_tau) {
    check_expansion(k.cells, new_sigma, new_tau);
    CubicalComplex out = k;
    out.cells.insert(new_sigma);
    out.cells.insert(new_tau);
    return out;
}

std::string to_string(SearchStatus s) {
    switch (s) {
    case SearchStatus::Found: return "found";
    case SearchStatus::ProvenNotFound: return "not-found-proven";
    case SearchStatus::Inconclusive: return "not-found-inconclusive";
    }
    return "unknown";
}

SearchOutcome collapse_search(const SimplicialComplex& k, const SimplicialComplex& target,
                              const SearchOptions& options) {
    return search(k.simplices, target.simplices, options);
}

SearchOutcome collapse_search(const SimplicialComplex& k, Vertex target, const SearchOptions& options) {
    return search(k.simplices, std::set<Simplex>{Simplex{target}}, options);
}

CubicalSearchOutcome collapse_search(const CubicalComplex& k, const CubicalComplex& target,
                                     const SearchOptions& options) {
    return search(k.cells, target.cells, options);
}

SimplicialComplex replay(const SimplicialComplex& k, const CollapseSchedule& schedule) {
    SimplicialComplex out;
    out.simplices = replay_cells(k.simplices, schedule);
    out.vertices = vertices_of(out.simplices);
    return out;
}

CubicalComplex replay(const CubicalComplex& k, const CubicalCollapseSchedule& schedule) {
    CubicalComplex out;
    out.cells = replay_cells(k.cells, schedule);
    return out;
}

namespace {

// Maximal staircase simplices of rho x [lower, lower + 1].
std::vector<Simplex> staircase(const Simplex& rho, int lower, int stride) {
    std::vector<Simplex> out;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        Simplex s;
        for (std::size_t a = 0; a <= i; ++a) s.push_back(level_vertex(rho[a], lower, stride));
        for (std::size_t a = i; a < rho.size(); ++a) s.push_back(level_vertex(rho[a], lower + 1, stride));
        out.push_back(make_simplex(std::move(s)));
    }
    return out;
}

// Collapses rho x [lower, lower+1] onto rho x {lower} union (boundary of rho) x [lower, lower+1].
void append_prism_steps(const Simplex& rho, int lower, int stride, CollapseSchedule& schedule) {
    const auto tops = staircase(rho, lower, stride);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        Simplex tau = tops[i];
        std::erase(tau, level_vertex(rho[i], lower, stride));
        schedule.steps.push_back({tau, tops[i]});
    }
}

std::vector<Simplex> by_decreasing_dim(const std::set<Simplex>& cells) {
    std::vector<Simplex> v(cells.begin(), cells.end());
    std::stable_sort(v.begin(), v.end(), [](const Simplex& a, const Simplex& b) { return a.size() > b.size(); });
    return v;
}

void fill_filtration(std::size_t start, CollapseSchedule& schedule) {
    schedule.filtration.assign(1, start);
    for (std::size_t i = 0; i < schedule.steps.size(); ++i) schedule.filtration.push_back(start - 2 * (i + 1));
}

} // namespace

PrismFiltration prism_filtration(const SimplicialComplex& base, int shells) {
    if (shells < 0) throw std::invalid_argument("shells must be nonnegative");
    PrismFiltration out;
    out.stride = base.vertices.empty() ? 1 : *base.vertices.rbegin() + 1;
    std::vector<Simplex> gens(base.simplices.begin(), base.simplices.end());
    for (int k = 0; k < shells; ++k)
        for (const auto& rho : base.simplices)
            for (auto& s : staircase(rho, k, out.stride)) gens.push_back(std::move(s));
    out.complex = SimplicialComplex::closure_of(gens);
    out.complex.vertices.insert(base.vertices.begin(), base.vertices.end());
    const auto order = by_decreasing_dim(base.simplices);
    for (int k = shells - 1; k >= 0; --k) {
        for (const auto& rho : order) append_prism_steps(rho, k, out.stride, out.schedule);
        out.schedule.stage_ends.push_back(out.schedule.steps.size());
    }
    fill_filtration(out.complex.size(), out.schedule);
    out.target = base;
    return out;
}

PrismFiltration rn_shell_filtration(int n, int shells) {
    if (n < 1) throw std::invalid_argument("dimension must be at least 1");
    auto out = prism_filtration(SimplicialComplex::simplex_boundary(n), shells);
    const auto core = SimplicialComplex::full_simplex(n);
    out.complex.simplices.insert(core.simplices.begin(), core.simplices.end());
    const auto core_collapse = collapse_search(core, 0, {SearchStrategy::Exhaustive});
    for (const auto& step : core_collapse.schedule.steps) out.schedule.steps.push_back(step);
    out.schedule.stage_ends.push_back(out.schedule.steps.size());
    fill_filtration(out.complex.size(), out.schedule);
    out.target = SimplicialComplex::closure_of({{0}});
    return out;
}

} // namespace collapsekit
