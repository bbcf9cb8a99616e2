#include "collapsekit/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "collapsekit/parallel.hpp"

namespace collapsekit {

namespace {

const PiecewiseLinearMap* as_pl(const MapPtr& m) { return dynamic_cast<const PiecewiseLinearMap*>(m.get()); }

Interval box_interval(const Space& s) {
    const auto& box = dynamic_cast<const BoxSpace&>(s);
    return Interval::closed(to_rational(box.lo()[0]), to_rational(box.hi()[0]));
}

json interval_json(const Interval& i) {
    return {{"lo", to_double(i.lo)},
            {"hi", to_double(i.hi)},
            {"lo_closed", i.lo_closed},
            {"hi_closed", i.hi_closed},
            {"exact", (i.lo_closed ? "[" : "(") + to_string(i.lo) + ", " + to_string(i.hi) + (i.hi_closed ? "]" : ")")}};
}

} // namespace

InverseSystem::InverseSystem(std::string name, std::vector<SpacePtr> spaces, std::vector<MapPtr> bonds, json spec)
    : name_(std::move(name)), spaces_(std::move(spaces)), bonds_(std::move(bonds)), spec_(std::move(spec)) {
    if (spaces_.empty()) throw std::invalid_argument("inverse system needs C_0");
    if (bonds_.size() + 1 != spaces_.size()) throw std::invalid_argument("need one bond per space after C_0");
    for (std::size_t i = 0; i < bonds_.size(); ++i)
        if (bonds_[i]->domain() != spaces_[i + 1] || bonds_[i]->image() != spaces_[i])
            throw std::invalid_argument("bond " + std::to_string(i + 1) + " does not map C_" + std::to_string(i + 1) +
                                        " onto C_" + std::to_string(i));
}

const SpacePtr& InverseSystem::space(int i) const {
    if (i < 0 || i > depth()) throw IndexOutOfRange("no space C_" + std::to_string(i));
    return spaces_[static_cast<std::size_t>(i)];
}

const MapPtr& InverseSystem::bond(int i) const {
    if (i < 1 || i > depth()) throw IndexOutOfRange("no bond r_" + std::to_string(i));
    return bonds_[static_cast<std::size_t>(i - 1)];
}

int InverseSystem::level_of(const GeometricPoint& x, double tol) const {
    for (int k = 0; k <= depth(); ++k)
        if (spaces_[static_cast<std::size_t>(k)]->contains(x, tol)) return k;
    return -1;
}

bool InverseSystem::piecewise_linear() const {
    return std::all_of(bonds_.begin(), bonds_.end(), [](const MapPtr& m) { return as_pl(m) != nullptr; });
}

PiecewiseLinear composite_function(const InverseSystem& sys, int i, int j) {
    if (i < 0 || j > sys.depth() || i > j)
        throw IndexOutOfRange("r_" + std::to_string(i) + std::to_string(j) + " needs 0 <= i <= j <= depth");
    if (!sys.piecewise_linear()) throw std::invalid_argument("system is not piecewise-linear");
    const auto whole = box_interval(*sys.space(j));
    PiecewiseLinear f = PiecewiseLinear::identity(whole.lo, whole.hi);
    // r_ij = r_{i+1} o ... o r_j, built from the inside out.
    for (int k = j; k > i; --k) f = as_pl(sys.bond(k))->function().after(f);
    return f;
}

MapPtr bond_composite(const InverseSystem& sys, int i, int j) {
    if (i < 0 || j > sys.depth() || i > j)
        throw IndexOutOfRange("r_" + std::to_string(i) + "," + std::to_string(j) + " needs 0 <= i <= j <= depth");
    if (i == j) return std::make_shared<IdentityMap>(sys.space(j));
    if (j == i + 1) return sys.bond(j);
    if (sys.piecewise_linear())
        return std::make_shared<PiecewiseLinearMap>(sys.space(j), sys.space(i), composite_function(sys, i, j), false);
    std::vector<MapPtr> maps;
    for (int k = i + 1; k <= j; ++k) maps.push_back(sys.bond(k));
    return compose(maps);
}

bool OpenSetRep::contains(const Space& host, const GeometricPoint& p) const {
    if (kind == Kind::Intervals) return p.coords.size() == 1 && intervals.contains(to_rational(p.coords[0]));
    if (!host.contains(p, 1e-12)) return false;
    return std::any_of(balls.begin(), balls.end(),
                       [&](const Ball& b) { return host.distance(b.center, p) < b.radius; });
}

OpenSetRep OpenSetRep::unite(const OpenSetRep& other) const {
    if (is_empty()) return other;
    if (other.is_empty()) return *this;
    if (kind != other.kind) throw std::invalid_argument("cannot unite interval and ball sets");
    OpenSetRep out = *this;
    if (kind == Kind::Intervals)
        out.intervals = intervals.unite(other.intervals);
    else
        out.balls.insert(out.balls.end(), other.balls.begin(), other.balls.end());
    return out;
}

json OpenSetRep::to_json() const {
    if (kind == Kind::Intervals) {
        json parts = json::array();
        for (const auto& p : intervals.parts()) parts.push_back(interval_json(p));
        return {{"kind", "intervals"}, {"parts", parts}};
    }
    json bs = json::array();
    for (const auto& b : balls) bs.push_back({{"center", collapsekit::to_json(b.center)}, {"radius", b.radius}});
    return {{"kind", "balls"}, {"balls", bs}};
}

json StationaryCertificate::to_json() const {
    json j{{"passed", passed}, {"j", this->j}, {"depth", depth}, {"detail", detail}};
    if (violating_k) j["violating_k"] = *violating_k;
    if (witness) j["witness"] = collapsekit::to_json(*witness);
    return j;
}

StationaryCertificate stationary_check(const InverseSystem& sys, const OpenSetRep& a, int j, int depth) {
    if (j < 0 || depth > sys.depth() || j > depth)
        throw IndexOutOfRange("stationarity needs 0 <= j <= depth <= N");
    StationaryCertificate cert;
    cert.j = j;
    cert.depth = depth;
    if (a.is_empty()) {
        cert.detail = "empty set";
        return cert;
    }
    for (int k = j + 1; k <= depth; ++k) {
        const auto& bond = sys.bond(k);
        if (a.kind == OpenSetRep::Kind::Intervals) {
            const auto* pl = as_pl(bond);
            if (!pl) throw std::invalid_argument("interval sets need piecewise-linear bonds");
            const auto hit = pl->moved_image().intersect(a.intervals);
            if (hit.empty()) continue;
            cert.passed = false;
            cert.violating_k = k;
            const IntervalSet moved = IntervalSet({box_interval(*sys.space(k))}).minus(IntervalSet({pl->image_interval()}));
            if (const auto y = pl->function().preimage(hit).intersect(moved).sample())
                cert.witness = euclidean_point({to_double(*y)});
            cert.detail = "r_" + std::to_string(k) + " sends points of C_" + std::to_string(k) + " - C_" +
                          std::to_string(k - 1) + " into " + hit.describe();
            return cert;
        }
        for (const auto& ball : a.balls) {
            const double d = bond->moved_image_distance(ball.center);
            if (d >= ball.radius) continue;
            cert.passed = false;
            cert.violating_k = k;
            cert.witness = bond->lift(ball.center, ball.radius);
            cert.detail = "image of C_" + std::to_string(k) + " - C_" + std::to_string(k - 1) + " under r_" +
                          std::to_string(k) + " comes within " + std::to_string(d) + " of a ball center";
            return cert;
        }
    }
    cert.detail = "no deeper bond reaches the set";
    return cert;
}

json InsulationCertificate::to_json() const {
    json j{{"passed", passed},
           {"x", collapsekit::to_json(x)},
           {"level", level},
           {"depth", depth},
           {"inconclusive_beyond_depth", inconclusive_beyond_depth}};
    if (passed) {
        j["j"] = this->j;
        j["neighborhood"] = neighborhood->to_json();
    }
    if (last_failure) j["last_failure"] = last_failure->to_json();
    return j;
}

InsulationCertificate insulated_check(const InverseSystem& sys, const GeometricPoint& x, int depth,
                                      const InsulationOptions& options) {
    if (depth < 0 || depth > sys.depth()) throw IndexOutOfRange("depth beyond the loaded prefix");
    InsulationCertificate cert;
    cert.x = x;
    cert.depth = depth;
    cert.level = sys.level_of(x);
    if (cert.level < 0 || cert.level > depth) throw IndexOutOfRange("point lies in no C_k with k <= depth");
    const bool exact = sys.piecewise_linear();
    if (!exact) {
        // A ball around x is j-stationary iff its radius is at most every d(x, r_k(C_k - C_{k-1})), k > j.
        std::vector<double> reach(static_cast<std::size_t>(depth) + 2, std::numeric_limits<double>::infinity());
        for (int k = depth; k > cert.level; --k)
            reach[static_cast<std::size_t>(k)] =
                std::min(reach[static_cast<std::size_t>(k) + 1], sys.bond(k)->moved_image_distance(x));
        for (int j = cert.level; j < depth; ++j) {
            const double room = reach[static_cast<std::size_t>(j) + 1];
            int m = 1;
            while (m < options.max_halvings && std::ldexp(1.0, -m) > room) ++m;
            const double delta = std::ldexp(1.0, -m);
            auto nbhd = OpenSetRep::ball(x, delta);
            auto st = stationary_check(sys, nbhd, j, depth);
            if (st.passed) {
                cert.passed = true;
                cert.inconclusive_beyond_depth = false;
                cert.j = j;
                cert.neighborhood = std::move(nbhd);
                cert.last_failure.reset();
                return cert;
            }
            if (j + 1 == depth) cert.last_failure = std::move(st);
        }
        return cert;
    }
    for (int j = cert.level; j < depth; ++j) {
        for (int m = 1; m <= options.max_halvings; ++m) {
            const double delta = std::ldexp(1.0, -m);
            const Rational c = to_rational(x.coords.at(0)), d = to_rational(delta);
            auto nbhd = OpenSetRep::of_intervals(
                IntervalSet({Interval::open(c - d, c + d)}).intersect(IntervalSet({box_interval(*sys.space(j))})));
            auto st = stationary_check(sys, nbhd, j, depth);
            if (st.passed) {
                cert.passed = true;
                cert.inconclusive_beyond_depth = false;
                cert.j = j;
                cert.neighborhood = std::move(nbhd);
                cert.last_failure.reset();
                return cert;
            }
            cert.last_failure = std::move(st);
        }
    }
    return cert;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Certified: return "CERTIFIED-to-depth";
    case Verdict::CounterexampleCandidate: return "COUNTEREXAMPLE-candidate";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

json FullInsulationReport::to_json() const {
    json fails = json::array();
    for (const auto& f : failures) fails.push_back(f.to_json());
    json cov = json::array();
    for (const auto& c : cover) cov.push_back({{"level", c.level}, {"grid_points", c.grid_points}, {"covered", c.covered}});
    json j{{"verdict", to_string(verdict)},
           {"depth", depth},
           {"sample_level", sample_level},
           {"checked", checked},
           {"passed", passed},
           {"failures", fails},
           {"cover", cov},
           {"cover_complete", cover_complete},
           {"note", note}};
    if (witness) j["witness"] = collapsekit::to_json(*witness);
    return j;
}

FullInsulationReport fully_insulated_check(const InverseSystem& sys, int depth, const FullInsulationOptions& options) {
    FullInsulationReport rep;
    rep.depth = depth;
    if (depth > sys.depth() || depth - options.margin < 0) {
        rep.note = "depth too shallow for the requested margin";
        return rep;
    }
    rep.sample_level = depth - options.margin;
    const auto& host = sys.space(rep.sample_level);

    std::vector<GeometricPoint> samples;
    std::set<std::pair<std::vector<int>, std::vector<double>>> seen;
    auto add = [&](const GeometricPoint& p) {
        if (samples.size() >= options.sample_budget) return;
        if (seen.emplace(p.carrier, p.coords).second) samples.push_back(p);
    };
    for (const auto& p : host->landmarks()) add(p);
    std::mt19937_64 rng(options.seed);
    for (const auto& p : host->random_points(options.sample_budget, rng)) add(p);

    std::vector<InsulationCertificate> certs(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) { certs[i] = insulated_check(sys, samples[i], depth, options.insulation); });

    rep.checked = certs.size();
    for (auto& c : certs) {
        if (c.passed)
            ++rep.passed;
        else
            rep.failures.push_back(c);
    }
    if (rep.checked == 0) {
        rep.note = "no sample points";
        return rep;
    }
    if (!rep.failures.empty()) {
        rep.verdict = Verdict::CounterexampleCandidate;
        rep.witness = rep.failures.front().x;
        rep.note = "some sampled point has no stationary neighborhood up to depth " + std::to_string(depth);
    } else {
        rep.verdict = Verdict::Certified;
        rep.note = "every sampled point has a neighborhood stationary to depth " + std::to_string(depth);
    }

    // Cover attempt: do the stationary neighborhoods found cover each C_i (sampled on a grid)?
    rep.cover_complete = rep.failures.empty();
    for (int i = 0; i <= rep.sample_level; ++i) {
        CoverLevel lvl;
        lvl.level = i;
        const auto grid = sys.space(i)->grid(options.cover_spacing);
        lvl.grid_points = grid.size();
        for (const auto& g : grid) {
            const bool hit = std::any_of(certs.begin(), certs.end(), [&](const InsulationCertificate& c) {
                return c.passed && c.neighborhood->contains(*sys.space(c.j), g);
            });
            if (hit) ++lvl.covered;
        }
        if (lvl.covered != lvl.grid_points) rep.cover_complete = false;
        rep.cover.push_back(lvl);
    }
    return rep;
}

} // namespace collapsekit
