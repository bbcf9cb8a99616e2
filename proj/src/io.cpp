#include "collapsekit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "collapsekit/gallery.hpp"

namespace collapsekit {

namespace {

template <class F>
auto parsing(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed ") + what + ": " + e.what());
    }
}

std::shared_ptr<const Space> space_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "box") return std::make_shared<BoxSpace>(j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>());
    if (kind == "complex") {
        auto k = simplicial_from_json(j);
        if (j.value("metric", std::string("euclidean")) == "tree-path") return std::make_shared<ComplexSpace>(std::move(k));
        std::map<Vertex, std::vector<double>> pos;
        for (const auto& [key, x] : j.at("positions").items()) pos[std::stoi(key)] = x.get<std::vector<double>>();
        return std::make_shared<ComplexSpace>(std::move(k), std::move(pos));
    }
    throw ParseError("unsupported space kind '" + kind + "'");
}

MapPtr bond_from_json(const json& j, const SpacePtr& domain, const SpacePtr& image) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "identity") return std::make_shared<IdentityMap>(domain);
    if (kind == "pl1d") {
        std::vector<PiecewiseLinear::Breakpoint> bps;
        for (const auto& bp : j.at("breakpoints")) bps.emplace_back(to_rational(bp.at(0).get<double>()), to_rational(bp.at(1).get<double>()));
        return std::make_shared<PiecewiseLinearMap>(domain, image, PiecewiseLinear(std::move(bps)), j.value("tracks", false));
    }
    if (kind == "schedule") {
        auto dc = std::dynamic_pointer_cast<const ComplexSpace>(domain);
        auto ic = std::dynamic_pointer_cast<const ComplexSpace>(image);
        if (!dc || !ic) throw ParseError("schedule bonds need complex spaces");
        return std::make_shared<ScheduleMap>(dc, ic, schedule_from_json(j).steps);
    }
    throw ParseError("unsupported bond kind '" + kind + "'");
}

} // namespace

json to_json(const SimplicialComplex& k) { return {{"vertices", k.vertices}, {"simplices", k.simplices}}; }

json to_json(const CubicalComplex& k) { return {{"cells", k.cells}}; }

bool is_cubical_json(const json& j) { return j.is_object() && j.contains("cells"); }

SimplicialComplex simplicial_from_json(const json& j) {
    return parsing("complex", [&] {
        std::vector<Simplex> gens;
        for (const auto& s : j.at("simplices")) {
            auto verts = s.get<std::vector<Vertex>>();
            if (verts.empty()) throw ParseError("malformed complex: empty simplex");
            gens.push_back(make_simplex(std::move(verts)));
        }
        if (j.contains("vertices"))
            for (Vertex v : j.at("vertices").get<std::vector<Vertex>>()) gens.push_back({v});
        return SimplicialComplex::closure_of(gens);
    });
}

CubicalComplex cubical_from_json(const json& j) {
    return parsing("cubical complex", [&] {
        auto gens = j.at("cells").get<std::vector<Cube>>();
        for (const auto& c : gens)
            for (const auto& [lo, hi] : c)
                if (hi != lo && hi != lo + 1) throw ParseError("malformed cubical complex: axis extent must be 0 or 1");
        return CubicalComplex::closure_of(gens);
    });
}

namespace {

template <class Cell>
json schedule_json(const BasicCollapseSchedule<Cell>& s) {
    json steps = json::array();
    for (const auto& st : s.steps) steps.push_back({st.tau, st.sigma});
    json j{{"steps", steps}, {"filtration", s.filtration}};
    if (!s.stage_ends.empty()) j["stage_ends"] = s.stage_ends;
    return j;
}

template <class Cell>
BasicCollapseSchedule<Cell> schedule_parse(const json& j) {
    return parsing("schedule", [&] {
        BasicCollapseSchedule<Cell> s;
        for (const auto& st : j.at("steps")) s.steps.push_back({st.at(0).get<Cell>(), st.at(1).get<Cell>()});
        if (j.contains("filtration")) s.filtration = j.at("filtration").get<std::vector<std::size_t>>();
        if (j.contains("stage_ends")) s.stage_ends = j.at("stage_ends").get<std::vector<std::size_t>>();
        return s;
    });
}

} // namespace

json to_json(const CollapseSchedule& s) { return schedule_json(s); }
json to_json(const CubicalCollapseSchedule& s) { return schedule_json(s); }
CollapseSchedule schedule_from_json(const json& j) { return schedule_parse<Simplex>(j); }
CubicalCollapseSchedule cubical_schedule_from_json(const json& j) { return schedule_parse<Cube>(j); }

json to_json(const InverseSystem& sys) {
    json j = sys.spec().is_object() ? sys.spec() : json::object();
    j["name"] = sys.name();
    j["depth"] = sys.depth();
    json spaces = json::array(), bonds = json::array();
    for (int i = 0; i <= sys.depth(); ++i) spaces.push_back(sys.space(i)->to_json());
    for (int i = 1; i <= sys.depth(); ++i) bonds.push_back(sys.bond(i)->to_json());
    j["spaces"] = std::move(spaces);
    j["bonds"] = std::move(bonds);
    return j;
}

InverseSystem system_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("malformed system: expected an object");
    if (j.contains("gallery")) return build(j);
    return parsing("system", [&] {
        std::vector<SpacePtr> spaces;
        for (const auto& s : j.at("spaces")) spaces.push_back(space_from_json(s));
        const auto& bj = j.at("bonds");
        if (spaces.empty() || bj.size() + 1 != spaces.size())
            throw ParseError("malformed system: need one bond per space after the first");
        std::vector<MapPtr> bonds;
        for (std::size_t i = 1; i < spaces.size(); ++i) bonds.push_back(bond_from_json(bj[i - 1], spaces[i], spaces[i - 1]));
        return InverseSystem(j.value("name", std::string("system")), std::move(spaces), std::move(bonds));
    });
}

json rounded(const json& j, int digits) {
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (!std::isfinite(x)) return nullptr;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", digits, x);
        const double r = std::strtod(buf, nullptr);
        return r == 0.0 ? 0.0 : r;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(rounded(e, digits));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[k] = rounded(v, digits);
        return out;
    }
    return j;
}

std::string dump(const json& j) { return rounded(j).dump(2) + "\n"; }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

} // namespace collapsekit
