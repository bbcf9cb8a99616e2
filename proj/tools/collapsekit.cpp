// collapsekit command-line front end.
//
// Exit codes: 0 success / certified / found, 2 malformed input or missing homotopy,
// 3 counterexample or proven not found, 4 inconclusive.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "collapsekit/complex.hpp"
#include "collapsekit/gallery.hpp"
#include "collapsekit/io.hpp"
#include "collapsekit/limitkit.hpp"
#include "collapsekit/system.hpp"

namespace ck = collapsekit;

namespace {

enum Exit : int { kOk = 0, kBadInput = 2, kCounterexample = 3, kInconclusive = 4 };

struct RunConfig {
    std::string input;
    std::optional<int> depth;
    double grid = 0.0;
    double tol = 1e-9;
    std::uint64_t seed = 1;
    int window = 3;
    double eps = 0.05;
    std::string format = "json";
    std::string out;
    // gallery parameters
    std::string tree = "binary";
    std::string maps = "degree1";
    int dimension = 2;
    // collapse
    std::string strategy = "exhaustive";
    std::optional<int> target;
    std::size_t budget = 1'000'000;
    // check
    std::string what = "insulation";
};

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty() || cfg.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw ck::ParseError("cannot write '" + cfg.out + "'");
    f << text;
}

ck::GallerySpec gallery_spec(const RunConfig& cfg, const std::string& name) {
    ck::GallerySpec s;
    s.name = name;
    s.depth = cfg.depth.value_or(s.depth);
    s.tree = cfg.tree;
    s.maps = cfg.maps;
    s.dimension = cfg.dimension;
    return s;
}

bool is_gallery_name(const std::string& s) {
    const auto& names = ck::gallery_names();
    return std::find(names.begin(), names.end(), s) != names.end();
}

/// A system file, or a gallery name when no such file exists. --depth rebuilds gallery systems.
ck::InverseSystem load_system(const RunConfig& cfg) {
    if (!std::filesystem::exists(cfg.input) && is_gallery_name(cfg.input)) return ck::build(gallery_spec(cfg, cfg.input));
    auto j = ck::read_json_file(cfg.input);
    if (j.is_object() && j.contains("gallery") && cfg.depth) j["depth"] = *cfg.depth;
    auto sys = ck::system_from_json(j);
    if (cfg.depth && *cfg.depth > sys.depth())
        throw ck::InvalidSpec("--depth " + std::to_string(*cfg.depth) + " exceeds the system depth " + std::to_string(sys.depth()));
    return sys;
}

int depth_of(const RunConfig& cfg, const ck::InverseSystem& sys) { return cfg.depth.value_or(sys.depth()); }

void validate(const RunConfig& cfg) {
    if (cfg.depth && *cfg.depth < 1) throw ck::InvalidSpec("--depth must be at least 1");
    if (!(cfg.tol > 0.0)) throw ck::InvalidSpec("--tol must be positive");
    if (cfg.grid < 0.0) throw ck::InvalidSpec("--grid must be positive");
    if (cfg.window < 1) throw ck::InvalidSpec("--window must be at least 1");
    if (cfg.format != "json" && cfg.format != "csv") throw ck::InvalidSpec("--format must be json or csv");
}

int cmd_example(const RunConfig& cfg) {
    if (!is_gallery_name(cfg.input)) throw ck::InvalidSpec("unknown gallery system '" + cfg.input + "'");
    if (cfg.format != "json") throw ck::InvalidSpec("systems are written as JSON only");
    emit(cfg, ck::dump(ck::to_json(ck::build(gallery_spec(cfg, cfg.input)))));
    return kOk;
}

template <class Complex, class Outcome>
ck::json outcome_json(const Complex& k, const Outcome& o) {
    ck::json j{{"status", ck::to_string(o.status)}, {"cells", k.size()}, {"euler_characteristic", k.euler_characteristic()}};
    if (!o.reason.empty()) j["reason"] = o.reason;
    if (o.found()) {
        j["schedule"] = ck::to_json(o.schedule);
        j["steps"] = o.schedule.steps.size();
        bool verified = true, euler = true;
        std::size_t final_cells = 0;
        try {
            auto cur = k;
            for (const auto& st : o.schedule.steps) {
                cur = ck::elementary_collapse(cur, st);
                euler = euler && cur.euler_characteristic() == k.euler_characteristic();
            }
            final_cells = cur.size();
        } catch (const ck::NotFree&) {
            verified = false;
        }
        j["replay"] = {{"verified", verified}, {"euler_constant", euler}, {"final_cells", final_cells}};
    }
    return j;
}

int status_exit(ck::SearchStatus s) {
    switch (s) {
    case ck::SearchStatus::Found: return kOk;
    case ck::SearchStatus::ProvenNotFound: return kCounterexample;
    case ck::SearchStatus::Inconclusive: return kInconclusive;
    }
    return kInconclusive;
}

int cmd_collapse(const RunConfig& cfg) {
    const auto j = ck::read_json_file(cfg.input);
    ck::SearchOptions opt;
    if (cfg.strategy == "greedy") opt.strategy = ck::SearchStrategy::Greedy;
    else if (cfg.strategy != "exhaustive") throw ck::InvalidSpec("--strategy must be greedy or exhaustive");
    opt.seed = cfg.seed;
    opt.step_limit = cfg.budget;
    if (ck::is_cubical_json(j)) {
        const auto k = ck::cubical_from_json(j);
        if (cfg.target) throw ck::InvalidSpec("--target takes a vertex id, cubical complexes collapse to any vertex");
        const auto o = ck::collapse_search(k, ck::CubicalComplex{}, opt);
        emit(cfg, ck::dump(outcome_json(k, o)));
        return status_exit(o.status);
    }
    const auto k = ck::simplicial_from_json(j);
    if (const auto rep = ck::validate(k); !rep.valid()) throw ck::ParseError("invalid complex: " + rep.issues.front().detail);
    if (cfg.target && !k.vertices.count(*cfg.target)) throw ck::InvalidSpec("--target is not a vertex of the complex");
    const auto o = cfg.target ? ck::collapse_search(k, *cfg.target, opt) : ck::collapse_search(k, ck::SimplicialComplex{}, opt);
    emit(cfg, ck::dump(outcome_json(k, o)));
    return status_exit(o.status);
}

int cmd_compactify(const RunConfig& cfg) {
    const auto sys = load_system(cfg);
    const int depth = depth_of(cfg, sys);
    ck::SampleOptions opt;
    opt.window = cfg.window;
    opt.eps = cfg.eps;
    opt.tol = cfg.tol;
    opt.spacing = cfg.grid > 0.0 ? cfg.grid
                                 : (sys.spec().contains("gallery") ? ck::aligned_spacing(ck::GallerySpec::from_json(sys.spec()))
                                                                   : 1.0 / 16.0);
    const auto [cloud, rep] = ck::sample_limit(sys, depth, opt);
    ck::json j{{"system", sys.name()}, {"depth", depth}, {"spacing", opt.spacing}, {"threads", cloud.threads.size()},
               {"remainder", rep.to_json()}};
    const auto regions = rep.remainder_components;
    j["summary"] = std::to_string(cloud.threads.size()) + " threads, " + std::to_string(rep.stable.size()) + " stable, " +
                   std::to_string(rep.remainder.size()) + " remainder candidates in " + std::to_string(regions) +
                   (regions == 1 ? " unstable region" : " unstable regions");
    std::cerr << j["summary"].get<std::string>() << "\n";
    emit(cfg, cfg.format == "csv" ? ck::cloud_csv(sys, cloud, rep) : ck::dump(j));
    return kOk;
}

int verdict_exit(ck::Verdict v) {
    switch (v) {
    case ck::Verdict::Certified: return kOk;
    case ck::Verdict::CounterexampleCandidate: return kCounterexample;
    case ck::Verdict::Inconclusive: return kInconclusive;
    }
    return kInconclusive;
}

int cmd_check(const RunConfig& cfg) {
    const auto sys = load_system(cfg);
    const int depth = depth_of(cfg, sys);
    if (cfg.format != "json") throw ck::InvalidSpec("reports are written as JSON only");
    if (cfg.what == "insulation") {
        ck::FullInsulationOptions opt;
        opt.seed = cfg.seed;
        if (cfg.grid > 0.0) opt.cover_spacing = cfg.grid;
        const auto rep = ck::fully_insulated_check(sys, depth, opt);
        emit(cfg, ck::dump(rep.to_json()));
        return verdict_exit(rep.verdict);
    }
    if (cfg.what == "homotopy") {
        ck::NegligibilityOptions opt;
        opt.seed = cfg.seed;
        opt.tol = cfg.tol;
        if (cfg.grid > 0.0) opt.spacing = cfg.grid;
        const auto rep = ck::homotopy_negligibility_check(sys, depth, opt);
        emit(cfg, ck::dump(rep.to_json()));
        return rep.passed() ? kOk : kCounterexample;
    }
    if (cfg.what == "tracks") {
        const double spacing = cfg.grid > 0.0 ? cfg.grid : 1.0 / 8.0;
        const auto ts = ck::time_grid(11);
        ck::json bonds = ck::json::array();
        bool any = false, ok = true;
        for (int i = 1; i <= depth; ++i) {
            const auto& b = sys.bond(i);
            if (!b->has_tracks()) {
                bonds.push_back({{"bond", i}, {"tracks", false}});
                continue;
            }
            any = true;
            const auto rep = ck::track_faithful_check(ck::HomotopyEvaluator(b), b->domain()->grid(spacing), ts, cfg.tol);
            ck::json e{{"bond", i}, {"tracks", true}, {"passed", rep.passed}, {"checked", rep.checked}, {"worst", rep.worst}};
            if (rep.witness) {
                e["witness"] = ck::to_json(*rep.witness);
                e["witness_t"] = rep.witness_t;
            }
            ok = ok && rep.passed;
            bonds.push_back(std::move(e));
        }
        emit(cfg, ck::dump({{"system", sys.name()}, {"depth", depth}, {"passed", any && ok}, {"bonds", bonds}}));
        if (!any) throw ck::MissingHomotopy("no bond up to depth " + std::to_string(depth) + " carries a homotopy");
        return ok ? kOk : kCounterexample;
    }
    throw ck::InvalidSpec("--what must be insulation, homotopy or tracks");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collapses, inverse systems and their compactifications"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--depth", cfg.depth, "Truncation depth");
        sub->add_option("--grid", cfg.grid, "Sample spacing");
        sub->add_option("--tol", cfg.tol, "Tolerance");
        sub->add_option("--seed", cfg.seed, "Random seed");
        sub->add_option("--window", cfg.window, "Stability window");
        sub->add_option("--eps", cfg.eps, "Chain distance for remainder components");
        sub->add_option("--format", cfg.format, "json or csv");
        sub->add_option("--out", cfg.out, "Output path (default stdout)");
        sub->add_option("--tree", cfg.tree, "Tree for tree-balls / tree-countable");
        sub->add_option("--maps", cfg.maps, "Telescope family: point, degree1, degree2");
        sub->add_option("--dimension", cfg.dimension, "Simplex dimension for rn-shells");
    };

    auto* example = app.add_subcommand("example", "Write a gallery system as JSON");
    example->add_option("name", cfg.input, "Gallery name")->required();
    common(example);

    auto* collapse = app.add_subcommand("collapse", "Search a collapse schedule for a complex file");
    collapse->add_option("complex", cfg.input, "Complex JSON")->required();
    collapse->add_option("--strategy", cfg.strategy, "greedy or exhaustive");
    collapse->add_option("--target", cfg.target, "Target vertex");
    collapse->add_option("--budget", cfg.budget, "Step or state budget");
    common(collapse);

    auto* compactify = app.add_subcommand("compactify", "Sample the inverse limit and classify threads");
    compactify->add_option("system", cfg.input, "System JSON or gallery name")->required();
    common(compactify);

    auto* check = app.add_subcommand("check", "Run a verdict check on a system");
    check->add_option("system", cfg.input, "System JSON or gallery name")->required();
    check->add_option("--what", cfg.what, "insulation, homotopy or tracks");
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    try {
        validate(cfg);
        if (example->parsed()) return cmd_example(cfg);
        if (collapse->parsed()) return cmd_collapse(cfg);
        if (compactify->parsed()) return cmd_compactify(cfg);
        return cmd_check(cfg);
    } catch (const ck::MissingHomotopy& e) {
        std::cerr << "error: missing homotopy: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kBadInput;
}
