// Python bindings. Structured values cross the boundary as plain dicts and lists.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "collapsekit/complex.hpp"
#include "collapsekit/gallery.hpp"
#include "collapsekit/io.hpp"
#include "collapsekit/limitkit.hpp"
#include "collapsekit/system.hpp"

namespace py = pybind11;
namespace ck = collapsekit;

namespace {

ck::json from_py(const py::object& o) {
    return ck::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object to_py(const ck::json& j) { return py::module_::import("json").attr("loads")(ck::rounded(j).dump()); }

ck::InverseSystem system_of(const py::object& o) {
    if (py::isinstance<py::str>(o)) return ck::build(ck::GallerySpec{o.cast<std::string>()});
    return ck::system_from_json(from_py(o));
}

py::object collapse(const py::dict& complex, const std::string& strategy, std::uint64_t seed, std::size_t budget) {
    ck::SearchOptions opt;
    if (strategy == "greedy") opt.strategy = ck::SearchStrategy::Greedy;
    else if (strategy != "exhaustive") throw ck::InvalidSpec("strategy must be greedy or exhaustive");
    opt.seed = seed;
    opt.step_limit = budget;
    const auto j = from_py(complex);
    ck::json out;
    if (ck::is_cubical_json(j)) {
        const auto o = ck::collapse_search(ck::cubical_from_json(j), ck::CubicalComplex{}, opt);
        out = {{"status", ck::to_string(o.status)}, {"schedule", ck::to_json(o.schedule)}, {"steps", o.schedule.steps.size()}};
    } else {
        const auto k = ck::simplicial_from_json(j);
        const auto o = ck::collapse_search(k, ck::SimplicialComplex{}, opt);
        out = {{"status", ck::to_string(o.status)}, {"schedule", ck::to_json(o.schedule)}, {"steps", o.schedule.steps.size()},
               {"euler_characteristic", k.euler_characteristic()}};
    }
    return to_py(out);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Collapses of complexes and inverse systems of retractions";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ck::InvalidSpec>(m, "InvalidSpec", PyExc_ValueError);
    py::register_exception<ck::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ck::MissingHomotopy>(m, "MissingHomotopy", PyExc_RuntimeError);

    py::class_<ck::InverseSystem>(m, "System")
        .def(py::init([](const py::object& o) { return system_of(o); }), py::arg("spec"))
        .def_property_readonly("name", &ck::InverseSystem::name)
        .def_property_readonly("depth", &ck::InverseSystem::depth)
        .def("to_dict", [](const ck::InverseSystem& s) { return to_py(ck::to_json(s)); })
        .def("__repr__", [](const ck::InverseSystem& s) { return "<System " + s.name() + " depth " + std::to_string(s.depth()) + ">"; });

    m.def("gallery_names", &ck::gallery_names);
    m.def(
        "build",
        [](const std::string& name, int depth, const std::string& tree, const std::string& maps, int dimension) {
            return ck::build(ck::GallerySpec{name, depth, tree, maps, dimension});
        },
        py::arg("name"), py::arg("depth") = 6, py::arg("tree") = "binary", py::arg("maps") = "degree1", py::arg("dimension") = 2);
    m.def("collapse", &collapse, py::arg("complex"), py::arg("strategy") = "exhaustive", py::arg("seed") = 0,
          py::arg("budget") = 1'000'000);
    m.def(
        "insulation",
        [](const ck::InverseSystem& s, std::optional<int> depth) {
            return to_py(ck::fully_insulated_check(s, depth.value_or(s.depth())).to_json());
        },
        py::arg("system"), py::arg("depth") = py::none());
    m.def(
        "sample_limit",
        [](const ck::InverseSystem& s, std::optional<int> depth, std::optional<double> spacing, double eps) {
            ck::SampleOptions opt;
            if (spacing) opt.spacing = *spacing;
            else if (s.spec().is_object() && s.spec().contains("gallery"))
                opt.spacing = ck::aligned_spacing(ck::GallerySpec::from_json(s.spec()));
            opt.eps = eps;
            return to_py(ck::sample_limit(s, depth.value_or(s.depth()), opt).second.to_json());
        },
        py::arg("system"), py::arg("depth") = py::none(), py::arg("spacing") = py::none(), py::arg("eps") = 0.05);
    m.def(
        "tree_ends", [](const ck::InverseSystem& s, int depth) { return to_py(ck::tree_ends(s, depth).to_json()); },
        py::arg("system"), py::arg("depth"));
    m.def(
        "thread_of",
        [](const ck::InverseSystem& s, const py::object& point, int depth) {
            const auto t = ck::thread_of(s, ck::point_from_json(from_py(point)), depth);
            ck::json out = ck::json::array();
            for (const auto& p : t.coords) out.push_back(ck::to_json(p));
            return to_py(out);
        },
        py::arg("system"), py::arg("point"), py::arg("depth"));
}
