#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bohm/errors.hpp"
#include "bohm/scenarios.hpp"

namespace py = pybind11;

namespace {

// Coordinates as nested lists: one row per recorded time, t first.
std::vector<std::vector<double>> rows(const bohm::Trajectory& tr) {
    std::vector<std::vector<double>> out;
    out.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        std::vector<double> r{tr.times[i]};
        for (const double q : tr.configs[i].coords()) r.push_back(q);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bohmian trajectory and ergodicity lab (native core)";
    m.attr("__version__") = bohm::kVersion;

    auto base = py::register_exception<bohm::Error>(m, "BohmError", PyExc_RuntimeError);
    py::register_exception<bohm::ParseError>(m, "ParseError", base.ptr());
    py::register_exception<bohm::SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<bohm::SerializationError>(m, "SerializationError", base.ptr());

    m.def("scenario_names", &bohm::scenario_names);
    m.def("default_config", [](const std::string& name) { return bohm::serialize(bohm::default_config(name)); },
          py::arg("scenario"), "Default config of a built-in scenario as JSON text.");
    m.def("normalize_config", [](const std::string& text) { return bohm::serialize(bohm::parse_config(text)); },
          py::arg("text"), "Parse and validate a config; returns it with every default filled in.");

    m.def(
        "run",
        [](const std::string& text, std::size_t threads, std::optional<std::filesystem::path> out_dir) {
            const auto cfg = bohm::parse_config(text);
            bohm::RunResult r;
            {
                py::gil_scoped_release release;
                r = bohm::run_scenario(cfg, threads);
            }
            py::dict d;
            d["summary"] = bohm::summary_json(r.summary, true);
            py::list trs;
            for (const auto& tr : r.artifacts.trajectories) trs.append(rows(tr));
            d["trajectories"] = trs;
            if (r.artifacts.histogram) {
                d["histogram"] = py::make_tuple(r.artifacts.histogram->edges, r.artifacts.histogram->counts);
            } else {
                d["histogram"] = py::none();
            }
            if (out_dir) d["written"] = bohm::write_outputs(r, *out_dir);
            return d;
        },
        py::arg("config"), py::arg("threads") = 1, py::arg("out_dir") = py::none(),
        "Run a scenario from JSON text.");
}
