#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpkdv/cli.hpp"
#include "qpkdv/errors.hpp"
#include "qpkdv/nonlin.hpp"

namespace py = pybind11;
using namespace qpkdv;
using cli::json;

namespace {

py::tuple run(const std::string& command, const std::string& config) {
    const auto cfg = cli::parse_config(json::parse(config));
    const auto cmd = cli::command_from_string(command);
    cli::RunResult r;
    {
        py::gil_scoped_release release;
        r = cli::run(cfg, cmd);
    }
    py::dict fields;
    for (const auto& [name, f] : r.fields) fields[py::str(name)] = f.dump();
    py::list checks;
    for (const auto& c : r.checks) checks.append(py::make_tuple(c.module, c.name, c.value, c.threshold, c.pass));
    return py::make_tuple(r.exit_code, r.report.dump(), r.trace_csv, fields, checks);
}

py::tuple parse_config(const std::string& config) {
    const auto cfg = cli::parse_config(json::parse(config));
    return py::make_tuple(cli::to_json(cfg).dump(), cfg.warnings);
}

py::dict nonlinearity_info(const std::string& text, const std::string& form, int nu) {
    const auto spec = nonlin::parse_nonlinearity(text, nonlin::form_from_string(form), 1.0);
    const auto flags = nonlin::structure_flags(spec, nu);
    py::list df;
    for (const auto& d : spec.df) df.append(nonlin::to_string(d));
    py::dict d;
    d["f"] = nonlin::to_string(spec.f);
    d["df"] = df;
    d["max_phi"] = spec.max_phi;
    d["cond_F"] = flags.cond_F;
    d["cond_Q"] = flags.cond_Q;
    d["reversible"] = flags.reversible;
    d["total_derivative"] = flags.total_derivative;
    d["hamiltonian"] = flags.hamiltonian;
    d["diagnostic"] = flags.diagnostic;
    return d;
}

// Samples on the default grid, shape (m_phi,) * nu + (m_x,).
py::array_t<double> synthesize(const std::string& field) {
    const auto u = cli::field_from_json(json::parse(field));
    const auto g = spectral::grid_for(u.trunc());
    auto v = spectral::synthesize(u, g);
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(g.nu), g.m_phi);
    shape.push_back(g.m_x);
    py::array_t<double> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bindings for the qpkdv solver pipeline";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<SmallDivisorError>(m, "SmallDivisorError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

    m.attr("config_version") = cli::kConfigVersion;
    m.def("run", &run, py::arg("command"), py::arg("config"),
          "Run a command on a JSON config; returns (exit_code, report, trace_csv, fields, checks)");
    m.def("parse_config", &parse_config, py::arg("config"), "Normalized config JSON and warnings");
    m.def("builtin_names", &nonlin::builtin_names);
    m.def("nonlinearity_info", &nonlinearity_info, py::arg("text"), py::arg("form") = "raw_f", py::arg("nu") = 1);
    m.def("synthesize", &synthesize, py::arg("field"), "Grid samples of a serialized field");
}
