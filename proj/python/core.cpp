// Python bindings. Specs, configs and results cross the boundary as JSON text
// in the same schema as the CLI; entrance/__init__.py does the (de)serialising.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "entrance/cli.hpp"
#include "entrance/io.hpp"
#include "entrance/version.hpp"

namespace py = pybind11;
using namespace entrance;
using io::Json;

namespace {

ProcessSpec spec_of(const std::string& text) { return io::spec_from_json(io::parse_json(text, "spec"), "spec"); }

SimConfig sim_of(const std::string& text) {
    if (text.empty()) return {};
    return io::sim_from_json(io::parse_json(text, "sim"));
}

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 100; ++i) g.push_back(i);
    return g;
}

std::string dump(const Json& j) { return j.dump(); }

Json path_json(const Path& p) {
    Json crossings = Json::object();
    for (const auto& [level, t] : p.crossings) crossings[io::format_double(level)] = t;
    Json obs = Json::array();
    for (double v : p.observations) obs.push_back(io::real(v));
    return {{"times", p.times},
            {"values", p.values},
            {"hit_zero_at", p.hit_zero_at ? Json(*p.hit_zero_at) : Json(nullptr)},
            {"capped_at", p.capped_at ? Json(*p.capped_at) : Json(nullptr)},
            {"crossings", crossings},
            {"observations", obs},
            {"steps", p.steps},
            {"error", p.error}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulation and entrance-boundary diagnostics for nonlinear branching processes";
    m.attr("__version__") = kVersion;

    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("validate", [](const std::string& spec, std::optional<std::vector<double>> grid) {
        const auto s = spec_of(spec);
        return dump(io::to_json(validate(s, grid.value_or(default_grid()))));
    }, py::arg("spec"), py::arg("grid") = py::none());

    m.def("classify", [](const std::string& spec, std::optional<std::vector<double>> grid) {
        const auto s = spec_of(spec);
        const auto report = validate(s, grid.value_or(default_grid()));
        return dump(io::to_json(classify(s, report)));
    }, py::arg("spec"), py::arg("grid") = py::none());

    m.def("simulate", [](const std::string& spec, double x0, const std::string& sim, std::size_t n_paths,
                         unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        PathEnsemble e;
        {
            py::gil_scoped_release release;
            e = simulate_ensemble(s, x0, c, n_paths, workers);
        }
        Json paths = Json::array();
        for (const auto& p : e.paths) paths.push_back(path_json(p));
        return dump({{"x0", x0}, {"summary", io::to_json(e.summary)}, {"paths", paths}});
    }, py::arg("spec"), py::arg("x0"), py::arg("sim"), py::arg("n_paths"), py::arg("workers") = 1);

    m.def("passage", [](const std::string& spec, double x0, double b, const std::string& sim,
                        std::size_t n_paths, unsigned workers, std::optional<double> theta) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        PassageEstimate e;
        {
            py::gil_scoped_release release;
            e = estimate_passage(s, x0, b, c, n_paths, workers);
        }
        if (theta) e.exp_moment = exp_moment_of(e, *theta);
        Json j = io::to_json(e);
        Json samples = Json::array();
        for (double v : e.samples) samples.push_back(io::real(v));
        j["samples"] = samples;
        return dump(j);
    }, py::arg("spec"), py::arg("x0"), py::arg("b"), py::arg("sim"), py::arg("n_paths"),
       py::arg("workers") = 1, py::arg("theta") = py::none());

    m.def("markov_decomposition", [](const std::string& spec, double x, double x_mid, double b,
                                     const std::string& sim, std::size_t n_paths, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        py::gil_scoped_release release;
        return dump(io::to_json(markov_decomposition_check(s, x, x_mid, b, c, n_paths, workers)));
    }, py::arg("spec"), py::arg("x"), py::arg("x_mid"), py::arg("b"), py::arg("sim"),
       py::arg("n_paths"), py::arg("workers") = 1);

    m.def("flow", [](const std::string& spec, std::vector<double> initial_values, const std::string& sim,
                     std::size_t n_realizations, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        auto grid = default_grid();
        grid.insert(grid.end(), initial_values.begin(), initial_values.end());
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        const auto cert = validate(s, grid);
        std::vector<FlowEnsemble> flows;
        {
            py::gil_scoped_release release;
            flows = simulate_flows(s, cert, initial_values, c, n_realizations, workers);
        }
        Json out = Json::array();
        for (const auto& f : flows) {
            Json paths = Json::array();
            for (const auto& p : f.paths) paths.push_back(path_json(p));
            out.push_back({{"realization", f.realization},
                           {"order_violations", f.order_violations()},
                           {"crossing_order_violations", f.crossing_order_violations},
                           {"paths", paths}});
        }
        return dump({{"initial_values", initial_values}, {"realizations", out}});
    }, py::arg("spec"), py::arg("initial_values"), py::arg("sim"), py::arg("n_realizations"),
       py::arg("workers") = 1);

    m.def("gronwall", [](const std::string& spec, double x, double y, double t, std::size_t n,
                         const std::string& sim, std::optional<double> theta, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        const auto cert = validate(s, default_grid());
        if (!theta) theta = cert.one_sided_lipschitz_theta;
        py::gil_scoped_release release;
        return dump(io::to_json(gronwall_check(s, cert, theta, x, y, t, n, c, workers)));
    }, py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("n_realizations"),
       py::arg("sim"), py::arg("theta") = py::none(), py::arg("workers") = 1);

    m.def("entrance_profile", [](const std::string& spec, std::vector<double> b_grid,
                                 std::vector<double> x_grid, double t, const std::string& sim,
                                 std::size_t n_paths, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        py::gil_scoped_release release;
        return dump(io::to_json(entrance_profile(s, b_grid, x_grid, t, c, n_paths, workers)));
    }, py::arg("spec"), py::arg("b_grid"), py::arg("x_grid"), py::arg("t"), py::arg("sim"),
       py::arg("n_paths"), py::arg("workers") = 1);

    m.def("semigroup_cauchy", [](const std::string& spec, double t, std::vector<double> x_grid,
                                 const std::string& sim, std::size_t n_paths, double lambda,
                                 unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        const auto f = lambda == 1.0 ? TestFunction::exp_neg() : TestFunction::exp_neg_scaled(lambda);
        py::gil_scoped_release release;
        return dump(io::to_json(semigroup_cauchy(s, f, t, x_grid, c, n_paths, workers)));
    }, py::arg("spec"), py::arg("t"), py::arg("x_grid"), py::arg("sim"), py::arg("n_paths"),
       py::arg("lam") = 1.0, py::arg("workers") = 1);

    m.def("moment_convergence", [](const std::string& spec, int power, double b,
                                   std::vector<double> x_grid, const std::string& sim,
                                   std::size_t n_paths, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        py::gil_scoped_release release;
        return dump(io::to_json(moment_convergence(s, power, b, x_grid, c, n_paths, workers)));
    }, py::arg("spec"), py::arg("power"), py::arg("b"), py::arg("x_grid"), py::arg("sim"),
       py::arg("n_paths"), py::arg("workers") = 1);

    m.def("fdd_convergence", [](const std::string& spec, std::vector<double> times,
                                std::vector<double> x_grid, double x_ref, const std::string& sim,
                                std::size_t n_paths, unsigned workers) {
        const auto s = spec_of(spec);
        const auto c = sim_of(sim);
        py::gil_scoped_release release;
        return dump(io::to_json(fdd_convergence(s, times, x_grid, x_ref, c, n_paths, workers)));
    }, py::arg("spec"), py::arg("times"), py::arg("x_grid"), py::arg("x_ref"), py::arg("sim"),
       py::arg("n_paths"), py::arg("workers") = 1);

    m.def("run", [](const std::string& command, const std::string& config_path,
                    std::optional<std::uint64_t> seed, unsigned workers,
                    std::optional<std::string> out_dir,
                    std::vector<std::pair<std::string, std::string>> overrides) {
        cli::RunOptions o;
        o.command = command;
        o.config_path = config_path;
        o.seed = seed;
        o.workers = workers;
        if (out_dir) o.out_dir = *out_dir;
        o.overrides = std::move(overrides);
        std::ostringstream log;
        int code;
        {
            py::gil_scoped_release release;
            code = cli::execute(o, log);
        }
        return py::make_tuple(code, log.str());
    }, py::arg("command"), py::arg("config"), py::arg("seed") = py::none(), py::arg("workers") = 1,
       py::arg("out_dir") = py::none(),
       py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{});
}
