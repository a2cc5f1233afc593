#include "entrance/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "entrance/version.hpp"

namespace entrance::cli {

namespace fs = std::filesystem;
using io::Json;
using io::ObjectReader;

namespace {

const std::vector<std::string> kTopLevelKeys = {"description", "spec",     "spec_file", "sim",
                                                "output_dir",  "validate", "simulate",  "flow",
                                                "passage",     "classify", "diagnose"};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io::SchemaError("", "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Line of the first occurrence of "key" in the raw text, 0 when absent.
int find_key_line(const std::string& text, const std::string& field) {
    auto dot = field.find_last_of('.');
    std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
    if (auto bracket = key.find('['); bracket != std::string::npos) key.resize(bracket);
    if (key.empty()) return 0;
    const auto pos = text.find('"' + key + '"');
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    if (n > 1) out.back() = b;
    return out;
}

std::vector<double> geomspace(double a, double b, std::size_t n) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out.push_back(a * std::pow(b / a, w));
    }
    if (n > 1) {
        out.front() = a;
        out.back() = b;
    }
    return out;
}

// A grid is an explicit array or {"linear": [a, b, n]} / {"geometric": [a, b, n]}.
std::vector<double> grid_from(ObjectReader& r, const std::string& key,
                              const std::vector<double>& fallback) {
    if (!r.has(key)) return fallback;
    const Json& g = r.at(key);
    if (g.is_array()) return r.numbers(key);
    ObjectReader gr(g, r.child(key));
    std::vector<double> out;
    for (const char* kind : {"linear", "geometric"}) {
        if (!gr.has(kind)) continue;
        const auto spec = gr.numbers(kind);
        if (spec.size() != 3 || spec[2] < 1 || spec[2] != std::floor(spec[2])) {
            throw io::SchemaError(gr.child(kind), "expected [first, last, count]");
        }
        const auto n = static_cast<std::size_t>(spec[2]);
        if (std::string(kind) == "geometric" && !(spec[0] > 0.0 && spec[1] > 0.0)) {
            throw io::SchemaError(gr.child(kind), "geometric grids need positive ends");
        }
        out = std::string(kind) == "linear" ? linspace(spec[0], spec[1], n)
                                            : geomspace(spec[0], spec[1], n);
    }
    gr.finish();
    if (out.empty()) throw io::SchemaError(r.child(key), "expected an array, linear or geometric");
    return out;
}

TestFunction test_function_from(const Json& j, const std::string& path) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "exp_neg") return TestFunction::exp_neg();
        if (name == "bounded_rational") return TestFunction::bounded_rational();
        throw io::SchemaError(path, "unknown test function '" + name +
                                        "' (exp_neg, bounded_rational, {kind: exp_neg_scaled})");
    }
    ObjectReader r(j, path);
    const auto kind = r.text("kind");
    TestFunction f;
    if (kind == "exp_neg") {
        f = TestFunction::exp_neg();
    } else if (kind == "bounded_rational") {
        f = TestFunction::bounded_rational();
    } else if (kind == "exp_neg_scaled") {
        try {
            f = TestFunction::exp_neg_scaled(r.number("lambda"));
        } catch (const SpecError& e) {
            if (dynamic_cast<const io::SchemaError*>(&e)) throw;
            throw io::SchemaError(path, e.what());
        }
    } else {
        throw io::SchemaError(r.child("kind"), "unknown test function kind '" + kind + "'");
    }
    r.finish();
    return f;
}

struct Context {
    const RunOptions& options;
    Json config;
    ProcessSpec spec;
    SimConfig sim;
    fs::path out;
    std::vector<std::string> outputs;
    std::ostream& log;

    fs::path file(const std::string& name) {
        outputs.push_back(name);
        return out / name;
    }
};

const std::vector<double> kDefaultGrid = linspace(0.0, 100.0, 101);

// ---------------------------------------------------------------------------
// subcommands

int run_validate(Context& ctx, ObjectReader& block) {
    const auto grid = grid_from(block, "grid", kDefaultGrid);
    block.finish();
    const auto report = validate(ctx.spec, grid, ctx.sim.x_cap);
    io::write_json(ctx.file("validation.json"), io::to_json(report));
    ctx.log << "integrability_ok=" << std::boolalpha << report.integrability_ok << " theta="
            << (report.one_sided_lipschitz_theta ? io::format_double(*report.one_sided_lipschitz_theta)
                                                 : std::string("absent"))
            << " gamma2_monotone=" << report.gamma2_monotone << '\n';
    return report.integrability_ok ? kExitOk : kExitValidation;
}

int run_classify(Context& ctx, ObjectReader& block) {
    const auto grid = grid_from(block, "grid", kDefaultGrid);
    block.finish();
    const auto report = validate(ctx.spec, grid, ctx.sim.x_cap);
    const auto boundary = classify(ctx.spec, report);
    Json j = io::to_json(boundary);
    j["validation"] = io::to_json(report);
    io::write_json(ctx.file("boundary.json"), j);
    ctx.log << "verdict=" << to_string(boundary.verdict)
            << " criterion=" << to_string(boundary.criterion_used) << '\n';
    return kExitOk;
}

int run_simulate(Context& ctx, ObjectReader& block) {
    const double x0 = block.number("x0");
    const auto n_paths = block.count("n_paths", 1);
    ctx.sim.thresholds = block.numbers("thresholds", ctx.sim.thresholds);
    ctx.sim.observation_times = block.numbers("observation_times", ctx.sim.observation_times);
    block.finish();
    if (n_paths == 0) throw DomainError("simulate.n_paths must be >= 1");
    const auto ensemble = simulate_ensemble(ctx.spec, x0, ctx.sim, n_paths, ctx.options.workers);

    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"path_index", "time", "value"});
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i) {
        const auto& p = ensemble.paths[i];
        for (std::size_t k = 0; k < p.times.size(); ++k) {
            w.field(std::uint64_t{i}).field(p.times[k]).field(p.values[k]).end_row();
        }
    }
    io::write_text(ctx.file("paths.csv"), csv.str());

    Json summary = io::to_json(ensemble.summary);
    summary["x0"] = x0;
    summary["n_paths"] = n_paths;
    Json path_flags = Json::array();
    for (const auto& p : ensemble.paths) {
        path_flags.push_back({{"hit_zero_at", p.hit_zero_at ? io::real(*p.hit_zero_at) : Json(nullptr)},
                              {"capped_at", p.capped_at ? io::real(*p.capped_at) : Json(nullptr)},
                              {"steps", p.steps},
                              {"error", p.error}});
    }
    summary["paths"] = std::move(path_flags);
    io::write_json(ctx.file("summary.json"), summary);

    std::vector<std::vector<double>> rows;
    for (const auto& m : ensemble.summary.moments) {
        rows.push_back({m.time, m.mean, std::sqrt(m.variance)});
    }
    io::write_plot_data(ctx.file("moments.dat"), {"time", "mean", "sd"}, rows);
    ctx.log << "simulated " << n_paths << " paths from x0=" << io::format_double(x0) << '\n';
    return ensemble.summary.errors == 0 ? kExitOk : kExitNumerical;
}

int run_flow(Context& ctx, ObjectReader& block) {
    const auto starts = block.numbers("initial_values");
    const auto n_real = block.count("n_realizations", 1);
    std::vector<double> default_grid{0.0};
    default_grid.insert(default_grid.end(), starts.begin(), starts.end());
    const auto grid = grid_from(block, "grid", default_grid);
    std::optional<Json> gronwall_block;
    if (block.has("gronwall")) gronwall_block = block.at("gronwall");
    block.finish();

    const auto certificate = validate(ctx.spec, grid, ctx.sim.x_cap);
    const auto flows =
        simulate_flows(ctx.spec, certificate, starts, ctx.sim, n_real, ctx.options.workers);

    std::ostringstream csv;
    io::CsvWriter w(csv);
    w.row({"realization", "initial_value", "time", "value"});
    Json per_real = Json::array();
    std::size_t total = 0;
    std::size_t crossing_total = 0;
    for (const auto& flow : flows) {
        for (std::size_t m = 0; m < flow.paths.size(); ++m) {
            const auto& p = flow.paths[m];
            for (std::size_t k = 0; k < p.times.size(); ++k) {
                w.field(flow.realization)
                    .field(flow.initial_values[m])
                    .field(p.times[k])
                    .field(p.values[k])
                    .end_row();
            }
        }
        total += flow.order_violations();
        crossing_total += flow.crossing_order_violations;
        Json violations = Json::array();
        for (const auto& v : flow.violations) {
            violations.push_back({{"time", v.time},
                                  {"lower_start", flow.initial_values[v.lower]},
                                  {"upper_start", flow.initial_values[v.upper]},
                                  {"excess", v.excess}});
        }
        per_real.push_back({{"realization", flow.realization},
                            {"order_violations", flow.order_violations()},
                            {"crossing_order_violations", flow.crossing_order_violations},
                            {"violations", std::move(violations)}});
    }
    io::write_text(ctx.file("flow.csv"), csv.str());
    Json report{{"initial_values", starts},
                {"n_realizations", n_real},
                {"order_violations", total},
                {"crossing_order_violations", crossing_total},
                {"realizations", std::move(per_real)}};

    if (gronwall_block) {
        ObjectReader g(*gronwall_block, "flow.gronwall");
        const double x = g.number("x");
        const double y = g.number("y");
        const double t = g.number("t");
        const auto n = g.count("n_realizations");
        std::optional<double> theta = certificate.one_sided_lipschitz_theta;
        if (g.has("theta")) theta = g.number("theta");
        g.finish();
        const auto result = gronwall_check(ctx.spec, certificate, theta, x, y, t, n, ctx.sim,
                                           ctx.options.workers);
        report["gronwall"] = io::to_json(result);
    }
    io::write_json(ctx.file("violations.json"), report);
    ctx.log << "order_violations=" << total << " crossing_order_violations=" << crossing_total
            << '\n';
    return kExitOk;
}

int run_passage(Context& ctx, ObjectReader& block) {
    const double x0 = block.number("x0");
    const double b = block.number("b");
    const auto n_paths = block.count("n_paths", 1000);
    std::optional<double> theta;
    if (block.has("theta")) theta = block.number("theta");
    std::optional<Json> tail_block, markov_block;
    if (block.has("tail")) tail_block = block.at("tail");
    if (block.has("markov")) markov_block = block.at("markov");
    block.finish();

    auto estimate = estimate_passage(ctx.spec, x0, b, ctx.sim, n_paths, ctx.options.workers);
    if (theta) estimate.exp_moment = exp_moment_of(estimate, *theta);

    std::ostringstream table;
    io::CsvWriter w(table);
    w.row({"x0", "b", "n", "mean", "se", "censored_fraction"});
    w.field(x0).field(b).field(std::uint64_t{n_paths});
    w.field(estimate.mean ? *estimate.mean : std::nan(""));
    w.field(estimate.se).field(estimate.censored_fraction).end_row();
    io::write_text(ctx.file("passage.csv"), table.str());

    std::ostringstream cdf;
    io::CsvWriter cw(cdf);
    cw.row({"t", "p"});
    std::vector<std::vector<double>> rows;
    for (const auto& [t, p] : estimate.cdf) {
        cw.field(t).field(p).end_row();
        rows.push_back({t, p});
    }
    io::write_text(ctx.file("cdf.csv"), cdf.str());
    io::write_plot_data(ctx.file("cdf.dat"), {"t", "p"}, rows);

    Json j = io::to_json(estimate);
    if (tail_block) {
        ObjectReader t(*tail_block, "passage.tail");
        const double t_unit = t.number("t_unit");
        const auto n_max = t.count("n_max");
        t.finish();
        j["tail_fit"] = io::to_json(tail_fit_of(estimate, t_unit, n_max));
    }
    if (markov_block) {
        ObjectReader m(*markov_block, "passage.markov");
        const double x = m.number("x");
        const double x_mid = m.number("x_mid");
        const double mb = m.number("b");
        const auto n = m.count("n_paths", n_paths);
        m.finish();
        j["markov_decomposition"] = io::to_json(
            markov_decomposition_check(ctx.spec, x, x_mid, mb, ctx.sim, n, ctx.options.workers));
    }
    io::write_json(ctx.file("passage.json"), j);
    ctx.log << "mean="
            << (estimate.mean ? io::format_double(*estimate.mean) : std::string("absent"))
            << " se=" << io::format_double(estimate.se)
            << " censored_fraction=" << io::format_double(estimate.censored_fraction) << '\n';
    return kExitOk;
}

int run_diagnose(Context& ctx, ObjectReader& block) {
    Json bundle;
    std::optional<Json> profile_b, semigroup_b, moments_b, fdd_b;
    if (block.has("profile")) profile_b = block.at("profile");
    if (block.has("semigroup")) semigroup_b = block.at("semigroup");
    if (block.has("moments")) moments_b = block.at("moments");
    if (block.has("fdd")) fdd_b = block.at("fdd");
    block.finish();
    if (!profile_b && !semigroup_b && !moments_b && !fdd_b) {
        throw io::SchemaError("diagnose", "needs at least one of profile, semigroup, moments, fdd");
    }
    const unsigned workers = ctx.options.workers;

    if (profile_b) {
        ObjectReader r(*profile_b, "diagnose.profile");
        const auto b_grid = grid_from(r, "b_grid", {});
        const auto x_grid = grid_from(r, "x_grid", {});
        const double t = r.number("t");
        const auto n = r.count("n_paths", 1000);
        r.finish();
        const auto p = entrance_profile(ctx.spec, b_grid, x_grid, t, ctx.sim, n, workers);
        bundle["profile"] = io::to_json(p);

        std::ostringstream csv;
        io::CsvWriter w(csv);
        w.row({"x", "b", "p", "mean", "se", "censored_fraction", "flagged"});
        std::vector<std::vector<double>> rows;
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            for (std::size_t k = 0; k < b_grid.size(); ++k) {
                w.field(x_grid[j]).field(b_grid[k]).field(p.p_matrix[j][k]);
                w.field(p.mean_matrix[j][k]).field(p.se_matrix[j][k]);
                w.field(p.censored_matrix[j][k]).field(p.flagged[j][k] ? "true" : "false");
                w.end_row();
                rows.push_back({b_grid[k], x_grid[j], p.mean_matrix[j][k], p.se_matrix[j][k],
                                p.p_matrix[j][k]});
            }
        }
        io::write_text(ctx.file("profile.csv"), csv.str());
        io::write_plot_data(ctx.file("profile.dat"), {"b", "x", "mean", "se", "p"}, rows);
    }
    if (semigroup_b) {
        ObjectReader r(*semigroup_b, "diagnose.semigroup");
        const auto f = r.has("function") ? test_function_from(r.at("function"), r.child("function"))
                                         : TestFunction::exp_neg();
        const double t = r.number("t");
        const auto x_grid = grid_from(r, "x_grid", {});
        const auto n = r.count("n_paths", 1000);
        r.finish();
        const auto s = semigroup_cauchy(ctx.spec, f, t, x_grid, ctx.sim, n, workers);
        bundle["semigroup"] = io::to_json(s);
        std::ostringstream csv;
        io::CsvWriter w(csv);
        w.row({"x_low", "x_high", "difference", "joint_se", "paired_se"});
        std::vector<std::vector<double>> rows;
        for (const auto& row : s.rows) {
            w.field(row.x_low).field(row.x_high).field(row.difference);
            w.field(row.joint_se).field(row.paired_se).end_row();
        }
        for (std::size_t j = 0; j < x_grid.size(); ++j) rows.push_back({x_grid[j], s.values[j], s.ses[j]});
        io::write_text(ctx.file("semigroup.csv"), csv.str());
        io::write_plot_data(ctx.file("semigroup.dat"), {"x", "value", "se"}, rows);
    }
    if (moments_b) {
        ObjectReader r(*moments_b, "diagnose.moments");
        MomentFunction h = 1;
        if (r.has("h")) {
            const Json& hj = r.at("h");
            if (hj.is_number_integer()) {
                h = hj.get<int>();
            } else {
                h = test_function_from(hj, r.child("h"));
            }
        }
        const double b = r.number("b");
        const auto x_grid = grid_from(r, "x_grid", {});
        const auto n = r.count("n_paths", 1000);
        r.finish();
        const auto m = moment_convergence(ctx.spec, h, b, x_grid, ctx.sim, n, workers);
        bundle["moments"] = io::to_json(m);
        std::ostringstream csv;
        io::CsvWriter w(csv);
        w.row({"x", "mean", "se", "censored_fraction"});
        std::vector<std::vector<double>> rows;
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            w.field(x_grid[j]).field(m.means[j]).field(m.ses[j]).field(m.censored[j]).end_row();
            rows.push_back({x_grid[j], m.means[j], m.ses[j]});
        }
        io::write_text(ctx.file("moments.csv"), csv.str());
        io::write_plot_data(ctx.file("moments.dat"), {"x", "mean", "se"}, rows);
    }
    if (fdd_b) {
        ObjectReader r(*fdd_b, "diagnose.fdd");
        const auto times = r.numbers("times");
        const auto x_grid = grid_from(r, "x_grid", {});
        const double x_ref = r.number("x_ref");
        const auto n = r.count("n_paths", 1000);
        r.finish();
        const auto f = fdd_convergence(ctx.spec, times, x_grid, x_ref, ctx.sim, n, workers);
        bundle["fdd"] = io::to_json(f);
        std::ostringstream csv;
        io::CsvWriter w(csv);
        w.row({"x", "time", "ks", "rho_distance"});
        std::vector<std::vector<double>> rows;
        for (const auto& row : f.cells) {
            for (const auto& c : row) {
                w.field(c.x).field(c.time).field(c.ks).field(c.rho_distance).end_row();
                rows.push_back({c.time, c.x, c.ks, c.rho_distance});
            }
        }
        io::write_text(ctx.file("fdd.csv"), csv.str());
        io::write_plot_data(ctx.file("fdd.dat"), {"time", "x", "ks", "rho"}, rows);
    }
    io::write_json(ctx.file("diagnostics.json"), bundle);
    ctx.log << "diagnostics written to " << ctx.out.string() << '\n';
    return kExitOk;
}

bool is_simulation(const std::string& command) {
    return command == "simulate" || command == "flow" || command == "passage" ||
           command == "diagnose";
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void apply_override(Json& config, const std::string& dotted, const std::string& raw) {
    Json value;
    try {
        value = Json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;
    }
    Json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot - start);
        if (key.empty()) throw io::SchemaError(dotted, "malformed override path");
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        Json& next = (*node)[key];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) {
            throw io::SchemaError(dotted.substr(0, dot), "override descends into a non-object");
        }
        node = &next;
        start = dot + 1;
    }
}

Json load_config(const RunOptions& options) {
    Json config = io::parse_json(read_file(options.config_path), options.config_path.string());
    if (!config.is_object()) throw io::SchemaError("", "config must be a JSON object");
    if (config.contains("spec_file")) {
        if (config.contains("spec")) {
            throw io::SchemaError("spec_file", "give either spec or spec_file, not both");
        }
        if (!config["spec_file"].is_string()) throw io::SchemaError("spec_file", "expected a path");
        fs::path ref = config["spec_file"].get<std::string>();
        if (ref.is_relative()) ref = options.config_path.parent_path() / ref;
        if (!fs::exists(ref)) throw io::SchemaError("spec_file", "file not found: " + ref.string());
        Json spec = io::read_json_file(ref);
        // a spec file may be a bare spec or a full config with a spec block
        if (spec.contains("spec")) spec = spec["spec"];
        config.erase("spec_file");
        config["spec"] = std::move(spec);
    }
    for (const auto& [path, raw] : options.overrides) {
        const std::string dotted =
            path.find('.') == std::string::npos ? options.command + "." + path : path;
        apply_override(config, dotted, raw);
    }
    if (options.seed) apply_override(config, "sim.seed", std::to_string(*options.seed));
    return config;
}

fs::path resolve_output_dir(const RunOptions& options, const Json& config) {
    if (options.out_dir) return *options.out_dir;
    if (config.contains("output_dir") && config["output_dir"].is_string()) {
        return config["output_dir"].get<std::string>();
    }
    if (const char* env = std::getenv("ENTRANCE_OUTPUT_DIR"); env && *env) return env;
    return "entrance-out";
}

int execute(const RunOptions& options, std::ostream& log) {
    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();
    std::string raw_text;
    try {
        if (std::find(kCommands.begin(), kCommands.end(), options.command) == kCommands.end()) {
            throw io::SchemaError("", "unknown subcommand '" + options.command + "'");
        }
        raw_text = read_file(options.config_path);
        Json config = load_config(options);

        for (const auto& [key, value] : config.items()) {
            if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), key) == kTopLevelKeys.end()) {
                throw io::SchemaError(key, "unknown key");
            }
        }
        if (!config.contains("spec")) throw io::SchemaError("spec", "required field is missing");
        if (is_simulation(options.command) &&
            !(config.contains("sim") && config["sim"].contains("seed"))) {
            throw io::SchemaError("sim.seed",
                                  "simulation subcommands need --seed or sim.seed in the config");
        }
        if (config.contains("description") && !config["description"].is_string()) {
            throw io::SchemaError("description", "expected a string");
        }

        Context ctx{options, config, io::spec_from_json(config["spec"]), {}, {}, {}, log};
        if (config.contains("sim")) ctx.sim = io::sim_from_json(config["sim"]);
        ctx.out = resolve_output_dir(options, config);
        fs::create_directories(ctx.out);

        const Json empty = Json::object();
        const Json& block_json = config.contains(options.command) ? config[options.command] : empty;
        ObjectReader block(block_json, options.command);

        int code = kExitOk;
        if (options.command == "validate") code = run_validate(ctx, block);
        if (options.command == "classify") code = run_classify(ctx, block);
        if (options.command == "simulate") code = run_simulate(ctx, block);
        if (options.command == "flow") code = run_flow(ctx, block);
        if (options.command == "passage") code = run_passage(ctx, block);
        if (options.command == "diagnose") code = run_diagnose(ctx, block);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        Json manifest;
        manifest["command"] = options.command;
        manifest["config_path"] = options.config_path.generic_string();
        manifest["inputs"] = config;
        manifest["seed"] = ctx.sim.seed;
        manifest["versions"] = {{"entrance", kVersion},
                                {"compiler", kCompiler},
                                {"cxx_standard", static_cast<long>(__cplusplus)}};
        manifest["outputs"] = ctx.outputs;
        manifest["exit_code"] = code;
        // everything that may differ between identical runs lives here
        manifest["runtime"] = {{"started_utc", started_utc},
                               {"wall_seconds", wall},
                               {"workers", options.workers}};
        io::write_json(ctx.out / "manifest.json", manifest);
        return code;
    } catch (const io::SchemaError& e) {
        // syntax errors already name the file and line
        if (e.line() > 0) {
            log << "schema error: " << e.what() << '\n';
            return kExitValidation;
        }
        const int line = raw_text.empty() ? 0 : find_key_line(raw_text, e.field());
        log << "schema error";
        if (line > 0) log << " (" << options.config_path.string() << ", near line " << line << ")";
        log << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const SpecError& e) {
        log << "specification error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        log << "domain error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const PreconditionError& e) {
        log << "precondition failed: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << " (last state " << e.last_state() << ")\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace entrance::cli
