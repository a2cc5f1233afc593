#include "entrance/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace entrance::io {

namespace {

std::string describe_type(const Json& j) { return j.type_name(); }

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw SchemaError(path, message);
}

Json matrix_json(const std::vector<std::vector<double>>& m) {
    Json out = Json::array();
    for (const auto& row : m) {
        Json r = Json::array();
        for (double v : row) r.push_back(real(v));
        out.push_back(std::move(r));
    }
    return out;
}

Json reals(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(real(x));
    return out;
}

Json optional_real(const std::optional<double>& v) { return v ? real(*v) : Json(nullptr); }

}  // namespace

SchemaError::SchemaError(const std::string& field, const std::string& message, int line)
    : SpecError(field.empty() ? message : field + ": " + message), field_(field), line_(line) {}

Json parse_json(std::string_view text, const std::string& source) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto offset = std::min<std::size_t>(e.byte, text.size());
        const int line =
            1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
        throw SchemaError("", source + ": line " + std::to_string(line) + ": " + e.what(), line);
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path.string());
}

// ---------------------------------------------------------------------------
// ObjectReader

ObjectReader::ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object, got " + describe_type(j_));
}

bool ObjectReader::has(const std::string& key) const { return j_.contains(key); }

const Json& ObjectReader::at(const std::string& key) {
    if (!j_.contains(key)) fail(child(key), "required field is missing");
    seen_.push_back(key);
    return j_.at(key);
}

double ObjectReader::number(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) fail(child(key), "expected a number, got " + describe_type(v));
    return v.get<double>();
}

double ObjectReader::number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
}

std::uint64_t ObjectReader::count(const std::string& key) {
    const Json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail(child(key), "expected a nonnegative integer");
}

std::uint64_t ObjectReader::count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
}

bool ObjectReader::boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_boolean()) fail(child(key), "expected true or false, got " + describe_type(v));
    return v.get<bool>();
}

std::string ObjectReader::text(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) fail(child(key), "expected a string, got " + describe_type(v));
    return v.get<std::string>();
}

std::string ObjectReader::text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
}

std::vector<double> ObjectReader::numbers(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_array()) fail(child(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) {
            fail(child(key) + "[" + std::to_string(i) + "]", "expected a number");
        }
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<double> ObjectReader::numbers(const std::string& key,
                                          const std::vector<double>& fallback) {
    return has(key) ? numbers(key) : fallback;
}

void ObjectReader::finish() const {
    for (const auto& [key, value] : j_.items()) {
        if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
            fail(path_ + "." + key, "unknown key");
        }
    }
}

// ---------------------------------------------------------------------------
// spec and sim config

RateFunction rate_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    const std::string kind = r.text("kind");
    RateFunction f;
    try {
        if (kind == "zero") {
            f = RateFunction::zero();
        } else if (kind == "linear") {
            f = RateFunction::linear(r.number("slope"));
        } else if (kind == "power_law") {
            const double a = r.number("coefficient");
            f = RateFunction::power_law(a, r.number("exponent"));
        } else if (kind == "logistic_drift") {
            f = RateFunction::logistic_drift(r.number("c"));
        } else if (kind == "polynomial") {
            f = RateFunction::polynomial(r.numbers("coefficients"));
        } else if (kind == "tabulated") {
            const Json& knots = r.at("knots");
            if (!knots.is_array()) fail(r.child("knots"), "expected an array of [x, value] pairs");
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t i = 0; i < knots.size(); ++i) {
                const Json& k = knots[i];
                if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
                    fail(r.child("knots") + "[" + std::to_string(i) + "]",
                         "expected a pair [x, value]");
                }
                pairs.emplace_back(k[0].get<double>(), k[1].get<double>());
            }
            f = RateFunction::tabulated(std::move(pairs));
        } else {
            fail(r.child("kind"), "unknown rate function kind '" + kind +
                                      "' (zero, linear, power_law, logistic_drift, polynomial, "
                                      "tabulated)");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const SpecError& e) {
        fail(path, e.what());
    }
    r.finish();
    return f;
}

LevyMeasure measure_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    const std::string kind = r.text("kind");
    LevyMeasure nu;
    try {
        if (kind == "none") {
            nu = LevyMeasure::none();
        } else if (kind == "stable") {
            const double alpha = r.number("alpha");
            nu = LevyMeasure::stable(alpha, r.number("c"));
        } else if (kind == "truncated_stable") {
            const double alpha = r.number("alpha");
            const double c = r.number("c");
            nu = LevyMeasure::truncated_stable(alpha, c, r.number("z_max"));
        } else if (kind == "finite_atoms") {
            const Json& atoms = r.at("atoms");
            if (!atoms.is_array()) fail(r.child("atoms"), "expected an array of atoms");
            std::vector<JumpAtom> list;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                ObjectReader a(atoms[i], r.child("atoms") + "[" + std::to_string(i) + "]");
                const double size = a.number("size");
                list.push_back({size, a.number("rate")});
                a.finish();
            }
            nu = LevyMeasure::finite_atoms(std::move(list));
        } else {
            fail(r.child("kind"), "unknown Levy measure kind '" + kind +
                                      "' (none, stable, truncated_stable, finite_atoms)");
        }
    } catch (const SchemaError&) {
        throw;
    } catch (const SpecError& e) {
        fail(path, e.what());
    }
    r.finish();
    return nu;
}

ProcessSpec spec_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    ProcessSpec spec;
    spec.gamma0 = rate_from_json(r.at("gamma0"), r.child("gamma0"));
    spec.gamma1 = rate_from_json(r.at("gamma1"), r.child("gamma1"));
    spec.gamma2 = rate_from_json(r.at("gamma2"), r.child("gamma2"));
    spec.nu = measure_from_json(r.at("nu"), r.child("nu"));
    r.finish();
    return spec;
}

SimConfig sim_from_json(const Json& j, SimConfig base, const std::string& path) {
    ObjectReader r(j, path);
    base.dt = r.number("dt", base.dt);
    base.eps = r.number("eps", base.eps);
    base.t_max = r.number("t_max", base.t_max);
    base.x_cap = r.number("x_cap", base.x_cap);
    const std::string mode =
        r.text("small_jump_mode", base.small_jump_mode == SmallJumpMode::Gaussian ? "gaussian" : "drop");
    if (mode == "gaussian") {
        base.small_jump_mode = SmallJumpMode::Gaussian;
    } else if (mode == "drop") {
        base.small_jump_mode = SmallJumpMode::Drop;
    } else {
        fail(r.child("small_jump_mode"), "expected 'gaussian' or 'drop'");
    }
    base.adaptive = r.boolean("adaptive", base.adaptive);
    base.seed = r.count("seed", base.seed);
    if (r.has("record_stride") && r.at("record_stride").is_string()) {
        if (r.text("record_stride") != "endpoints") {
            fail(r.child("record_stride"), "expected a positive integer or 'endpoints'");
        }
        base.record_stride = kRecordEndpointsOnly;
    } else {
        base.record_stride = r.count("record_stride", base.record_stride);
    }
    base.thresholds = r.numbers("thresholds", base.thresholds);
    base.observation_times = r.numbers("observation_times", base.observation_times);
    base.stop_when_crossed = r.boolean("stop_when_crossed", base.stop_when_crossed);
    base.max_steps = r.count("max_steps", base.max_steps);
    r.finish();
    return base;
}

// ---------------------------------------------------------------------------
// to_json

Json to_json(const RateFunction& f) {
    Json j;
    j["kind"] = f.kind_name();
    if (auto r = f.as<LinearRate>()) j["slope"] = r->slope;
    if (auto r = f.as<PowerLawRate>()) {
        j["coefficient"] = r->coefficient;
        j["exponent"] = r->exponent;
    }
    if (auto r = f.as<LogisticDriftRate>()) j["c"] = r->c;
    if (auto r = f.as<PolynomialRate>()) j["coefficients"] = r->coefficients;
    if (auto r = f.as<TabulatedRate>()) {
        Json knots = Json::array();
        for (std::size_t i = 0; i < r->xs.size(); ++i) knots.push_back({r->xs[i], r->values[i]});
        j["knots"] = std::move(knots);
    }
    return j;
}

Json to_json(const LevyMeasure& nu) {
    Json j;
    j["kind"] = nu.kind_name();
    if (auto m = nu.as<StableMeasure>()) {
        j["alpha"] = m->alpha;
        j["c"] = m->c;
    }
    if (auto m = nu.as<TruncatedStableMeasure>()) {
        j["alpha"] = m->alpha;
        j["c"] = m->c;
        j["z_max"] = m->z_max;
    }
    if (auto m = nu.as<FiniteAtomsMeasure>()) {
        Json atoms = Json::array();
        for (const auto& a : m->atoms) atoms.push_back({{"size", a.size}, {"rate", a.rate}});
        j["atoms"] = std::move(atoms);
    }
    return j;
}

Json to_json(const ProcessSpec& spec) {
    return {{"gamma0", to_json(spec.gamma0)},
            {"gamma1", to_json(spec.gamma1)},
            {"gamma2", to_json(spec.gamma2)},
            {"nu", to_json(spec.nu)}};
}

Json to_json(const SimConfig& c) {
    Json j;
    j["dt"] = c.dt;
    j["eps"] = c.eps;
    j["t_max"] = c.t_max;
    j["x_cap"] = c.x_cap;
    j["small_jump_mode"] = c.small_jump_mode == SmallJumpMode::Gaussian ? "gaussian" : "drop";
    j["adaptive"] = c.adaptive;
    j["seed"] = c.seed;
    if (c.record_stride == kRecordEndpointsOnly) {
        j["record_stride"] = "endpoints";
    } else {
        j["record_stride"] = c.record_stride;
    }
    j["thresholds"] = c.thresholds;
    j["observation_times"] = c.observation_times;
    j["stop_when_crossed"] = c.stop_when_crossed;
    j["max_steps"] = c.max_steps;
    return j;
}

Json to_json(const ValidationReport& report) {
    Json j;
    j["integrability_ok"] = report.integrability_ok;
    j["integrability_value"] = real(report.integrability_value);
    j["one_sided_lipschitz_theta"] = optional_real(report.one_sided_lipschitz_theta);
    j["gamma2_monotone"] = report.gamma2_monotone;
    j["warnings"] = report.warnings;
    j["grid_points"] = report.grid.size();
    return j;
}

Json to_json(const BoundaryReport& report) {
    Json j;
    j["verdict"] = to_string(report.verdict);
    j["criterion_used"] = to_string(report.criterion_used);
    j["integral_value"] = report.integral_value
                              ? (std::isfinite(*report.integral_value) ? Json(*report.integral_value)
                                                                       : Json("inf"))
                              : Json(nullptr);
    j["b_used"] = optional_real(report.b_used);
    j["details"] = report.details;
    return j;
}

Json to_json(const EnsembleSummary& summary) {
    Json moments = Json::array();
    for (const auto& m : summary.moments) {
        moments.push_back({{"time", real(m.time)},
                           {"count", m.count},
                           {"mean", real(m.mean)},
                           {"variance", real(m.variance)}});
    }
    Json crossings = Json::array();
    for (const auto& c : summary.crossings) {
        crossings.push_back({{"level", real(c.level)},
                             {"crossed", c.crossed},
                             {"total", c.total},
                             {"mean", real(c.mean)},
                             {"se", real(c.se)}});
    }
    return {{"moments", std::move(moments)},
            {"crossings", std::move(crossings)},
            {"capped", summary.capped},
            {"errors", summary.errors}};
}

Json to_json(const PassageEstimate& e) {
    Json j;
    j["x0"] = real(e.x0);
    j["b"] = real(e.b);
    j["t_max"] = real(e.t_max);
    j["n_paths"] = e.n_paths;
    j["mean"] = optional_real(e.mean);
    j["se"] = real(e.se);
    j["censored_fraction"] = real(e.censored_fraction);
    j["cdf_points"] = e.cdf.size();
    if (e.exp_moment) j["exp_moment"] = to_json(*e.exp_moment);
    return j;
}

Json to_json(const ExpMoment& m) {
    return {{"theta", real(m.theta)},
            {"estimate", real(m.estimate)},
            {"se", real(m.se)},
            {"lower_bound", m.lower_bound}};
}

Json to_json(const MarkovDecomposition& c) {
    return {{"lhs", real(c.lhs)},
            {"lhs_se", real(c.lhs_se)},
            {"rhs", real(c.rhs)},
            {"rhs_se", real(c.rhs_se)},
            {"z_score", real(c.z_score)},
            {"degenerate", c.degenerate},
            {"inconclusive", c.inconclusive},
            {"censored_fraction",
             {real(c.censored_fraction[0]), real(c.censored_fraction[1]),
              real(c.censored_fraction[2])}}};
}

Json to_json(const TailFit& f) {
    return {{"t_unit", real(f.t_unit)},
            {"alpha_hat", reals(f.alpha_hat)},
            {"slope", real(f.slope)},
            {"slack", real(f.slack)},
            {"degenerate", f.degenerate},
            {"consistent", f.consistent}};
}

Json to_json(const GronwallResult& r) {
    return {{"theta", real(r.theta)},
            {"lhs_mean", real(r.lhs_mean)},
            {"lhs_se", real(r.lhs_se)},
            {"rhs", real(r.rhs)},
            {"used", r.used},
            {"pass", r.pass}};
}

Json to_json(const EntranceProfile& p) {
    Json plateau = Json::array();
    for (std::size_t k = 0; k < p.plateau.size(); ++k) {
        plateau.push_back({{"b", real(p.b_grid[k])},
                           {"limit", optional_real(p.plateau[k].limit)},
                           {"detected", p.plateau[k].detected}});
    }
    Json flagged = Json::array();
    for (const auto& row : p.flagged) {
        Json r = Json::array();
        for (bool f : row) r.push_back(static_cast<bool>(f));
        flagged.push_back(std::move(r));
    }
    return {{"b_grid", reals(p.b_grid)},
            {"x_grid", reals(p.x_grid)},
            {"t", real(p.t)},
            {"n_paths", p.n_paths},
            {"p_matrix", matrix_json(p.p_matrix)},
            {"mean_matrix", matrix_json(p.mean_matrix)},
            {"se_matrix", matrix_json(p.se_matrix)},
            {"censored_matrix", matrix_json(p.censored_matrix)},
            {"flagged", std::move(flagged)},
            {"plateau", std::move(plateau)}};
}

Json to_json(const SemigroupCauchy& s) {
    Json rows = Json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"x_low", real(r.x_low)},
                        {"x_high", real(r.x_high)},
                        {"difference", real(r.difference)},
                        {"joint_se", real(r.joint_se)},
                        {"paired_se", real(r.paired_se)}});
    }
    return {{"function", s.function},
            {"t", real(s.t)},
            {"x_grid", reals(s.x_grid)},
            {"values", reals(s.values)},
            {"ses", reals(s.ses)},
            {"rows", std::move(rows)},
            {"coupled", s.coupled},
            {"tail_decreasing", s.tail_decreasing}};
}

Json to_json(const MomentConvergence& m) {
    Json flagged = Json::array();
    for (bool f : m.flagged) flagged.push_back(static_cast<bool>(f));
    return {{"function", m.function},
            {"b", real(m.b)},
            {"x_grid", reals(m.x_grid)},
            {"means", reals(m.means)},
            {"ses", reals(m.ses)},
            {"censored", reals(m.censored)},
            {"flagged", std::move(flagged)},
            {"plateau", {{"limit", optional_real(m.plateau.limit)}, {"detected", m.plateau.detected}}},
            {"inconclusive", m.inconclusive}};
}

Json to_json(const FddConvergence& f) {
    Json cells = Json::array();
    for (const auto& row : f.cells) {
        for (const auto& c : row) {
            cells.push_back({{"x", real(c.x)},
                             {"time", real(c.time)},
                             {"ks", real(c.ks)},
                             {"rho_distance", real(c.rho_distance)},
                             {"n", c.n},
                             {"n_ref", c.n_ref}});
        }
    }
    Json per_time = Json::array();
    for (std::size_t k = 0; k < f.times.size(); ++k) {
        per_time.push_back({{"time", real(f.times[k])},
                            {"decreasing", static_cast<bool>(f.decreasing[k])},
                            {"non_decreasing", static_cast<bool>(f.non_decreasing[k])},
                            {"final_below_threshold", static_cast<bool>(f.final_below_threshold[k])}});
    }
    return {{"times", reals(f.times)},
            {"x_grid", reals(f.x_grid)},
            {"x_ref", real(f.x_ref)},
            {"threshold", real(f.threshold)},
            {"cells", std::move(cells)},
            {"per_time", std::move(per_time)}};
}

// ---------------------------------------------------------------------------
// text output

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

CsvWriter& CsvWriter::field(std::string_view text) {
    if (!first_) out_ << ',';
    first_ = false;
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << text;
        return *this;
    }
    out_ << '"';
    for (char ch : text) {
        if (ch == '"') out_ << '"';
        out_ << ch;
    }
    out_ << '"';
    return *this;
}

void CsvWriter::end_row() {
    out_ << "\r\n";
    first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) field(f);
    end_row();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_plot_data(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << '#';
    for (const auto& c : columns) out << ' ' << c;
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ' ';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    write_text(path, out.str());
}

}  // namespace entrance::io
