#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "entrance/cli.hpp"
#include "entrance/io.hpp"
#include "gen.hpp"

using namespace entrance;
using io::Json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(ENTRANCE_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("entrance-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

// Reference RFC 4180 reader, written independently of CsvWriter.
std::vector<std::vector<std::string>> parse_csv(const std::string& s) {
    std::vector<std::vector<std::string>> rows(1);
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quoted) {
            if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            rows.back().push_back(field);
            field.clear();
        } else if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') {
            rows.back().push_back(field);
            field.clear();
            rows.emplace_back();
            ++i;
        } else {
            field += c;
        }
    }
    rows.pop_back();  // trailing CRLF opens an empty row
    return rows;
}

cli::RunOptions options(const std::string& command, const fs::path& config, const fs::path& out) {
    cli::RunOptions o;
    o.command = command;
    o.config_path = config;
    o.out_dir = out;
    return o;
}

}  // namespace

TEST_CASE("spec json round trip") {
    ProcessSpec s;
    s.gamma0 = RateFunction::polynomial({0.0, 1.0, -0.5});
    s.gamma1 = RateFunction::tabulated({{0, 0}, {10, 5}, {1e6, 5}});
    s.gamma2 = RateFunction::power_law(2.0, 1.5);
    s.nu = LevyMeasure::finite_atoms({{1.0, 2.0}, {0.5, 0.25}});
    const Json j = io::to_json(s);
    CHECK(io::to_json(io::spec_from_json(j)) == j);

    s.nu = LevyMeasure::truncated_stable(0.7, 2.0, 3.0);
    CHECK(io::to_json(io::spec_from_json(io::to_json(s))) == io::to_json(s));
}

TEST_CASE("schema errors name the field") {
    Json j = io::to_json(logistic_csbp(1.0, LevyMeasure::none()));
    j["gamma1"]["slop"] = 2;
    try {
        io::spec_from_json(j);
        FAIL("expected SchemaError");
    } catch (const io::SchemaError& e) {
        CHECK(e.field() == "spec.gamma1.slop");
    }
    j = io::to_json(logistic_csbp(1.0, LevyMeasure::none()));
    j["nu"] = {{"kind", "stable"}, {"alpha", 2.5}, {"c", 1}};
    CHECK_THROWS_AS(io::spec_from_json(j), SpecError);
    j["nu"] = {{"kind", "gamma"}};
    CHECK_THROWS_AS(io::spec_from_json(j), io::SchemaError);
    CHECK_THROWS_AS(io::sim_from_json(Json{{"record_stride", "sometimes"}}), io::SchemaError);
}

TEST_CASE("json syntax errors carry the line") {
    try {
        io::parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}");
        FAIL("expected SchemaError");
    } catch (const io::SchemaError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("format_double round-trips") {
    gen::for_all(2000, 71, [](gen::Gen& g, std::size_t) {
        const double v = std::bit_cast<double>(g.bits());
        if (!std::isfinite(v)) return;
        CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
    });
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::real(std::nan("")).is_null());
}

TEST_CASE("csv writer quotes per RFC 4180") {
    gen::for_all(300, 72, [](gen::Gen& g, std::size_t i) {
        std::vector<std::vector<std::string>> rows(1 + g.index(4));
        const std::size_t width = 1 + g.index(4);
        for (auto& r : rows) {
            for (std::size_t k = 0; k < width; ++k) r.push_back(g.text(6));
        }
        std::ostringstream out;
        io::CsvWriter w(out);
        for (const auto& r : rows) w.row(r);
        INFO("case " << i);
        CHECK(parse_csv(out.str()) == rows);
    });
    std::ostringstream out;
    io::CsvWriter w(out);
    w.row({"a,b", "say \"hi\"", "plain"});
    CHECK(out.str() == "\"a,b\",\"say \"\"hi\"\"\",plain\r\n");
}

TEST_CASE("overrides follow dotted paths") {
    Json j = {{"sim", {{"dt", 0.01}}}};
    cli::apply_override(j, "sim.dt", "1e-4");
    cli::apply_override(j, "passage.x0", "1e5");
    cli::apply_override(j, "simulate.thresholds", "[1, 2]");
    cli::apply_override(j, "diagnose.semigroup.function", "exp_neg");
    CHECK(j["sim"]["dt"] == 1e-4);
    CHECK(j["passage"]["x0"] == 1e5);
    CHECK(j["simulate"]["thresholds"].size() == 2);
    CHECK(j["diagnose"]["semigroup"]["function"] == "exp_neg");
    CHECK_THROWS_AS(cli::apply_override(j, "sim.dt.x", "1"), io::SchemaError);
}

TEST_CASE("config loading resolves spec files and short overrides") {
    const auto dir = scratch("load");
    write_file(dir / "s.json", slurp(kConfigs / "null.json"));
    const auto cfg = write_file(dir / "c.json", R"({"spec_file": "s.json", "passage": {"x0": 3}})");
    auto o = options("passage", cfg, dir);
    o.overrides = {{"b", "1"}, {"sim.t_max", "2"}};
    o.seed = 9;
    const Json j = cli::load_config(o);
    CHECK(j["spec"]["gamma0"]["kind"] == "zero");
    CHECK(j["passage"]["b"] == 1);
    CHECK(j["sim"]["t_max"] == 2);
    CHECK(j["sim"]["seed"] == 9);
}

TEST_CASE("output directory precedence") {
    cli::RunOptions o;
    Json cfg = {{"output_dir", "from-config"}};
    o.out_dir = "from-flag";
    CHECK(cli::resolve_output_dir(o, cfg) == "from-flag");
    o.out_dir.reset();
    CHECK(cli::resolve_output_dir(o, cfg) == "from-config");
    setenv("ENTRANCE_OUTPUT_DIR", "from-env", 1);
    CHECK(cli::resolve_output_dir(o, Json::object()) == "from-env");
    unsetenv("ENTRANCE_OUTPUT_DIR");
    CHECK(cli::resolve_output_dir(o, Json::object()) == "entrance-out");
}

TEST_CASE("cli: classify the logistic example") {
    const auto out = scratch("classify");
    std::ostringstream log;
    REQUIRE(cli::execute(options("classify", kConfigs / "logistic.json", out), log) == 0);
    const Json j = io::read_json_file(out / "boundary.json");
    CHECK(j["verdict"] == "Entrance");
    CHECK(j["integral_value"] == 2.0);
    const Json m = io::read_json_file(out / "manifest.json");
    CHECK(m["command"] == "classify");
    CHECK(m["inputs"]["spec"]["gamma0"]["kind"] == "logistic_drift");
    CHECK(m.contains("versions"));
    CHECK(m["runtime"].contains("wall_seconds"));
}

TEST_CASE("cli: validate the null example") {
    const auto out = scratch("validate");
    std::ostringstream log;
    REQUIRE(cli::execute(options("validate", kConfigs / "null.json", out), log) == 0);
    const Json j = io::read_json_file(out / "validation.json");
    CHECK(j["integrability_ok"] == true);
    CHECK(j["one_sided_lipschitz_theta"] == 0.0);
}

TEST_CASE("cli: passage on the drift-only example from 1e5 to 2") {
    const auto out = scratch("passage");
    auto o = options("passage", kConfigs / "logistic_drift_only.json", out);
    o.overrides = {{"x0", "1e5"}, {"b", "2"}};
    std::ostringstream log;
    REQUIRE(cli::execute(o, log) == 0);
    const Json j = io::read_json_file(out / "passage.json");
    CHECK(std::abs(j["mean"].get<double>() - 1.0) < 1e-3);
    const auto rows = parse_csv(slurp(out / "passage.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"x0", "b", "n", "mean", "se", "censored_fraction"});
}

TEST_CASE("cli: malformed configs exit 2 with a location") {
    const auto dir = scratch("bad");
    std::ostringstream log;
    const auto syntax = write_file(dir / "syntax.json", "{\n  \"spec\": {\n    \"gamma0\": ,\n}");
    CHECK(cli::execute(options("validate", syntax, dir), log) == cli::kExitValidation);
    CHECK(log.str().find("line 3") != std::string::npos);

    log.str("");
    std::string text = slurp(kConfigs / "null.json");
    text.replace(text.find("\"gamma1\": {\"kind\": \"zero\"}"), 26,
                 "\"gamma1\": {\"kind\": \"zero\", \"slope\": 1}");
    const auto field = write_file(dir / "field.json", text);
    CHECK(cli::execute(options("validate", field, dir), log) == cli::kExitValidation);
    CHECK(log.str().find("spec.gamma1.slope") != std::string::npos);
    CHECK(log.str().find("line 5") != std::string::npos);

    log.str("");
    const auto top = write_file(dir / "top.json", R"({"spec": {"gamma0": {"kind": "zero"}, "gamma1": {"kind": "zero"}, "gamma2": {"kind": "zero"}, "nu": {"kind": "none"}}, "colour": 1})");
    CHECK(cli::execute(options("validate", top, dir), log) == cli::kExitValidation);
    CHECK(log.str().find("colour") != std::string::npos);
}

TEST_CASE("cli: simulation subcommands need a seed") {
    const auto dir = scratch("seed");
    std::ostringstream log;
    auto o = options("simulate", kConfigs / "null.json", dir);
    o.overrides = {{"x0", "3"}};
    CHECK(cli::execute(o, log) == cli::kExitValidation);
    o.seed = 4;
    CHECK(cli::execute(o, log) == cli::kExitOk);
}

TEST_CASE("cli: domain errors exit 2 and numerical failures exit 3") {
    const auto dir = scratch("codes");
    std::ostringstream log;
    auto o = options("passage", kConfigs / "logistic_drift_only.json", dir);
    o.overrides = {{"x0", "1"}, {"b", "2"}};
    CHECK(cli::execute(o, log) == cli::kExitValidation);

    const auto blow = write_file(dir / "blow.json", R"({
  "spec": {"gamma0": {"kind": "power_law", "coefficient": 1, "exponent": 400},
           "gamma1": {"kind": "zero"}, "gamma2": {"kind": "zero"}, "nu": {"kind": "none"}},
  "sim": {"seed": 1, "dt": 0.001, "x_cap": 1e300, "adaptive": false},
  "simulate": {"x0": 10, "n_paths": 2}
})");
    CHECK(cli::execute(options("simulate", blow, dir), log) == cli::kExitNumerical);
}

TEST_CASE("cli: reruns are byte-identical across worker counts") {
    for (const char* command : {"simulate", "flow", "passage"}) {
        const auto a = scratch(std::string("rerun-a-") + command);
        const auto b = scratch(std::string("rerun-b-") + command);
        auto o = options(command, kConfigs / "logistic.json", a);
        o.workers = 1;
        std::ostringstream log;
        REQUIRE(cli::execute(o, log) == 0);
        o.out_dir = b;
        o.workers = 3;
        REQUIRE(cli::execute(o, log) == 0);
        const Json manifest = io::read_json_file(a / "manifest.json");
        for (const auto& name : manifest["outputs"]) {
            INFO(command << " " << name.get<std::string>());
            CHECK(slurp(a / name.get<std::string>()) == slurp(b / name.get<std::string>()));
        }
        // manifests differ only in the runtime block
        Json ma = io::read_json_file(a / "manifest.json");
        Json mb = io::read_json_file(b / "manifest.json");
        ma.erase("runtime");
        mb.erase("runtime");
        CHECK(ma == mb);
    }
}
