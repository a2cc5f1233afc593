// Acceptance run: every criterion is one config under configs/acceptance,
// executed through the CLI layer; the checks read the files it writes.
//
//   acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "entrance/cli.hpp"
#include "entrance/diagnostics.hpp"
#include "entrance/io.hpp"

namespace fs = std::filesystem;
using entrance::io::Json;

namespace {

const fs::path kConfigs = fs::path(ENTRANCE_SOURCE_DIR) / "configs" / "acceptance";
fs::path g_scratch;
unsigned g_workers = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Run {
    fs::path out;
    int code = -1;
    std::string log;
    Json read(const std::string& name) const { return entrance::io::read_json_file(out / name); }
};

Run run(const std::string& command, const std::string& config, const std::string& tag,
        std::vector<std::pair<std::string, std::string>> overrides = {}, unsigned workers = 0) {
    Run r;
    r.out = g_scratch / tag;
    fs::remove_all(r.out);
    entrance::cli::RunOptions o;
    o.command = command;
    o.config_path = kConfigs / config;
    o.overrides = std::move(overrides);
    o.workers = workers == 0 ? g_workers : workers;
    o.out_dir = r.out;
    std::ostringstream log;
    r.code = entrance::cli::execute(o, log);
    r.log = log.str();
    if (r.code != 0) throw std::runtime_error(command + " " + config + " exited " + std::to_string(r.code) + ": " + r.log);
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double num(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

double logistic_flow(double x0, double t) { return x0 / (1.0 + x0 * t / 2.0); }

// ---------------------------------------------------------------------------

Outcome c1() {
    const auto p = run("passage", "c01.json", "c01-passage").read("passage.json");
    const auto m = run("diagnose", "c01.json", "c01-diagnose").read("diagnostics.json")["moments"];
    const double t = num(p["mean"]);
    const double exact = 2.0 * (1.0 / 2.0 - 1.0 / 1e5);
    const double limit = num(m["plateau"]["limit"]);
    const bool ok = std::abs(t - exact) <= 1e-3 && std::abs(limit - 1.0) <= 1e-3 &&
                    m["plateau"]["detected"].get<bool>();
    return {ok, fmt("T_2 = %.6f vs %.6f; plateau %.6f vs 1", t, exact, limit)};
}

Outcome c2() {
    std::vector<double> errors;
    for (const char* dt : {"1e-4", "5e-5", "2.5e-5"}) {
        const auto r = run("simulate", "c02.json", std::string("c02-") + dt, {{"sim.dt", dt}});
        std::istringstream in(slurp(r.out / "paths.csv"));
        std::string line;
        std::getline(in, line);
        double sup = 0.0;
        while (std::getline(in, line)) {
            double idx, t, v;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &idx, &t, &v) != 3) {
                throw std::runtime_error("bad row in paths.csv: " + line);
            }
            sup = std::max(sup, std::abs(v - logistic_flow(100.0, t)));
        }
        errors.push_back(sup);
    }
    const double r1 = errors[0] / errors[1];
    const double r2 = errors[1] / errors[2];
    const bool ok = r1 >= 1.5 && r1 <= 2.5 && r2 >= 1.5 && r2 <= 2.5;
    return {ok, fmt("sup errors %.3e %.3e %.3e; ratios %.3f", errors[0], errors[1], errors[2], r1) +
                    fmt(" %.3f", r2)};
}

Outcome c3() {
    const auto s = run("simulate", "c03.json", "c03").read("summary.json");
    const auto& m = s["moments"][0];
    const double n = m["count"].get<double>();
    const double mean = num(m["mean"]);
    const double se = std::sqrt(num(m["variance"]) / n);
    const double target = 10.0 * std::exp(0.5);
    const double z = (mean - target) / se;
    return {std::abs(z) <= 3.0 && n >= 1e4, fmt("mean %.4f vs %.4f, se %.4f, z %.2f", mean, target, se, z)};
}

Outcome c4() {
    const auto v = run("flow", "c04.json", "c04").read("violations.json");
    const auto order = v["order_violations"].get<std::size_t>();
    const auto crossing = v["crossing_order_violations"].get<std::size_t>();
    const auto reals = v["n_realizations"].get<std::size_t>();
    return {order == 0 && reals == 1000,
            fmt("%g realizations, %g ordering violations, %g crossing-order violations", double(reals),
                double(order), double(crossing))};
}

Outcome c5() {
    const auto g = run("flow", "c05.json", "c05").read("violations.json")["gronwall"];
    const double lhs = num(g["lhs_mean"]), se = num(g["lhs_se"]), rhs = num(g["rhs"]);
    const bool ok = g["pass"].get<bool>() && lhs - 3.0 * se <= rhs && rhs == 5.0;
    return {ok, fmt("E gap %.4f +- %.4f vs bound %.2f (theta %.1f)", lhs, se, rhs, num(g["theta"]))};
}

Outcome c6() {
    const auto m = run("passage", "c06.json", "c06").read("passage.json")["markov_decomposition"];
    const double z = num(m["z_score"]);
    const bool ok = std::isfinite(z) && std::abs(z) <= 3.0 && !m["inconclusive"].get<bool>();
    return {ok, fmt("lhs %.5f, rhs %.5f, z %.2f", num(m["lhs"]), num(m["rhs"]), z)};
}

Outcome c7() {
    const auto p = run("diagnose", "c07.json", "c07").read("diagnostics.json")["profile"];
    bool ok = true;
    std::vector<double> limits;
    for (const auto& col : p["plateau"]) {
        ok = ok && col["detected"].get<bool>();
        limits.push_back(num(col["limit"]));
    }
    for (std::size_t k = 1; k < limits.size(); ++k) ok = ok && limits[k] < limits[k - 1];
    ok = ok && limits.back() * 2.0 <= limits.front();
    std::string d = "limits";
    for (double l : limits) d += fmt(" %.4f", l);
    d += fmt("; ratio %.2f", limits.front() / limits.back());
    return {ok, d};
}

Outcome c8() {
    const auto a = run("diagnose", "c08a.json", "c08a").read("diagnostics.json")["moments"];
    const auto b = run("diagnose", "c08b.json", "c08b").read("diagnostics.json")["moments"];
    const bool plateau = a["plateau"]["detected"].get<bool>() && !a["inconclusive"].get<bool>();
    const auto& xs = b["x_grid"];
    const auto& means = b["means"];
    std::size_t i100 = 0, i1e4 = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (xs[j].get<double>() == 100.0) i100 = j;
        if (xs[j].get<double>() == 1e4) i1e4 = j;
    }
    const double growth = num(means[i1e4]) / num(means[i100]) - 1.0;
    double max_censored = 0.0;
    for (const auto& c : b["censored"]) max_censored = std::max(max_censored, num(c));
    const bool ok = plateau && growth >= 0.5;
    return {ok, fmt("r2=2 plateau %g at %.4f; r2=1.2 E T_5 %.3f -> %.3f", plateau,
                    num(a["plateau"]["limit"]), num(means[i100]), num(means[i1e4])) +
                    fmt(" (+%.0f%%, max censored %.3f)", 100.0 * growth, max_censored)};
}

Outcome c9() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto logistic = run("classify", "c09a.json", "c09a").read("boundary.json");
    const auto linear = run("classify", "c09b.json", "c09b").read("boundary.json");
    const auto r2_high = run("classify", "c09c.json", "c09c").read("boundary.json");
    const auto r2_low = run("classify", "c09d.json", "c09d").read("boundary.json");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double b = num(logistic["b_used"]);
    const bool ok = logistic["verdict"] == "Entrance" &&
                    logistic["criterion_used"] == "CompetitionIntegral" &&
                    num(logistic["integral_value"]) == 2.0 / (1.0 * b) &&
                    linear["verdict"] == "Inconclusive" && r2_high["verdict"] == "Entrance" &&
                    r2_high["criterion_used"] == "StablePower" && r2_low["verdict"] == "Inconclusive" &&
                    secs < 1.0;
    return {ok, "logistic " + logistic["verdict"].get<std::string>() +
                    fmt(" (integral %.17g at b=%g)", num(logistic["integral_value"]), b) + ", linear " +
                    linear["verdict"].get<std::string>() + ", r2=2 " + r2_high["verdict"].get<std::string>() +
                    ", r2=1.2 " + r2_low["verdict"].get<std::string>() + fmt(", %.3f s", secs)};
}

Outcome c10() {
    const auto s = run("diagnose", "c10.json", "c10").read("diagnostics.json")["semigroup"];
    const auto& last = s["rows"].back();
    const double diff = num(last["difference"]), se = num(last["joint_se"]);
    const bool ok = diff < 3.0 * se && s["tail_decreasing"].get<bool>();
    return {ok, fmt("last difference %.3e < 3 x joint SE %.3e; tail decreasing %g", diff, se,
                    s["tail_decreasing"].get<bool>())};
}

Outcome c11() {
    const auto f = run("diagnose", "c11.json", "c11").read("diagnostics.json")["fdd"];
    bool ok = true;
    std::string d;
    const double x_last = num(f["x_grid"].back());
    for (const auto& pt : f["per_time"]) {
        const bool dec = pt["decreasing"].get<bool>();
        const bool below = pt["final_below_threshold"].get<bool>();
        ok = ok && dec && below;
        double final_ks = std::nan("");
        for (const auto& cell : f["cells"]) {
            if (num(cell["x"]) == x_last && num(cell["time"]) == num(pt["time"])) final_ks = num(cell["ks"]);
        }
        d += fmt("t=%g: decreasing %g, final KS %.4f; ", num(pt["time"]), dec, final_ks);
    }
    d += fmt("threshold %.4f", num(f["threshold"]));
    return {ok, d};
}

Outcome c12() {
    const auto j = run("diagnose", "c12.json", "c12").read("diagnostics.json");
    bool zero = true;
    for (const auto& row : j["profile"]["p_matrix"]) {
        for (const auto& v : row) zero = zero && v.get<double>() == 0.0;
    }
    bool no_plateau = true;
    for (const auto& col : j["profile"]["plateau"]) no_plateau = no_plateau && !col["detected"].get<bool>();
    bool non_decreasing = true;
    for (const auto& pt : j["fdd"]["per_time"]) {
        non_decreasing = non_decreasing && pt["non_decreasing"].get<bool>();
    }
    return {zero && no_plateau && non_decreasing,
            fmt("p == 0: %g, no plateau: %g, KS non-decreasing: %g", zero, no_plateau, non_decreasing)};
}

Outcome c13() {
    struct Case {
        const char* command;
        const char* config;
    };
    const Case cases[] = {{"flow", "c04.json"}, {"passage", "c06.json"}, {"diagnose", "c07.json"},
                          {"diagnose", "c10.json"}, {"diagnose", "c12.json"}};
    std::size_t files = 0;
    std::string mismatch;
    for (const auto& c : cases) {
        // the c06 Markov legs are the slow part; a smaller run exercises the same code
        std::vector<std::pair<std::string, std::string>> o;
        if (std::string(c.config) == "c06.json") o = {{"passage.markov.n_paths", "1000"}, {"n_paths", "200"}};
        const auto a = run(c.command, c.config, std::string("c13-1-") + c.config, o, 1);
        const auto b = run(c.command, c.config, std::string("c13-3-") + c.config, o, 3);
        const Json manifest = a.read("manifest.json");
        for (const auto& name : manifest["outputs"]) {
            ++files;
            const auto n = name.get<std::string>();
            if (slurp(a.out / n) != slurp(b.out / n)) mismatch += std::string(" ") + c.config + "/" + n;
        }
    }
    return {mismatch.empty() && files > 0,
            fmt("%g result files compared across 1 and 3 workers", double(files)) +
                (mismatch.empty() ? "" : "; differ:" + mismatch)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // stated runtime limit, 0 when none
    Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "deterministic entrance oracle", 10, c1},
    {2, "order of convergence", 30, c2},
    {3, "mean identity", 120, c3},
    {4, "monotone coupling", 300, c4},
    {5, "Gronwall bound", 0, c5},
    {6, "Markov decomposition of T_b", 0, c6},
    {7, "entrance profile", 900, c7},
    {8, "stable power-law contrast", 0, c8},
    {9, "classifier golden cases", 1, c9},
    {10, "semigroup Cauchy at infinity", 0, c10},
    {11, "FDD convergence", 0, c11},
    {12, "negative control", 0, c12},
    {13, "reproducibility across workers", 0, c13},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    g_workers = std::max(1u, std::thread::hardware_concurrency());
    g_scratch = fs::temp_directory_path() / "entrance-acceptance";
    fs::create_directories(g_scratch);

    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            o.pass = false;
            o.detail += fmt("; over the %g s budget", c.budget_seconds);
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2d %-32s %s  (%.1f s)  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                    secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
