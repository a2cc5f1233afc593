#include "entrance/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "entrance/coupling.hpp"
#include "entrance/errors.hpp"
#include "entrance/parallel.hpp"
#include "entrance/passage.hpp"
#include "entrance/rng.hpp"

namespace entrance {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFlagCensoring = 0.20;
constexpr double kUnboundedCensoring = 0.05;

void require_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw DomainError(std::string(what) + " must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] <= 0.0) {
            throw DomainError(std::string(what) + " entries must be positive and finite");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw DomainError(std::string(what) + " must be strictly increasing");
        }
    }
}

struct Moments {
    double mean = kNaN;
    double se = 0.0;
    std::size_t n = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments out;
    double mean = 0.0;
    double m2 = 0.0;
    for (double x : v) {
        if (std::isnan(x)) continue;
        ++out.n;
        const double d = x - mean;
        mean += d / static_cast<double>(out.n);
        m2 += d * (x - mean);
    }
    if (out.n > 0) out.mean = mean;
    if (out.n > 1) {
        out.se = std::sqrt(m2 / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
    }
    return out;
}

std::string format_real(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

TestFunction TestFunction::exp_neg_scaled(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw SpecError("ExpNegScaled needs a positive finite lambda");
    }
    return {Kind::ExpNegScaled, lambda};
}

double TestFunction::operator()(double x) const {
    switch (kind) {
        case Kind::ExpNeg: return std::exp(-x);
        case Kind::ExpNegScaled: return std::exp(-lambda * x);
        case Kind::BoundedRational: return 1.0 / (1.0 + x);
    }
    return kNaN;
}

std::string TestFunction::name() const {
    switch (kind) {
        case Kind::ExpNeg: return "exp_neg";
        case Kind::ExpNegScaled: return "exp_neg_scaled(" + format_real(lambda) + ")";
        case Kind::BoundedRational: return "bounded_rational";
    }
    return "?";
}

Plateau detect_plateau(const std::vector<double>& means, const std::vector<double>& ses,
                       const std::vector<bool>& flagged) {
    Plateau out;
    const std::size_t n = means.size();
    if (n == 0) return out;
    if (!flagged[n - 1] && std::isfinite(means[n - 1])) out.limit = means[n - 1];
    if (n < 3) return out;
    for (std::size_t i = n - 3; i < n; ++i) {
        if (flagged[i] || !std::isfinite(means[i])) return out;
    }
    bool ok = true;
    for (std::size_t i = n - 3; i < n && ok; ++i) {
        for (std::size_t j = i + 1; j < n && ok; ++j) {
            const double gap = std::abs(means[i] - means[j]);
            const double joint = 3.0 * std::hypot(ses[i], ses[j]);
            const double rel = 0.02 * std::max(std::abs(means[i]), std::abs(means[j]));
            ok = gap < std::max(joint, rel);
        }
    }
    out.detected = ok;
    return out;
}

EntranceProfile entrance_profile(const ProcessSpec& spec, const std::vector<double>& b_grid,
                                 const std::vector<double>& x_grid, double t,
                                 const SimConfig& config, std::size_t n_paths, unsigned workers) {
    require_increasing(b_grid, "b_grid");
    require_increasing(x_grid, "x_grid");
    if (!(x_grid.front() > b_grid.back())) {
        throw DomainError("entrance profile needs min(x_grid) > max(b_grid)");
    }
    if (!(t >= 0.0 && t <= config.t_max)) {
        throw DomainError("entrance profile needs 0 <= t <= t_max");
    }
    if (n_paths == 0) throw DomainError("entrance profile needs at least one path");

    SimConfig cfg = config;
    cfg.thresholds = b_grid;
    cfg.observation_times.clear();
    cfg.stop_when_crossed = true;
    cfg.record_stride = kRecordEndpointsOnly;
    cfg.check(x_grid.back());

    const std::size_t nb = b_grid.size();
    EntranceProfile out;
    out.b_grid = b_grid;
    out.x_grid = x_grid;
    out.t = t;
    out.n_paths = n_paths;

    for (double x : x_grid) {
        // crossing[path * nb + k]: T_{b_k}, NaN when censored
        std::vector<double> crossing(n_paths * nb, kNaN);
        const auto stream = stream_id(kTagPassageGrid, x);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            const Path path = simulate_path(spec, x, cfg, i, stream);
            for (std::size_t k = 0; k < nb; ++k) {
                if (auto c = path.crossing_time(b_grid[k])) crossing[i * nb + k] = *c;
            }
        });
        std::vector<double> p_row(nb), mean_row(nb), se_row(nb), cens_row(nb);
        std::vector<bool> flag_row(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            std::vector<double> column(n_paths);
            std::size_t by_t = 0;
            for (std::size_t i = 0; i < n_paths; ++i) {
                column[i] = crossing[i * nb + k];
                if (!std::isnan(column[i]) && column[i] <= t) ++by_t;
            }
            const auto m = moments(column);
            const double n = static_cast<double>(n_paths);
            p_row[k] = static_cast<double>(by_t) / n;
            mean_row[k] = m.mean;
            se_row[k] = m.se;
            cens_row[k] = static_cast<double>(n_paths - m.n) / n;
            flag_row[k] = cens_row[k] > kFlagCensoring;
        }
        out.p_matrix.push_back(std::move(p_row));
        out.mean_matrix.push_back(std::move(mean_row));
        out.se_matrix.push_back(std::move(se_row));
        out.censored_matrix.push_back(std::move(cens_row));
        out.flagged.push_back(std::move(flag_row));
    }

    for (std::size_t k = 0; k < nb; ++k) {
        std::vector<double> means, ses;
        std::vector<bool> flags;
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            means.push_back(out.mean_matrix[j][k]);
            ses.push_back(out.se_matrix[j][k]);
            flags.push_back(out.flagged[j][k]);
        }
        out.plateau.push_back(detect_plateau(means, ses, flags));
    }
    return out;
}

SemigroupCauchy semigroup_cauchy(const ProcessSpec& spec, const TestFunction& f, double t,
                                 const std::vector<double>& x_grid, const SimConfig& config,
                                 std::size_t n_paths, unsigned workers) {
    require_increasing(x_grid, "x_grid");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("semigroup_cauchy needs t >= 0");
    if (n_paths < 2 && t > 0.0) throw DomainError("semigroup_cauchy needs at least two paths");

    const std::size_t nx = x_grid.size();
    SemigroupCauchy out;
    out.function = f.name();
    out.t = t;
    out.x_grid = x_grid;
    out.values.assign(nx, 0.0);
    out.ses.assign(nx, 0.0);

    // samples[r * nx + j] = f(X_t^{(x_j)}) in realization r; NaN when capped
    std::vector<double> samples;
    std::size_t n_real = 0;
    if (t == 0.0) {
        for (std::size_t j = 0; j < nx; ++j) out.values[j] = f(x_grid[j]);
    } else {
        SimConfig cfg = config;
        cfg.t_max = t;
        cfg.observation_times = {t};
        cfg.thresholds.clear();
        cfg.stop_when_crossed = false;
        cfg.record_stride = kRecordEndpointsOnly;
        cfg.check(x_grid.back());

        n_real = n_paths;
        samples.assign(n_real * nx, kNaN);
        const auto certificate = validate(spec, x_grid, cfg.x_cap);
        out.coupled = certificate.gamma2_monotone;
        if (out.coupled) {
            const auto stream = stream_id(kTagSemigroup, 0.0);
            parallel_for(n_real, workers, [&](std::size_t r) {
                const auto flow = simulate_flow(spec, certificate, x_grid, cfg, r, stream);
                for (std::size_t j = 0; j < nx; ++j) {
                    const double v = flow.paths[j].observations[0];
                    if (std::isfinite(v)) samples[r * nx + j] = f(v);
                }
            });
        } else {
            for (std::size_t j = 0; j < nx; ++j) {
                const auto stream = stream_id(kTagSemigroup, x_grid[j]);
                parallel_for(n_real, workers, [&](std::size_t r) {
                    const Path p = simulate_path(spec, x_grid[j], cfg, r, stream);
                    const double v = p.observations[0];
                    if (std::isfinite(v)) samples[r * nx + j] = f(v);
                });
            }
        }
        for (std::size_t j = 0; j < nx; ++j) {
            std::vector<double> column(n_real);
            for (std::size_t r = 0; r < n_real; ++r) column[r] = samples[r * nx + j];
            const auto m = moments(column);
            out.values[j] = m.mean;
            out.ses[j] = m.se;
        }
    }

    for (std::size_t j = 0; j + 1 < nx; ++j) {
        CauchyRow row;
        row.x_low = x_grid[j];
        row.x_high = x_grid[j + 1];
        row.difference = std::abs(out.values[j + 1] - out.values[j]);
        row.joint_se = std::hypot(out.ses[j], out.ses[j + 1]);
        if (n_real > 0) {
            std::vector<double> diffs(n_real);
            for (std::size_t r = 0; r < n_real; ++r) {
                diffs[r] = samples[r * nx + j + 1] - samples[r * nx + j];
            }
            row.paired_se = moments(diffs).se;
        }
        out.rows.push_back(row);
    }
    const std::size_t first = out.rows.size() > 3 ? out.rows.size() - 3 : 0;
    out.tail_decreasing = !out.rows.empty();
    for (std::size_t j = first + 1; j < out.rows.size(); ++j) {
        if (!(out.rows[j].difference < out.rows[j - 1].difference)) out.tail_decreasing = false;
    }
    return out;
}

MomentConvergence moment_convergence(const ProcessSpec& spec, const MomentFunction& h, double b,
                                     const std::vector<double>& x_grid, const SimConfig& config,
                                     std::size_t n_paths, unsigned workers) {
    require_increasing(x_grid, "x_grid");
    if (!(b > 0.0 && b < x_grid.front())) {
        throw DomainError("moment convergence needs 0 < b < min(x_grid)");
    }
    const int* power = std::get_if<int>(&h);
    if (power && (*power < 1 || *power > 3)) {
        throw DomainError("moment convergence supports powers 1, 2 and 3");
    }

    MomentConvergence out;
    out.function = power ? "power(" + std::to_string(*power) + ")" : std::get<TestFunction>(h).name();
    out.b = b;
    out.x_grid = x_grid;
    for (double x : x_grid) {
        const auto passage = estimate_passage(spec, x, b, config, n_paths, workers,
                                              stream_id(kTagPassageGrid, x));
        std::vector<double> values(passage.samples.size(), kNaN);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double s = passage.samples[i];
            if (std::isnan(s)) continue;
            values[i] = power ? std::pow(s, *power) : std::get<TestFunction>(h)(s);
        }
        const auto m = moments(values);
        out.means.push_back(m.mean);
        out.ses.push_back(m.se);
        out.censored.push_back(passage.censored_fraction);
        out.flagged.push_back(passage.censored_fraction > kFlagCensoring);
        if (power && passage.censored_fraction > kUnboundedCensoring) out.inconclusive = true;
    }
    out.plateau = detect_plateau(out.means, out.ses, out.flagged);
    return out;
}

FddConvergence fdd_convergence(const ProcessSpec& spec, const std::vector<double>& times,
                               const std::vector<double>& x_grid, double x_ref,
                               const SimConfig& config, std::size_t n_paths, unsigned workers) {
    require_increasing(x_grid, "x_grid");
    require_increasing(times, "times");
    if (!(x_ref >= x_grid.back())) throw DomainError("fdd convergence needs x_ref >= max(x_grid)");
    if (times.back() > config.t_max) throw DomainError("fdd times must lie in (0, t_max]");
    if (n_paths == 0) throw DomainError("fdd convergence needs at least one path");

    SimConfig cfg = config;
    cfg.observation_times = times;
    cfg.thresholds.clear();
    cfg.stop_when_crossed = false;
    cfg.record_stride = kRecordEndpointsOnly;
    cfg.check(x_ref);

    const std::size_t nt = times.size();
    // states[i * nt + k] = X_{t_k} on path i; NaN when capped
    auto sample = [&](double x, std::uint64_t stream) {
        std::vector<double> states(n_paths * nt, kNaN);
        parallel_for(n_paths, workers, [&](std::size_t i) {
            const Path p = simulate_path(spec, x, cfg, i, stream);
            for (std::size_t k = 0; k < nt; ++k) {
                if (std::isfinite(p.observations[k])) states[i * nt + k] = p.observations[k];
            }
        });
        return states;
    };
    auto column = [&](const std::vector<double>& states, std::size_t k, bool mapped) {
        std::vector<double> c(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            c[i] = mapped ? std::exp(-states[i * nt + k]) : states[i * nt + k];
        }
        return c;
    };

    const auto reference = sample(x_ref, stream_id(kTagFddReference, x_ref));
    FddConvergence out;
    out.times = times;
    out.x_grid = x_grid;
    out.x_ref = x_ref;
    for (double x : x_grid) {
        const auto mapped = sample(x, stream_id(kTagFdd, x));
        std::vector<FddCell> row;
        for (std::size_t k = 0; k < nt; ++k) {
            const auto ma = moments(column(mapped, k, true));
            const auto mr = moments(column(reference, k, true));
            FddCell cell;
            cell.x = x;
            cell.time = times[k];
            cell.n = ma.n;
            cell.n_ref = mr.n;
            // KS is invariant under the decreasing map e^{-x}; taking it on the
            // states keeps distinct large values from underflowing into ties
            cell.ks = stats::ks_two_sample(column(mapped, k, false), column(reference, k, false));
            cell.rho_distance = std::abs(ma.mean - mr.mean);
            row.push_back(cell);
        }
        out.cells.push_back(std::move(row));
    }

    out.threshold = 1.5 * stats::ks_critical(0.05, n_paths, n_paths);
    for (std::size_t k = 0; k < nt; ++k) {
        bool dec = true;
        bool nondec = true;
        for (std::size_t j = 1; j < x_grid.size(); ++j) {
            const double prev = out.cells[j - 1][k].ks;
            const double cur = out.cells[j][k].ks;
            if (!(cur < prev)) dec = false;
            if (!(cur >= prev)) nondec = false;
        }
        out.decreasing.push_back(dec);
        out.non_decreasing.push_back(nondec);
        out.final_below_threshold.push_back(out.cells.back()[k].ks < out.threshold);
    }
    return out;
}

namespace stats {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    auto drop_nan = [](std::vector<double>& v) {
        v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }),
                v.end());
        std::sort(v.begin(), v.end());
    };
    drop_nan(a);
    drop_nan(b);
    if (a.empty() || b.empty()) return kNaN;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_coefficient(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("KS level must lie in (0, 1)");
    return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw DomainError("KS critical value needs nonempty samples");
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return ks_coefficient(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

}  // namespace stats

}  // namespace entrance
