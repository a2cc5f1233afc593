#include "entrance/passage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "entrance/errors.hpp"
#include "entrance/parallel.hpp"
#include "entrance/rng.hpp"

namespace entrance {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags of the three decomposition legs; kept apart from the tags used
// by the diagnostics so the legs are independent of every other experiment.
constexpr std::uint64_t kTagLegFull = 0x4d41524b01;
constexpr std::uint64_t kTagLegUpper = 0x4d41524b02;
constexpr std::uint64_t kTagLegLower = 0x4d41524b03;

SimConfig passage_config(const SimConfig& config, double b) {
    SimConfig cfg = config;
    cfg.thresholds = {b};
    cfg.observation_times.clear();
    cfg.stop_when_crossed = true;
    cfg.record_stride = kRecordEndpointsOnly;
    return cfg;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

template <class Range>
MeanSe mean_se(const Range& values) {
    MeanSe out;
    double m2 = 0.0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        ++out.n;
        const double d = v - out.mean;
        out.mean += d / static_cast<double>(out.n);
        m2 += d * (v - out.mean);
    }
    if (out.n > 1) {
        out.se = std::sqrt(m2 / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
    }
    return out;
}

}  // namespace

double PassageEstimate::cdf_at(double t) const {
    double p = 0.0;
    for (const auto& [time, value] : cdf) {
        if (time > t) break;
        p = value;
    }
    return p;
}

PassageEstimate summarize_passage(double x0, double b, double t_max, std::vector<double> samples) {
    PassageEstimate est;
    est.b = b;
    est.x0 = x0;
    est.t_max = t_max;
    est.n_paths = samples.size();
    est.samples = std::move(samples);

    const auto stats = mean_se(est.samples);
    const double n = static_cast<double>(est.n_paths);
    if (stats.n > 0) {
        est.mean = stats.mean;
        est.se = stats.se;
    }
    est.censored_fraction = est.n_paths == 0 ? 0.0 : static_cast<double>(est.n_paths - stats.n) / n;

    std::vector<double> crossed;
    crossed.reserve(stats.n);
    for (double v : est.samples) {
        if (!std::isnan(v)) crossed.push_back(v);
    }
    std::sort(crossed.begin(), crossed.end());
    std::size_t at_zero = 0;
    while (at_zero < crossed.size() && crossed[at_zero] <= 0.0) ++at_zero;
    est.cdf.emplace_back(0.0, n > 0 ? static_cast<double>(at_zero) / n : 0.0);
    for (std::size_t i = at_zero; i < crossed.size(); ++i) {
        if (i + 1 < crossed.size() && crossed[i + 1] == crossed[i]) continue;
        est.cdf.emplace_back(crossed[i], static_cast<double>(i + 1) / n);
    }
    const double final_p = n > 0 ? static_cast<double>(stats.n) / n : 0.0;
    if (est.cdf.back().first < t_max) {
        est.cdf.emplace_back(t_max, final_p);
    } else {
        est.cdf.back().second = final_p;
    }
    return est;
}

PassageEstimate estimate_passage(const ProcessSpec& spec, double x0, double b,
                                 const SimConfig& config, std::size_t n_paths, unsigned workers,
                                 std::uint64_t stream) {
    if (!(b > 0.0)) throw DomainError("passage threshold b must be positive");
    if (!(b < x0)) throw DomainError("passage needs b < x0 (T_b is 0 otherwise)");
    if (n_paths == 0) throw DomainError("passage needs at least one path");
    const SimConfig cfg = passage_config(config, b);
    cfg.check(x0);

    std::vector<double> samples(n_paths, kNaN);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const Path path = simulate_path(spec, x0, cfg, i, stream);
        if (auto t = path.crossing_time(b)) samples[i] = *t;
    });
    return summarize_passage(x0, b, cfg.t_max, std::move(samples));
}

MarkovDecomposition markov_decomposition_check(const ProcessSpec& spec, double x, double x_mid,
                                               double b, const SimConfig& config,
                                               std::size_t n_paths, unsigned workers) {
    if (!(b < x_mid && x_mid < x)) {
        throw DomainError("markov decomposition needs b < x_mid < x");
    }
    const auto full = estimate_passage(spec, x, b, config, n_paths, workers,
                                       stream_id(kTagLegFull, x));
    const auto upper = estimate_passage(spec, x, x_mid, config, n_paths, workers,
                                        stream_id(kTagLegUpper, x));
    const auto lower = estimate_passage(spec, x_mid, b, config, n_paths, workers,
                                        stream_id(kTagLegLower, x_mid));

    MarkovDecomposition out;
    out.censored_fraction[0] = full.censored_fraction;
    out.censored_fraction[1] = upper.censored_fraction;
    out.censored_fraction[2] = lower.censored_fraction;
    out.inconclusive = std::any_of(std::begin(out.censored_fraction),
                                   std::end(out.censored_fraction),
                                   [](double c) { return c > 0.05; });
    if (!full.mean || !upper.mean || !lower.mean) {
        out.inconclusive = true;
        out.lhs = out.rhs = out.z_score = kNaN;
        return out;
    }
    out.lhs = *full.mean;
    out.lhs_se = full.se;
    out.rhs = *upper.mean + *lower.mean;
    out.rhs_se = std::hypot(upper.se, lower.se);
    const double joint = std::hypot(out.lhs_se, out.rhs_se);
    if (joint > 0.0) {
        out.z_score = (out.lhs - out.rhs) / joint;
    } else {
        out.degenerate = true;
        out.z_score = kNaN;
    }
    return out;
}

ExpMoment exp_moment_of(const PassageEstimate& passage, double theta) {
    if (!(theta > 0.0)) throw DomainError("exponential moment needs theta > 0");
    std::vector<double> values(passage.samples.size());
    ExpMoment out;
    out.theta = theta;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double t = passage.samples[i];
        if (std::isnan(t)) {
            out.lower_bound = true;
            values[i] = std::exp(theta * passage.t_max);
        } else {
            values[i] = std::exp(theta * t);
        }
    }
    const auto stats = mean_se(values);
    out.estimate = stats.mean;
    out.se = stats.se;
    return out;
}

ExpMoment estimate_exp_moment(const ProcessSpec& spec, double x0, double b, double theta,
                              const SimConfig& config, std::size_t n_paths, unsigned workers,
                              std::uint64_t stream) {
    if (!(theta > 0.0)) throw DomainError("exponential moment needs theta > 0");
    return exp_moment_of(estimate_passage(spec, x0, b, config, n_paths, workers, stream), theta);
}

TailFit tail_fit_of(const PassageEstimate& passage, double t_unit, std::size_t n_max) {
    if (!(t_unit > 0.0)) throw DomainError("tail fit needs t_unit > 0");
    if (n_max < 3) throw DomainError("tail fit needs n_max >= 3");
    if (passage.t_max < static_cast<double>(n_max) * t_unit * (1.0 - 1e-12)) {
        throw DomainError("tail fit needs t_max >= n_max * t_unit");
    }
    TailFit fit;
    fit.t_unit = t_unit;
    const double n = static_cast<double>(passage.n_paths);
    for (std::size_t k = 1; k <= n_max; ++k) {
        const double level = static_cast<double>(k) * t_unit;
        std::size_t beyond = 0;
        for (double t : passage.samples) {
            if (std::isnan(t) || t > level) ++beyond;
        }
        fit.alpha_hat.push_back(n > 0 ? static_cast<double>(beyond) / n : 0.0);
    }

    const double a1 = fit.alpha_hat.front();
    fit.degenerate = a1 == 0.0;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < fit.alpha_hat.size(); ++k) {
        if (fit.alpha_hat[k] <= 0.0) continue;
        const double xk = static_cast<double>(k + 1);
        const double yk = std::log(fit.alpha_hat[k]);
        sx += xk;
        sy += yk;
        sxx += xk * xk;
        sxy += xk * yk;
        ++m;
    }
    if (m >= 2) {
        const double mm = static_cast<double>(m);
        fit.slope = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
    } else {
        fit.slope = kNaN;
    }
    if (!fit.degenerate) {
        fit.slack = a1 < 1.0 ? 3.0 * std::sqrt((1.0 - a1) / (n * a1)) : 0.0;
        fit.consistent = std::isfinite(fit.slope) && fit.slope <= std::log(a1) + fit.slack;
    }
    return fit;
}

TailFit tail_geometric_fit(const ProcessSpec& spec, double x0, double b, double t_unit,
                           std::size_t n_max, const SimConfig& config, std::size_t n_paths,
                           unsigned workers, std::uint64_t stream) {
    if (!(t_unit > 0.0)) throw DomainError("tail fit needs t_unit > 0");
    if (n_max < 3) throw DomainError("tail fit needs n_max >= 3");
    if (config.t_max < static_cast<double>(n_max) * t_unit * (1.0 - 1e-12)) {
        throw DomainError("tail fit needs t_max >= n_max * t_unit");
    }
    return tail_fit_of(estimate_passage(spec, x0, b, config, n_paths, workers, stream), t_unit,
                       n_max);
}

}  // namespace entrance
