#include "entrance/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "entrance/errors.hpp"
#include "entrance/parallel.hpp"

namespace entrance {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOrderTolerance = 1e-12;

struct Coefficients {
    double g0;
    double g1;
    double g2;
};

Coefficients coefficients_at(const ProcessSpec& spec, double x) {
    return {spec.gamma0(x), spec.gamma1(x), spec.gamma2(x)};
}

double adaptive_factor(double x, const Coefficients& c, const SchemeConstants& scheme) {
    // The numerator is floored at one state unit; with a bare x the step
    // shrinks geometrically near 0 and the path never reaches it.
    const double denom = std::abs(c.g0) + c.g2 * scheme.m1 + std::sqrt(std::max(c.g1, 0.0)) + 1.0;
    return std::min(1.0, std::max(x, 1.0) / denom);
}

StepResult apply_step(double x, const Coefficients& c, double dt_eff, const NoiseSlice& noise,
                      const SchemeConstants& scheme) {
    if (c.g1 < 0.0 || c.g2 < 0.0) {
        std::ostringstream os;
        os << "negative diffusion or jump modulation at x = " << x;
        throw SpecError(os.str());
    }
    double next = x + (c.g0 - c.g2 * scheme.m1) * dt_eff + std::sqrt(c.g1 * dt_eff) * noise.brownian;
    if (scheme.mode == SmallJumpMode::Gaussian && scheme.v > 0.0) {
        next += std::sqrt(c.g2 * scheme.v * dt_eff) * noise.small_jump;
    }
    // Clamp the continuous part before adding jumps. x + a sqrt(x) decreases
    // only where it is already negative, so the clamped map is monotone in x;
    // clamping after the jumps would let a jump lift the non-monotone branch.
    const bool clamped = next < 0.0;
    if (clamped) next = 0.0;
    for (const auto& mark : noise.marks) {
        if (mark.u <= c.g2) next += mark.size;
    }
    if (!std::isfinite(next)) {
        std::ostringstream os;
        os << "non-finite state after a step from x = " << x;
        throw NumericalError(os.str(), x);
    }
    return {next, clamped};
}

/// Jump sizes from nu restricted to [eps, inf), normalized.
class JumpSizeSampler {
public:
    JumpSizeSampler(const LevyMeasure& nu, double eps) : nu_(nu), eps_(eps) {
        if (auto atoms = nu.as<FiniteAtomsMeasure>()) {
            double acc = 0.0;
            for (const auto& a : atoms->atoms) {
                if (a.size >= eps) {
                    acc += a.rate;
                    cumulative_.push_back(acc);
                    sizes_.push_back(a.size);
                }
            }
        }
    }

    double operator()(CounterStream& rs) const {
        const double u = rs.uniform_open();
        if (auto m = nu_.as<StableMeasure>()) return eps_ * std::pow(u, -1.0 / m->alpha);
        if (auto m = nu_.as<TruncatedStableMeasure>()) {
            const double lo = std::pow(eps_, -m->alpha);
            const double hi = std::pow(m->z_max, -m->alpha);
            return std::pow(lo - u * (lo - hi), -1.0 / m->alpha);
        }
        const double target = u * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                             sizes_.size() - 1);
        return sizes_[i];
    }

private:
    const LevyMeasure& nu_;
    double eps_;
    std::vector<double> cumulative_;
    std::vector<double> sizes_;
};

NoiseSlice draw_noise_impl(const JumpSizeSampler& sampler, const SchemeConstants& scheme,
                           const StreamKey& key, std::uint64_t path_index,
                           std::uint32_t step_index, double t, double dt_eff, double u_dom) {
    CounterStream rs(key, path_index, step_index);
    NoiseSlice noise;
    std::normal_distribution<double> normal;
    noise.brownian = normal(rs);
    noise.small_jump = normal(rs);
    noise.u_dom = u_dom;
    const double rate = u_dom * scheme.tail_mass * dt_eff;
    if (rate > 0.0) {
        std::poisson_distribution<long long> poisson(rate);
        const long long count = poisson(rs);
        noise.marks.reserve(static_cast<std::size_t>(count));
        for (long long k = 0; k < count; ++k) {
            JumpMark mark;
            mark.time = t + dt_eff * rs.uniform_open();
            mark.size = sampler(rs);
            mark.u = u_dom * rs.uniform_open();
            noise.marks.push_back(mark);
        }
        std::sort(noise.marks.begin(), noise.marks.end(),
                  [](const JumpMark& a, const JumpMark& b) { return a.time < b.time; });
    }
    return noise;
}

struct Member {
    double x = 0.0;
    bool live = true;
    bool absorbed = false;
    bool capped = false;
    Path path;
};

}  // namespace

void SimConfig::check(double largest_start) const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(dt)) throw DomainError("sim.dt must be > 0");
    if (!positive(eps)) throw DomainError("sim.eps must be > 0");
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw DomainError("sim.t_max must be >= 0");
    if (!positive(x_cap)) throw DomainError("sim.x_cap must be > 0");
    if (record_stride == 0) throw DomainError("sim.record_stride must be >= 1");
    if (!(largest_start < x_cap)) throw DomainError("initial value must be below sim.x_cap");
    for (double b : thresholds) {
        if (!std::isfinite(b)) throw DomainError("thresholds must be finite");
    }
    for (double s : observation_times) {
        if (!(s >= 0.0 && s <= t_max)) {
            throw DomainError("observation times must lie in [0, t_max]");
        }
    }
}

SchemeConstants SchemeConstants::from(const LevyMeasure& nu, const SimConfig& config) {
    SchemeConstants s;
    const auto moments = nu_partial_moments(nu, config.eps);
    s.m1 = moments.m1;
    s.v = moments.v;
    s.tail_mass = nu_tail_mass(nu, config.eps);
    s.mode = config.small_jump_mode;
    return s;
}

StepResult step(const ProcessSpec& spec, double x, double dt_eff, const NoiseSlice& noise,
                const SchemeConstants& scheme) {
    return apply_step(x, coefficients_at(spec, x), dt_eff, noise, scheme);
}

double adaptive_step(const ProcessSpec& spec, double x, double dt, const SchemeConstants& scheme) {
    return dt * adaptive_factor(x, coefficients_at(spec, x), scheme);
}

NoiseSlice draw_noise(const LevyMeasure& nu, const SchemeConstants& scheme, double eps,
                      const StreamKey& key, std::uint64_t path_index, std::uint32_t step_index,
                      double t, double dt_eff, double u_dom) {
    const JumpSizeSampler sampler(nu, eps);
    return draw_noise_impl(sampler, scheme, key, path_index, step_index, t, dt_eff, u_dom);
}

namespace detail {

LockstepResult run_lockstep(const ProcessSpec& spec, std::span<const double> starts,
                            const SimConfig& config, const StreamKey& key,
                            std::uint64_t path_index, bool flow_mode) {
    if (starts.empty()) throw DomainError("at least one initial value is required");
    double largest = 0.0;
    for (double x0 : starts) {
        if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("initial values must be >= 0");
        largest = std::max(largest, x0);
    }
    config.check(largest);
    check_tables_cover(spec, config.x_cap);

    const SchemeConstants scheme = SchemeConstants::from(spec.nu, config);
    const JumpSizeSampler sampler(spec.nu, config.eps);
    const bool absorbing = spec.zero_is_absorbing();

    std::vector<double> thresholds = config.thresholds;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::vector<double> obs_times = config.observation_times;
    std::sort(obs_times.begin(), obs_times.end());

    std::vector<Member> members(starts.size());
    for (std::size_t k = 0; k < starts.size(); ++k) {
        Member& m = members[k];
        m.x = starts[k];
        m.path.times.push_back(0.0);
        m.path.values.push_back(m.x);
        m.path.observations.assign(config.observation_times.size(), kNaN);
        for (double b : thresholds) {
            if (m.x < b) m.path.crossings.emplace(b, 0.0);
        }
        if (m.x == 0.0) {
            m.path.hit_zero_at = 0.0;
            if (absorbing) {
                m.live = false;
                m.absorbed = true;
            }
        }
    }

    // Observation slots are reported in the caller's order.
    auto observe = [&](double time) {
        for (std::size_t j = 0; j < config.observation_times.size(); ++j) {
            if (config.observation_times[j] != time) continue;
            for (auto& m : members) {
                m.path.observations[j] = m.capped ? kNaN : m.x;
            }
        }
    };
    auto all_crossed = [&] {
        return std::all_of(members.begin(), members.end(), [&](const Member& m) {
            return m.path.crossings.size() == thresholds.size();
        });
    };

    double t = 0.0;
    std::size_t next_obs = 0;
    while (next_obs < obs_times.size() && obs_times[next_obs] <= 0.0) {
        observe(obs_times[next_obs]);
        ++next_obs;
    }

    std::vector<Coefficients> coeffs(members.size());
    std::vector<OrderViolation> violations;
    std::uint64_t n = 0;
    bool stopped_early = false;

    while (t < config.t_max) {
        if (config.stop_when_crossed && all_crossed()) {
            stopped_early = true;
            break;
        }
        bool any_live = false;
        double u_dom = 0.0;
        double dt_eff = config.dt;
        for (std::size_t k = 0; k < members.size(); ++k) {
            Member& m = members[k];
            if (!m.live) continue;
            any_live = true;
            coeffs[k] = coefficients_at(spec, m.x);
            u_dom = std::max(u_dom, coeffs[k].g2);
            if (config.adaptive) {
                dt_eff = std::min(dt_eff, config.dt * adaptive_factor(m.x, coeffs[k], scheme));
            }
        }
        if (!any_live) break;
        if (n >= config.max_steps || n >= std::numeric_limits<std::uint32_t>::max()) {
            for (auto& m : members) {
                if (m.live) m.path.error = "step budget exhausted";
            }
            break;
        }

        const double target =
            next_obs < obs_times.size() ? std::min(config.t_max, obs_times[next_obs]) : config.t_max;
        bool landing = false;
        if (t + dt_eff >= target) {
            dt_eff = target - t;
            landing = true;
        }

        const NoiseSlice noise = draw_noise_impl(sampler, scheme, key, path_index,
                                                 static_cast<std::uint32_t>(n), t, dt_eff, u_dom);
        const double t_next = landing ? target : t + dt_eff;

        for (std::size_t k = 0; k < members.size(); ++k) {
            Member& m = members[k];
            if (!m.live) continue;
            const double prev = m.x;
            StepResult r{};
            try {
                r = apply_step(prev, coeffs[k], dt_eff, noise, scheme);
            } catch (const NumericalError& e) {
                m.path.error = e.what();
                m.path.capped_at = t_next;
                m.live = false;
                m.capped = true;
                if (flow_mode) m.x = config.x_cap;
                continue;
            }
            if (r.value > config.x_cap) {
                m.path.capped_at = t_next;
                m.live = false;
                m.capped = true;
                if (flow_mode) m.x = config.x_cap;
                continue;
            }
            m.x = r.value;
            for (double b : thresholds) {
                if (b > prev) break;  // crossed at an earlier step (or at 0)
                if (m.x < b && !m.path.crossings.contains(b)) {
                    const double frac = (prev - b) / (prev - m.x);
                    m.path.crossings.emplace(b, t + dt_eff * frac);
                }
            }
            if (m.x == 0.0) {
                if (!m.path.hit_zero_at) m.path.hit_zero_at = t_next;
                if (absorbing) {
                    m.live = false;
                    m.absorbed = true;
                }
            }
            ++m.path.steps;
        }

        t = t_next;
        ++n;
        if (landing) {
            while (next_obs < obs_times.size() && obs_times[next_obs] <= t) {
                observe(obs_times[next_obs]);
                ++next_obs;
            }
        }
        if (n % config.record_stride == 0) {
            for (auto& m : members) {
                if (m.capped && !flow_mode) continue;
                m.path.times.push_back(t);
                m.path.values.push_back(m.x);
            }
        }
        if (flow_mode) {
            for (std::size_t k = 1; k < members.size(); ++k) {
                const double excess = members[k - 1].x - members[k].x;
                if (starts[k - 1] <= starts[k] && excess > kOrderTolerance) {
                    violations.push_back({t, k - 1, k, excess});
                }
            }
        }
    }

    // Members that all stopped (absorbed or capped) are carried to the horizon.
    double t_end = t;
    if (!stopped_early && t < config.t_max) {
        const bool none_live =
            std::none_of(members.begin(), members.end(), [](const Member& m) { return m.live; });
        if (none_live) {
            t_end = config.t_max;
            while (next_obs < obs_times.size()) {
                observe(obs_times[next_obs]);
                ++next_obs;
            }
        }
    }
    for (auto& m : members) {
        if (m.capped && !flow_mode) continue;
        if (m.path.times.back() != t_end) {
            m.path.times.push_back(t_end);
            m.path.values.push_back(m.x);
        }
    }
    LockstepResult out;
    out.paths.reserve(members.size());
    for (auto& m : members) out.paths.push_back(std::move(m.path));
    out.violations = std::move(violations);
    return out;
}

}  // namespace detail

Path simulate_path(const ProcessSpec& spec, double x0, const SimConfig& config,
                   std::uint64_t path_index, std::uint64_t stream) {
    const double start[] = {x0};
    auto result = detail::run_lockstep(spec, start, config, StreamKey{config.seed, stream},
                                       path_index, false);
    return std::move(result.paths.front());
}

EnsembleSummary summarize(std::span<const Path> paths, const SimConfig& config) {
    EnsembleSummary s;
    for (std::size_t j = 0; j < config.observation_times.size(); ++j) {
        MomentPoint p{config.observation_times[j], 0, kNaN, kNaN};
        double mean = 0.0;
        double m2 = 0.0;
        for (const auto& path : paths) {
            const double v = path.observations[j];
            if (!std::isfinite(v)) continue;
            ++p.count;
            const double delta = v - mean;
            mean += delta / static_cast<double>(p.count);
            m2 += delta * (v - mean);
        }
        if (p.count > 0) p.mean = mean;
        if (p.count > 1) p.variance = m2 / static_cast<double>(p.count - 1);
        s.moments.push_back(p);
    }
    std::vector<double> levels = config.thresholds;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double b : levels) {
        CrossingStats c{b, 0, paths.size(), kNaN, kNaN};
        double mean = 0.0;
        double m2 = 0.0;
        for (const auto& path : paths) {
            auto tb = path.crossing_time(b);
            if (!tb) continue;
            ++c.crossed;
            const double delta = *tb - mean;
            mean += delta / static_cast<double>(c.crossed);
            m2 += delta * (*tb - mean);
        }
        if (c.crossed > 0) {
            c.mean = mean;
            c.se = c.crossed > 1 ? std::sqrt(m2 / static_cast<double>(c.crossed - 1) /
                                             static_cast<double>(c.crossed))
                                 : 0.0;
        }
        s.crossings.push_back(c);
    }
    for (const auto& path : paths) {
        if (path.capped_at) ++s.capped;
        if (!path.error.empty()) ++s.errors;
    }
    return s;
}

PathEnsemble simulate_ensemble(const ProcessSpec& spec, double x0, const SimConfig& config,
                               std::size_t n_paths, unsigned workers, std::uint64_t stream) {
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    config.check(x0);
    check_tables_cover(spec, config.x_cap);
    PathEnsemble ens;
    ens.x0 = x0;
    ens.paths.resize(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        ens.paths[i] = simulate_path(spec, x0, config, i, stream);
    });
    ens.summary = summarize(ens.paths, config);
    return ens;
}

}  // namespace entrance
