#include "entrance/coupling.hpp"

#include <cmath>

#include "entrance/errors.hpp"
#include "entrance/parallel.hpp"

namespace entrance {

namespace {

void check_flow_preconditions(const ValidationReport& certificate,
                              std::span<const double> initial_values) {
    if (!certificate.gamma2_monotone) {
        throw PreconditionError(
            "coupled flows need gamma2 certified nondecreasing by validation");
    }
    if (initial_values.empty()) throw DomainError("flow needs at least one initial value");
    for (std::size_t i = 1; i < initial_values.size(); ++i) {
        if (initial_values[i] < initial_values[i - 1]) {
            throw DomainError("flow initial values must be sorted increasingly");
        }
    }
}

std::size_t count_crossing_inversions(const std::vector<Path>& paths) {
    std::size_t bad = 0;
    for (std::size_t k = 1; k < paths.size(); ++k) {
        for (const auto& [level, lower_time] : paths[k - 1].crossings) {
            auto upper = paths[k].crossing_time(level);
            // the higher start must not come down earlier than the lower one
            if (upper && *upper < lower_time) ++bad;
        }
        for (const auto& [level, upper_time] : paths[k].crossings) {
            if (!paths[k - 1].crossing_time(level)) ++bad;
        }
    }
    return bad;
}

}  // namespace

FlowEnsemble simulate_flow(const ProcessSpec& spec, const ValidationReport& certificate,
                           std::span<const double> initial_values, const SimConfig& config,
                           std::uint64_t realization, std::uint64_t stream) {
    check_flow_preconditions(certificate, initial_values);
    auto run = detail::run_lockstep(spec, initial_values, config,
                                    StreamKey{config.seed, stream}, realization, true);
    FlowEnsemble flow;
    flow.initial_values.assign(initial_values.begin(), initial_values.end());
    flow.paths = std::move(run.paths);
    flow.realization = realization;
    flow.violations = std::move(run.violations);
    flow.crossing_order_violations = count_crossing_inversions(flow.paths);
    return flow;
}

std::vector<FlowEnsemble> simulate_flows(const ProcessSpec& spec,
                                         const ValidationReport& certificate,
                                         std::span<const double> initial_values,
                                         const SimConfig& config, std::size_t n_realizations,
                                         unsigned workers, std::uint64_t stream) {
    check_flow_preconditions(certificate, initial_values);
    std::vector<FlowEnsemble> flows(n_realizations);
    parallel_for(n_realizations, workers, [&](std::size_t r) {
        flows[r] = simulate_flow(spec, certificate, initial_values, config, r, stream);
    });
    return flows;
}

GronwallResult gronwall_check(const ProcessSpec& spec, const ValidationReport& certificate,
                              std::optional<double> theta, double x, double y, double t,
                              std::size_t n_realizations, const SimConfig& config,
                              unsigned workers, std::uint64_t stream) {
    if (!theta) {
        throw PreconditionError("gronwall_check needs a one-sided Lipschitz constant theta");
    }
    if (!(x <= y)) throw DomainError("gronwall_check needs x <= y");
    if (!(t >= 0.0)) throw DomainError("gronwall_check needs t >= 0");
    if (n_realizations < 2) throw DomainError("gronwall_check needs at least two realizations");

    SimConfig cfg = config;
    cfg.t_max = t;
    cfg.observation_times = {t};
    cfg.thresholds.clear();
    cfg.stop_when_crossed = false;
    cfg.record_stride = kRecordEndpointsOnly;

    const double starts[] = {x, y};
    std::vector<double> gaps(n_realizations, std::nan(""));
    check_flow_preconditions(certificate, starts);
    parallel_for(n_realizations, workers, [&](std::size_t r) {
        const auto flow = simulate_flow(spec, certificate, starts, cfg, r, stream);
        const double lo = flow.paths[0].observations[0];
        const double hi = flow.paths[1].observations[0];
        if (std::isfinite(lo) && std::isfinite(hi)) gaps[r] = std::abs(hi - lo);
    });

    GronwallResult out;
    out.theta = *theta;
    out.rhs = std::exp(*theta * t) * (y - x);
    double mean = 0.0;
    double m2 = 0.0;
    for (double g : gaps) {
        if (!std::isfinite(g)) continue;
        ++out.used;
        const double delta = g - mean;
        mean += delta / static_cast<double>(out.used);
        m2 += delta * (g - mean);
    }
    if (out.used == 0) throw NumericalError("every coupled realization was capped", x);
    out.lhs_mean = mean;
    out.lhs_se = out.used > 1 ? std::sqrt(m2 / static_cast<double>(out.used - 1) /
                                          static_cast<double>(out.used))
                              : 0.0;
    out.pass = out.lhs_mean - 3.0 * out.lhs_se <= out.rhs;
    return out;
}

}  // namespace entrance
