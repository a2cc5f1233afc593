#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "entrance/model.hpp"
#include "entrance/simulate.hpp"

namespace entrance {

/// One realization of the flow x -> X^{(x)}: every member is driven by the
/// same Brownian increments and the same (time, size, u) jump marks, and
/// accepts a mark iff u <= gamma2(own state).
struct FlowEnsemble {
    std::vector<double> initial_values;
    std::vector<Path> paths;  // one per initial value, identical time lists
    std::uint64_t realization = 0;
    std::vector<detail::OrderViolation> violations;
    /// Pairs (lower start, higher start) whose crossing times of a registered
    /// threshold come out in the wrong order.
    std::size_t crossing_order_violations = 0;

    std::size_t order_violations() const noexcept { return violations.size(); }
};

/// Throws PreconditionError unless the report certifies gamma2 nondecreasing,
/// DomainError unless initial values are nondecreasing.
FlowEnsemble simulate_flow(const ProcessSpec& spec, const ValidationReport& certificate,
                           std::span<const double> initial_values, const SimConfig& config,
                           std::uint64_t realization, std::uint64_t stream = 0);

/// Realizations 0..n-1; output independent of the worker count.
std::vector<FlowEnsemble> simulate_flows(const ProcessSpec& spec,
                                         const ValidationReport& certificate,
                                         std::span<const double> initial_values,
                                         const SimConfig& config, std::size_t n_realizations,
                                         unsigned workers = 1, std::uint64_t stream = 0);

struct GronwallResult {
    double theta = 0.0;
    double lhs_mean = 0.0;  // estimate of E|X_t^{(y)} - X_t^{(x)}|
    double lhs_se = 0.0;
    double rhs = 0.0;       // e^{theta t} (y - x)
    std::size_t used = 0;   // realizations without capping
    bool pass = false;      // lhs_mean - 3 se <= rhs
};

/// Mean coupled gap against the one-sided Lipschitz bound. theta absent is a
/// PreconditionError.
GronwallResult gronwall_check(const ProcessSpec& spec, const ValidationReport& certificate,
                              std::optional<double> theta, double x, double y, double t,
                              std::size_t n_realizations, const SimConfig& config,
                              unsigned workers = 1, std::uint64_t stream = 0);

}  // namespace entrance
