#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "entrance/model.hpp"
#include "entrance/simulate.hpp"

namespace entrance {

struct ExpMoment {
    double theta = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    /// Censored paths contributed e^{theta t_max}; the estimate is then only a
    /// lower bound.
    bool lower_bound = false;
};

struct PassageEstimate {
    double b = 0.0;
    double x0 = 0.0;
    double t_max = 0.0;
    std::size_t n_paths = 0;
    std::optional<double> mean;  // over crossed paths; absent when none crossed
    double se = 0.0;
    double censored_fraction = 0.0;
    /// Step function of the empirical CDF: (0, P(T <= 0)), one point per
    /// distinct crossing time, and (t_max, 1 - censored_fraction).
    std::vector<std::pair<double, double>> cdf;
    std::optional<ExpMoment> exp_moment;
    /// T_b per path in index order; NaN for censored (or capped) paths.
    std::vector<double> samples;

    /// Empirical P(T_b <= t).
    double cdf_at(double t) const;
};

/// Paths of stream `stream` with b registered as the only threshold.
/// Throws DomainError unless 0 < b < x0.
PassageEstimate estimate_passage(const ProcessSpec& spec, double x0, double b,
                                 const SimConfig& config, std::size_t n_paths,
                                 unsigned workers = 1, std::uint64_t stream = 0);

/// Passage summary from precomputed per-path crossing times (NaN = censored).
PassageEstimate summarize_passage(double x0, double b, double t_max, std::vector<double> samples);

struct MarkovDecomposition {
    double lhs = 0.0;     // E_x T_b
    double lhs_se = 0.0;
    double rhs = 0.0;     // E_x T_mid + E_mid T_b
    double rhs_se = 0.0;
    double z_score = 0.0; // NaN when the joint SE vanishes
    bool degenerate = false;   // joint SE is zero (deterministic legs)
    bool inconclusive = false; // some leg censored above 5%
    double censored_fraction[3] = {0.0, 0.0, 0.0};  // legs x->b, x->mid, mid->b
};

/// Three independent ensembles. Throws DomainError unless b < x_mid < x.
MarkovDecomposition markov_decomposition_check(const ProcessSpec& spec, double x, double x_mid,
                                               double b, const SimConfig& config,
                                               std::size_t n_paths, unsigned workers = 1);

/// Mean of e^{theta T_b}; censored paths enter as e^{theta t_max}.
/// Throws DomainError unless theta > 0.
ExpMoment estimate_exp_moment(const ProcessSpec& spec, double x0, double b, double theta,
                              const SimConfig& config, std::size_t n_paths, unsigned workers = 1,
                              std::uint64_t stream = 0);

ExpMoment exp_moment_of(const PassageEstimate& passage, double theta);

struct TailFit {
    double t_unit = 0.0;
    std::vector<double> alpha_hat;  // P(T_b > n t_unit), n = 1..n_max
    double slope = 0.0;             // least squares on log alpha_hat over positive entries; NaN if < 2
    double slack = 0.0;             // 3 binomial SE of alpha_hat[0] on the log scale
    bool degenerate = false;        // alpha_hat[0] == 0
    bool consistent = false;        // slope <= log alpha_hat[0] + slack
};

/// Needs t_unit > 0, n_max >= 3 and config.t_max >= n_max * t_unit.
TailFit tail_geometric_fit(const ProcessSpec& spec, double x0, double b, double t_unit,
                           std::size_t n_max, const SimConfig& config, std::size_t n_paths,
                           unsigned workers = 1, std::uint64_t stream = 0);

TailFit tail_fit_of(const PassageEstimate& passage, double t_unit, std::size_t n_max);

}  // namespace entrance
