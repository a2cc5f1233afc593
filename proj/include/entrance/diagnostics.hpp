#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "entrance/model.hpp"
#include "entrance/simulate.hpp"

namespace entrance {

/// Bounded continuous functions on [0, inf] with a limit at infinity.
struct TestFunction {
    enum class Kind { ExpNeg, ExpNegScaled, BoundedRational };
    Kind kind = Kind::ExpNeg;
    double lambda = 1.0;  // ExpNegScaled only

    static TestFunction exp_neg() { return {Kind::ExpNeg, 1.0}; }
    static TestFunction exp_neg_scaled(double lambda);
    static TestFunction bounded_rational() { return {Kind::BoundedRational, 1.0}; }

    double operator()(double x) const;
    std::string name() const;
};

// Stream tags of the diagnostics. Profile and moment runs share a tag so
// moment_convergence with h(s) = s reproduces a profile column exactly.
inline constexpr std::uint64_t kTagPassageGrid = 0;
inline constexpr std::uint64_t kTagSemigroup = 0x53454d49;
inline constexpr std::uint64_t kTagFdd = 0x46444401;
inline constexpr std::uint64_t kTagFddReference = 0x46444402;

struct Plateau {
    std::optional<double> limit;  // mean at the largest usable x
    bool detected = false;
};

/// Plateau rule on the last three entries: pairwise gaps below
/// max(3 joint SE, 2% of the larger magnitude). Entries with flagged[i] set
/// make the rule fail.
Plateau detect_plateau(const std::vector<double>& means, const std::vector<double>& ses,
                       const std::vector<bool>& flagged);

struct EntranceProfile {
    std::vector<double> b_grid;
    std::vector<double> x_grid;
    double t = 0.0;
    std::size_t n_paths = 0;
    // [x index][b index]
    std::vector<std::vector<double>> p_matrix;     // P(T_b <= t)
    std::vector<std::vector<double>> mean_matrix;  // E(T_b) over crossed paths; NaN if none
    std::vector<std::vector<double>> se_matrix;
    std::vector<std::vector<double>> censored_matrix;  // no crossing before t_max
    std::vector<std::vector<bool>> flagged;            // censoring above 20%
    std::vector<Plateau> plateau;                      // per b
};

/// One ensemble per x with every b registered as a threshold; needs
/// increasing grids, min(x_grid) > max(b_grid) and 0 <= t <= t_max.
EntranceProfile entrance_profile(const ProcessSpec& spec, const std::vector<double>& b_grid,
                                 const std::vector<double>& x_grid, double t,
                                 const SimConfig& config, std::size_t n_paths,
                                 unsigned workers = 1);

struct CauchyRow {
    double x_low = 0.0;
    double x_high = 0.0;
    double difference = 0.0;  // |P_t f(x_high) - P_t f(x_low)|
    double joint_se = 0.0;    // sqrt(se_low^2 + se_high^2)
    double paired_se = 0.0;   // SE of the per-realization difference
};

struct SemigroupCauchy {
    std::string function;
    double t = 0.0;
    std::vector<double> x_grid;
    std::vector<double> values;  // P_t f(x)
    std::vector<double> ses;
    std::vector<CauchyRow> rows;  // consecutive grid points
    bool coupled = false;         // estimated from shared-noise flows
    /// Differences strictly decreasing over the last three rows (all rows
    /// when there are fewer).
    bool tail_decreasing = false;
};

/// Uses coupled flows when gamma2 is nondecreasing on the grid, independent
/// ensembles otherwise. t == 0 returns f(x) with zero SE.
SemigroupCauchy semigroup_cauchy(const ProcessSpec& spec, const TestFunction& f, double t,
                                 const std::vector<double>& x_grid, const SimConfig& config,
                                 std::size_t n_paths, unsigned workers = 1);

/// h(s) = s^power for power in {1, 2, 3}, or a bounded test function of s.
using MomentFunction = std::variant<int, TestFunction>;

struct MomentConvergence {
    std::string function;
    double b = 0.0;
    std::vector<double> x_grid;
    std::vector<double> means;
    std::vector<double> ses;
    std::vector<double> censored;
    std::vector<bool> flagged;
    Plateau plateau;
    /// Unbounded h with more than 5% censoring somewhere.
    bool inconclusive = false;
};

MomentConvergence moment_convergence(const ProcessSpec& spec, const MomentFunction& h, double b,
                                     const std::vector<double>& x_grid, const SimConfig& config,
                                     std::size_t n_paths, unsigned workers = 1);

struct FddCell {
    double x = 0.0;
    double time = 0.0;
    double ks = 0.0;            // two-sample KS of e^{-X} marginals
    double rho_distance = 0.0;  // |E e^{-X^x} - E e^{-X^ref}|
    std::size_t n = 0;          // finite samples on each side
    std::size_t n_ref = 0;
};

struct FddConvergence {
    std::vector<double> times;
    std::vector<double> x_grid;
    double x_ref = 0.0;
    std::vector<std::vector<FddCell>> cells;  // [x index][time index]
    std::vector<bool> decreasing;             // per time: KS strictly decreasing along x
    std::vector<bool> non_decreasing;         // per time
    double threshold = 0.0;                   // 1.5 x 95% two-sample KS quantile
    std::vector<bool> final_below_threshold;  // per time
};

FddConvergence fdd_convergence(const ProcessSpec& spec, const std::vector<double>& times,
                               const std::vector<double>& x_grid, double x_ref,
                               const SimConfig& config, std::size_t n_paths,
                               unsigned workers = 1);

namespace stats {

/// sup_t |F_a(t) - F_b(t)| of the empirical CDFs; NaN entries are skipped.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic coefficient c(alpha) = sqrt(-log(alpha / 2) / 2).
double ks_coefficient(double alpha);

/// c(alpha) sqrt((n + m) / (n m)).
double ks_critical(double alpha, std::size_t n, std::size_t m);

}  // namespace stats

}  // namespace entrance
