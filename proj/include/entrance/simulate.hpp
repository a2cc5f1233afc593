#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrance/model.hpp"
#include "entrance/rng.hpp"

namespace entrance {

enum class SmallJumpMode { Drop, Gaussian };

struct SimConfig {
    double dt = 1e-3;         // base step
    double eps = 0.1;         // small-jump cutoff
    double t_max = 1.0;       // horizon
    double x_cap = kDefaultStateCap;
    SmallJumpMode small_jump_mode = SmallJumpMode::Gaussian;
    bool adaptive = true;
    std::uint64_t seed = 0;
    std::uint64_t record_stride = 1;
    /// Levels whose first downward passage is recorded on every path.
    std::vector<double> thresholds;
    /// Times in [0, t_max] the step sequence lands on exactly; the state at
    /// each is stored in Path::observations.
    std::vector<double> observation_times;
    /// End a path as soon as every registered threshold has been crossed.
    bool stop_when_crossed = false;
    std::uint64_t max_steps = 200'000'000;

    /// Throws DomainError when a field is out of range or x0 >= x_cap.
    void check(double largest_start) const;
};

/// Record nothing but the first and last samples.
inline constexpr std::uint64_t kRecordEndpointsOnly = ~std::uint64_t{0};

struct Path {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> hit_zero_at;
    std::optional<double> capped_at;
    /// threshold -> first time the value is below it (linear interpolation
    /// inside the step). Thresholds never crossed are absent.
    std::map<double, double> crossings;
    /// State at each configured observation time; NaN when not reached.
    std::vector<double> observations;
    std::uint64_t steps = 0;
    std::string error;

    std::optional<double> crossing_time(double level) const {
        auto it = crossings.find(level);
        if (it == crossings.end()) return std::nullopt;
        return it->second;
    }
};

struct JumpMark {
    double time;  // position inside the step
    double size;  // z >= eps
    double u;     // thinning coordinate in [0, u_dom]
};

/// Driving noise of one step: Brownian increment and small-jump surrogate as
/// standard normals, plus candidate jump marks sorted by time.
struct NoiseSlice {
    double brownian = 0.0;
    double small_jump = 0.0;
    double u_dom = 0.0;
    std::vector<JumpMark> marks;
};

/// Quantities of the scheme that depend only on (nu, eps, mode).
struct SchemeConstants {
    double m1 = 0.0;         // compensator mass of jumps >= eps
    double v = 0.0;          // variance rate of jumps < eps
    double tail_mass = 0.0;  // nu([eps, inf))
    SmallJumpMode mode = SmallJumpMode::Gaussian;

    static SchemeConstants from(const LevyMeasure& nu, const SimConfig& config);
};

struct StepResult {
    double value;
    bool clamped;  // the continuous part went below 0 and was reset
};

/// One Euler step with thinned large jumps, compensator drift and optional
/// Gaussian small jumps. The continuous part is clamped at 0 before the
/// accepted jumps are added. Throws NumericalError on a non-finite update.
StepResult step(const ProcessSpec& spec, double x, double dt_eff, const NoiseSlice& noise,
                const SchemeConstants& scheme);

/// Effective step for state x under adaptive stepping.
double adaptive_step(const ProcessSpec& spec, double x, double dt, const SchemeConstants& scheme);

/// Draws the noise of step `step_index` of path `path_index`. Marks are a
/// Poisson(u_dom * tail_mass * dt_eff) sample with sizes from nu on
/// [eps, inf) and thinning coordinates uniform on [0, u_dom].
NoiseSlice draw_noise(const LevyMeasure& nu, const SchemeConstants& scheme, double eps,
                      const StreamKey& key, std::uint64_t path_index, std::uint32_t step_index,
                      double t, double dt_eff, double u_dom);

Path simulate_path(const ProcessSpec& spec, double x0, const SimConfig& config,
                   std::uint64_t path_index, std::uint64_t stream = 0);

struct MomentPoint {
    double time;
    std::size_t count;  // paths with a finite observation
    double mean;
    double variance;
};

struct CrossingStats {
    double level;
    std::size_t crossed;
    std::size_t total;
    double mean;  // over crossed paths; NaN when none
    double se;
};

struct EnsembleSummary {
    std::vector<MomentPoint> moments;
    std::vector<CrossingStats> crossings;
    std::size_t capped = 0;
    std::size_t errors = 0;
};

struct PathEnsemble {
    double x0 = 0.0;
    std::vector<Path> paths;
    EnsembleSummary summary;
};

/// Paths 0..n_paths-1 of one stream; identical output for any worker count.
PathEnsemble simulate_ensemble(const ProcessSpec& spec, double x0, const SimConfig& config,
                               std::size_t n_paths, unsigned workers = 1,
                               std::uint64_t stream = 0);

EnsembleSummary summarize(std::span<const Path> paths, const SimConfig& config);

namespace detail {

struct OrderViolation {
    double time;
    std::size_t lower;  // member index with the smaller start
    std::size_t upper;
    double excess;      // value[lower] - value[upper]
};

struct LockstepResult {
    std::vector<Path> paths;
    std::vector<OrderViolation> violations;
};

/// Steps every start in `starts` with one shared noise realization.
/// flow_mode keeps capped members frozen at x_cap so all members share one
/// time grid, and checks pairwise ordering after every step.
LockstepResult run_lockstep(const ProcessSpec& spec, std::span<const double> starts,
                            const SimConfig& config, const StreamKey& key,
                            std::uint64_t path_index, bool flow_mode);

}  // namespace detail

}  // namespace entrance
