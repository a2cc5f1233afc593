#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace entrance {

inline constexpr double kDefaultStateCap = 1e6;

// ---------------------------------------------------------------------------
// Rate functions (gamma0 drift, gamma1 diffusion coefficient, gamma2 jump
// modulation).
// ---------------------------------------------------------------------------

struct ZeroRate {};

struct LinearRate {
    double slope;
};

/// coefficient * x^exponent
struct PowerLawRate {
    double coefficient;
    double exponent;
};

/// x -> -(c/2) x^2
struct LogisticDriftRate {
    double c;
};

/// sum_k coefficients[k] * x^k
struct PolynomialRate {
    std::vector<double> coefficients;
};

/// Piecewise-linear interpolation through (x, value) knots with strictly
/// increasing abscissae. Evaluation outside the knot range is an error.
struct TabulatedRate {
    std::vector<double> xs;
    std::vector<double> values;
};

class RateFunction {
public:
    using Repr = std::variant<ZeroRate, LinearRate, PowerLawRate, LogisticDriftRate,
                              PolynomialRate, TabulatedRate>;

    RateFunction() : repr_(ZeroRate{}) {}

    static RateFunction zero() { return RateFunction(ZeroRate{}); }
    static RateFunction linear(double slope);
    static RateFunction power_law(double coefficient, double exponent);
    static RateFunction logistic_drift(double c);
    static RateFunction polynomial(std::vector<double> coefficients);
    static RateFunction tabulated(std::vector<std::pair<double, double>> knots);

    /// Throws SpecError when x is outside the evaluable range.
    double operator()(double x) const;

    const Repr& repr() const noexcept { return repr_; }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&repr_);
    }

    /// Family name as used in configuration files ("zero", "linear", ...).
    std::string kind_name() const;

    /// True when the function is x -> x exactly (linear slope 1, power law
    /// 1*x^1 or polynomial {0, 1}).
    bool is_identity() const;

    /// True when the function is identically zero by construction.
    bool is_identically_zero() const;

    /// Nondecreasing on [0, inf) by family, or std::nullopt when the family
    /// does not decide it analytically (polynomial, tabulated).
    std::optional<bool> nondecreasing_by_family() const;

private:
    explicit RateFunction(Repr repr) : repr_(std::move(repr)) {}
    Repr repr_;
};

// ---------------------------------------------------------------------------
// Levy measures on (0, inf).
// ---------------------------------------------------------------------------

struct NoJumps {};

/// nu(dz) = c z^{-1-alpha} dz on (0, inf), alpha in (1, 2).
struct StableMeasure {
    double alpha;
    double c;
};

/// Stable density restricted to (0, z_max], alpha in (0, 2).
struct TruncatedStableMeasure {
    double alpha;
    double c;
    double z_max;
};

struct JumpAtom {
    double size;
    double rate;
};

struct FiniteAtomsMeasure {
    std::vector<JumpAtom> atoms;
};

class LevyMeasure {
public:
    using Repr = std::variant<NoJumps, StableMeasure, TruncatedStableMeasure, FiniteAtomsMeasure>;

    LevyMeasure() : repr_(NoJumps{}) {}

    static LevyMeasure none() { return LevyMeasure(NoJumps{}); }
    static LevyMeasure stable(double alpha, double c);
    static LevyMeasure truncated_stable(double alpha, double c, double z_max);
    static LevyMeasure finite_atoms(std::vector<JumpAtom> atoms);

    const Repr& repr() const noexcept { return repr_; }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&repr_);
    }

    bool has_jumps() const noexcept;
    std::string kind_name() const;

private:
    explicit LevyMeasure(Repr repr) : repr_(std::move(repr)) {}
    Repr repr_;
};

struct ProcessSpec {
    RateFunction gamma0;  // drift
    RateFunction gamma1;  // diffusion coefficient
    RateFunction gamma2;  // jump-rate modulation
    LevyMeasure nu;

    /// All coefficients vanish at 0, so 0 is an absorbing state.
    bool zero_is_absorbing() const;
    /// gamma1 == 0 and no effective jumps: paths are solutions of an ODE.
    bool is_deterministic() const;
};

// Named specs used across tests, the CLI and the python module.
ProcessSpec logistic_csbp(double c, const LevyMeasure& nu);
ProcessSpec logistic_drift_only(double c);
ProcessSpec null_spec();

struct ValidationReport {
    bool integrability_ok = false;
    /// int (z ^ z^2) nu(dz); +inf when the integral diverges.
    double integrability_value = 0.0;
    /// Largest difference quotient of gamma0 over grid pairs; absent when the
    /// grid has fewer than two distinct points or a quotient is not finite.
    std::optional<double> one_sided_lipschitz_theta;
    bool gamma2_monotone = false;
    std::vector<std::string> warnings;
    std::vector<double> grid;
};

/// Throws SpecError unless every tabulated rate covers [0, x_cap].
void check_tables_cover(const ProcessSpec& spec, double x_cap);

/// Checks the structural hypotheses on a grid of states. Throws SpecError for
/// non-evaluable or negative gamma1/gamma2, DomainError for a bad grid.
ValidationReport validate(const ProcessSpec& spec, std::span<const double> grid,
                          double x_cap = kDefaultStateCap);

/// nu([eps, inf)).
double nu_tail_mass(const LevyMeasure& nu, double eps);

struct PartialMoments {
    double m1;  // int_{[eps, inf)} z nu(dz)
    double v;   // int_{(0, eps)} z^2 nu(dz)
};

PartialMoments nu_partial_moments(const LevyMeasure& nu, double eps);

/// int (z ^ z^2) nu(dz): closed form for Stable and atoms, quadrature for the
/// truncated stable density.
double nu_integrability(const LevyMeasure& nu);

/// Quadrature estimate of int_{[eps, inf)} z nu(dz), independent of the
/// closed forms used by nu_partial_moments.
double nu_first_moment_quadrature(const LevyMeasure& nu, double eps);

}  // namespace entrance
