#include "entrance/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "entrance/errors.hpp"
#include "entrance/quadrature.hpp"

namespace entrance {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw SpecError(std::string(what) + " must be finite");
}

void require_positive_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw DomainError("small-jump cutoff eps must be a positive finite number");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// RateFunction

RateFunction RateFunction::linear(double slope) {
    require_finite(slope, "linear slope");
    return RateFunction(LinearRate{slope});
}

RateFunction RateFunction::power_law(double coefficient, double exponent) {
    require_finite(coefficient, "power-law coefficient");
    require_finite(exponent, "power-law exponent");
    if (exponent < 0.0) throw SpecError("power-law exponent must be >= 0");
    return RateFunction(PowerLawRate{coefficient, exponent});
}

RateFunction RateFunction::logistic_drift(double c) {
    require_finite(c, "logistic competition constant");
    return RateFunction(LogisticDriftRate{c});
}

RateFunction RateFunction::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) throw SpecError("polynomial needs at least one coefficient");
    for (double a : coefficients) require_finite(a, "polynomial coefficient");
    return RateFunction(PolynomialRate{std::move(coefficients)});
}

RateFunction RateFunction::tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw SpecError("tabulated rate needs at least two knots");
    TabulatedRate t;
    t.xs.reserve(knots.size());
    t.values.reserve(knots.size());
    for (const auto& [x, y] : knots) {
        require_finite(x, "tabulated abscissa");
        require_finite(y, "tabulated value");
        if (!t.xs.empty() && !(x > t.xs.back())) {
            throw SpecError("tabulated abscissae must be strictly increasing");
        }
        t.xs.push_back(x);
        t.values.push_back(y);
    }
    if (t.xs.front() > 0.0) throw SpecError("tabulated rate must cover x = 0");
    return RateFunction(std::move(t));
}

double RateFunction::operator()(double x) const {
    return std::visit(
        Overloaded{
            [](const ZeroRate&) { return 0.0; },
            [x](const LinearRate& r) { return r.slope * x; },
            [x](const PowerLawRate& r) { return r.coefficient * std::pow(x, r.exponent); },
            [x](const LogisticDriftRate& r) { return -0.5 * r.c * x * x; },
            [x](const PolynomialRate& r) {
                double acc = 0.0;
                for (auto it = r.coefficients.rbegin(); it != r.coefficients.rend(); ++it) {
                    acc = acc * x + *it;
                }
                return acc;
            },
            [x](const TabulatedRate& r) {
                if (x < r.xs.front() || x > r.xs.back()) {
                    std::ostringstream os;
                    os << "tabulated rate evaluated at " << x << " outside [" << r.xs.front()
                       << ", " << r.xs.back() << "]";
                    throw SpecError(os.str());
                }
                auto hi = std::upper_bound(r.xs.begin(), r.xs.end(), x);
                if (hi == r.xs.end()) return r.values.back();
                const auto i = static_cast<std::size_t>(hi - r.xs.begin());
                const double w = (x - r.xs[i - 1]) / (r.xs[i] - r.xs[i - 1]);
                return r.values[i - 1] + w * (r.values[i] - r.values[i - 1]);
            },
        },
        repr_);
}

std::string RateFunction::kind_name() const {
    static constexpr const char* names[] = {"zero",           "linear",     "power_law",
                                            "logistic_drift", "polynomial", "tabulated"};
    return names[repr_.index()];
}

bool RateFunction::is_identity() const {
    if (auto r = as<LinearRate>()) return r->slope == 1.0;
    if (auto r = as<PowerLawRate>()) return r->coefficient == 1.0 && r->exponent == 1.0;
    if (auto r = as<PolynomialRate>()) {
        const auto& a = r->coefficients;
        if (a.size() < 2 || a[0] != 0.0 || a[1] != 1.0) return false;
        return std::all_of(a.begin() + 2, a.end(), [](double v) { return v == 0.0; });
    }
    return false;
}

bool RateFunction::is_identically_zero() const {
    return std::visit(
        Overloaded{
            [](const ZeroRate&) { return true; },
            [](const LinearRate& r) { return r.slope == 0.0; },
            [](const PowerLawRate& r) { return r.coefficient == 0.0; },
            [](const LogisticDriftRate& r) { return r.c == 0.0; },
            [](const PolynomialRate& r) {
                return std::all_of(r.coefficients.begin(), r.coefficients.end(),
                                   [](double v) { return v == 0.0; });
            },
            [](const TabulatedRate& r) {
                return std::all_of(r.values.begin(), r.values.end(),
                                   [](double v) { return v == 0.0; });
            },
        },
        repr_);
}

std::optional<bool> RateFunction::nondecreasing_by_family() const {
    return std::visit(
        Overloaded{
            [](const ZeroRate&) -> std::optional<bool> { return true; },
            [](const LinearRate& r) -> std::optional<bool> { return r.slope >= 0.0; },
            [](const PowerLawRate& r) -> std::optional<bool> {
                return r.coefficient >= 0.0 || r.exponent == 0.0;
            },
            [](const LogisticDriftRate& r) -> std::optional<bool> { return r.c <= 0.0; },
            [](const PolynomialRate&) -> std::optional<bool> { return std::nullopt; },
            [](const TabulatedRate&) -> std::optional<bool> { return std::nullopt; },
        },
        repr_);
}

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure LevyMeasure::stable(double alpha, double c) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw SpecError("stable index alpha must lie in (1, 2)");
    if (!(c > 0.0) || !std::isfinite(c)) throw SpecError("stable constant c_alpha must be > 0");
    return LevyMeasure(StableMeasure{alpha, c});
}

LevyMeasure LevyMeasure::truncated_stable(double alpha, double c, double z_max) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw SpecError("truncated stable index alpha must lie in (0, 2)");
    }
    if (!(c > 0.0) || !std::isfinite(c)) throw SpecError("stable constant c_alpha must be > 0");
    if (!(z_max > 0.0) || !std::isfinite(z_max)) throw SpecError("z_max must be > 0");
    return LevyMeasure(TruncatedStableMeasure{alpha, c, z_max});
}

LevyMeasure LevyMeasure::finite_atoms(std::vector<JumpAtom> atoms) {
    for (const auto& a : atoms) {
        if (!(a.size > 0.0) || !std::isfinite(a.size)) {
            throw SpecError("jump atom sizes must be strictly positive (no negative jumps)");
        }
        if (!(a.rate > 0.0) || !std::isfinite(a.rate)) {
            throw SpecError("jump atom rates must be strictly positive");
        }
    }
    return LevyMeasure(FiniteAtomsMeasure{std::move(atoms)});
}

bool LevyMeasure::has_jumps() const noexcept {
    if (std::holds_alternative<NoJumps>(repr_)) return false;
    if (auto a = as<FiniteAtomsMeasure>()) return !a->atoms.empty();
    return true;
}

std::string LevyMeasure::kind_name() const {
    static constexpr const char* names[] = {"none", "stable", "truncated_stable", "finite_atoms"};
    return names[repr_.index()];
}

double nu_tail_mass(const LevyMeasure& nu, double eps) {
    require_positive_eps(eps);
    return std::visit(
        Overloaded{
            [](const NoJumps&) { return 0.0; },
            [eps](const StableMeasure& m) { return m.c * std::pow(eps, -m.alpha) / m.alpha; },
            [eps](const TruncatedStableMeasure& m) {
                if (eps >= m.z_max) return 0.0;
                return m.c * (std::pow(eps, -m.alpha) - std::pow(m.z_max, -m.alpha)) / m.alpha;
            },
            [eps](const FiniteAtomsMeasure& m) {
                double s = 0.0;
                for (const auto& a : m.atoms) {
                    if (a.size >= eps) s += a.rate;
                }
                return s;
            },
        },
        nu.repr());
}

PartialMoments nu_partial_moments(const LevyMeasure& nu, double eps) {
    require_positive_eps(eps);
    return std::visit(
        Overloaded{
            [](const NoJumps&) { return PartialMoments{0.0, 0.0}; },
            [eps](const StableMeasure& m) {
                return PartialMoments{m.c * std::pow(eps, 1.0 - m.alpha) / (m.alpha - 1.0),
                                      m.c * std::pow(eps, 2.0 - m.alpha) / (2.0 - m.alpha)};
            },
            [eps](const TruncatedStableMeasure& m) {
                PartialMoments out{0.0, 0.0};
                if (eps < m.z_max) {
                    out.m1 = m.alpha == 1.0
                                 ? m.c * std::log(m.z_max / eps)
                                 : m.c * (std::pow(m.z_max, 1.0 - m.alpha) -
                                          std::pow(eps, 1.0 - m.alpha)) /
                                       (1.0 - m.alpha);
                }
                const double top = std::min(eps, m.z_max);
                out.v = m.c * std::pow(top, 2.0 - m.alpha) / (2.0 - m.alpha);
                return out;
            },
            [eps](const FiniteAtomsMeasure& m) {
                PartialMoments out{0.0, 0.0};
                for (const auto& a : m.atoms) {
                    if (a.size >= eps) {
                        out.m1 += a.rate * a.size;
                    } else {
                        out.v += a.rate * a.size * a.size;
                    }
                }
                return out;
            },
        },
        nu.repr());
}

double nu_integrability(const LevyMeasure& nu) {
    return std::visit(
        Overloaded{
            [](const NoJumps&) { return 0.0; },
            [](const StableMeasure& m) {
                return m.c / (2.0 - m.alpha) + m.c / (m.alpha - 1.0);
            },
            [](const TruncatedStableMeasure& m) {
                const double split = std::min(1.0, m.z_max);
                const double small = quad::integrate_singular(
                    [&](double z) { return m.c * std::pow(z, 1.0 - m.alpha); }, 0.0, split);
                double large = 0.0;
                if (m.z_max > 1.0) {
                    large = quad::integrate([&](double z) { return m.c * std::pow(z, -m.alpha); },
                                            1.0, m.z_max);
                }
                return small + large;
            },
            [](const FiniteAtomsMeasure& m) {
                double s = 0.0;
                for (const auto& a : m.atoms) s += a.rate * std::min(a.size, a.size * a.size);
                return s;
            },
        },
        nu.repr());
}

double nu_first_moment_quadrature(const LevyMeasure& nu, double eps) {
    require_positive_eps(eps);
    return std::visit(
        Overloaded{
            [](const NoJumps&) { return 0.0; },
            [eps](const StableMeasure& m) {
                auto r = quad::integrate_to_infinity(
                    [&](double z) { return m.c * std::pow(z, -m.alpha); }, eps, 1e-12);
                return r.value;
            },
            [eps](const TruncatedStableMeasure& m) {
                if (eps >= m.z_max) return 0.0;
                return quad::integrate([&](double z) { return m.c * std::pow(z, -m.alpha); }, eps,
                                       m.z_max, 1e-12);
            },
            [eps](const FiniteAtomsMeasure& m) {
                double s = 0.0;
                for (const auto& a : m.atoms) {
                    if (a.size >= eps) s += a.rate * a.size;
                }
                return s;
            },
        },
        nu.repr());
}

// ---------------------------------------------------------------------------
// ProcessSpec

bool ProcessSpec::zero_is_absorbing() const {
    return gamma0(0.0) == 0.0 && gamma1(0.0) == 0.0 && gamma2(0.0) == 0.0;
}

bool ProcessSpec::is_deterministic() const {
    return gamma1.is_identically_zero() && (!nu.has_jumps() || gamma2.is_identically_zero());
}

ProcessSpec logistic_csbp(double c, const LevyMeasure& nu) {
    return ProcessSpec{RateFunction::logistic_drift(c), RateFunction::linear(1.0),
                       RateFunction::linear(1.0), nu};
}

ProcessSpec logistic_drift_only(double c) {
    return ProcessSpec{RateFunction::logistic_drift(c), RateFunction::zero(), RateFunction::zero(),
                       LevyMeasure::none()};
}

ProcessSpec null_spec() { return ProcessSpec{}; }

// ---------------------------------------------------------------------------
// validate

namespace {

void check_table_coverage(const RateFunction& f, const char* name, double x_cap) {
    if (auto t = f.as<TabulatedRate>()) {
        if (t->xs.front() > 0.0 || t->xs.back() < x_cap) {
            std::ostringstream os;
            os << name << ": tabulated knots must cover [0, x_cap = " << x_cap << "]";
            throw SpecError(os.str());
        }
    }
}

double eval_checked(const RateFunction& f, const char* name, double x) {
    double v = 0.0;
    try {
        v = f(x);
    } catch (const SpecError& e) {
        throw SpecError(std::string(name) + ": " + e.what());
    }
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << name << " is not finite at x = " << x;
        throw SpecError(os.str());
    }
    return v;
}

}  // namespace

void check_tables_cover(const ProcessSpec& spec, double x_cap) {
    check_table_coverage(spec.gamma0, "gamma0", x_cap);
    check_table_coverage(spec.gamma1, "gamma1", x_cap);
    check_table_coverage(spec.gamma2, "gamma2", x_cap);
}

ValidationReport validate(const ProcessSpec& spec, std::span<const double> grid, double x_cap) {
    if (grid.empty()) throw DomainError("validation grid must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] < 0.0 || grid[i] > x_cap) {
            throw DomainError("validation grid points must lie in [0, x_cap]");
        }
        if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("validation grid must be sorted");
    }
    check_tables_cover(spec, x_cap);

    ValidationReport report;
    report.grid.assign(grid.begin(), grid.end());

    std::vector<double> g0(grid.size()), g2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        g0[i] = eval_checked(spec.gamma0, "gamma0", x);
        const double g1 = eval_checked(spec.gamma1, "gamma1", x);
        g2[i] = eval_checked(spec.gamma2, "gamma2", x);
        if (g1 < 0.0) {
            std::ostringstream os;
            os << "gamma1 is negative at x = " << x;
            throw SpecError(os.str());
        }
        if (g2[i] < 0.0) {
            std::ostringstream os;
            os << "gamma2 is negative at x = " << x;
            throw SpecError(os.str());
        }
    }

    report.integrability_value = nu_integrability(spec.nu);
    report.integrability_ok = std::isfinite(report.integrability_value);
    if (!report.integrability_ok) {
        report.warnings.emplace_back(
            "int (z ^ z^2) nu(dz) diverges: the supercritical comparison process may lack a "
            "finite mean and non-explosion is not guaranteed");
    }

    // The largest difference quotient over all pairs is attained on adjacent
    // pairs: a quotient over [x_i, x_k] averages the adjacent ones in between.
    std::optional<double> theta;
    bool theta_finite = true;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dx = grid[i] - grid[i - 1];
        if (dx <= 0.0) continue;
        const double q = (g0[i] - g0[i - 1]) / dx;
        if (!std::isfinite(q)) {
            theta_finite = false;
            break;
        }
        theta = theta ? std::max(*theta, q) : q;
    }
    if (theta_finite) report.one_sided_lipschitz_theta = theta;
    if (!report.one_sided_lipschitz_theta) {
        report.warnings.emplace_back(
            "one-sided Lipschitz constant not available on this grid");
    }

    if (auto fam = spec.gamma2.nondecreasing_by_family()) {
        report.gamma2_monotone = *fam;
    } else {
        report.gamma2_monotone = true;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (g2[i] < g2[i - 1]) report.gamma2_monotone = false;
        }
        if (report.gamma2_monotone) {
            report.warnings.emplace_back("gamma2 monotonicity certified on the grid only");
        }
    }
    if (!report.gamma2_monotone) {
        report.warnings.emplace_back(
            "gamma2 is not nondecreasing: the comparison property (and coupled flows) is not "
            "available");
    }
    if (spec.gamma0(0.0) != 0.0 && spec.gamma0(0.0) < 0.0) {
        report.warnings.emplace_back("gamma0(0) < 0: the state 0 is reached by drift");
    }
    auto check_lipschitz_at_zero = [&](const RateFunction& f, const char* name) {
        if (auto p = f.as<PowerLawRate>()) {
            if (p->coefficient != 0.0 && p->exponent > 0.0 && p->exponent < 1.0) {
                report.warnings.emplace_back(std::string(name) +
                                             " is not locally Lipschitz at 0; pathwise "
                                             "uniqueness is not covered by the checked "
                                             "sufficient conditions");
            }
        }
    };
    check_lipschitz_at_zero(spec.gamma0, "gamma0");
    check_lipschitz_at_zero(spec.gamma2, "gamma2");
    return report;
}

}  // namespace entrance
