#include "entrance/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entrance {

namespace {

constexpr double kNegativeMargin = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Closed form of int_b^inf dx / |gamma0| when the family provides one.
// nullopt: no closed form (polynomial, tabulated).
std::optional<double> closed_form_integral(const RateFunction& g0, double b) {
    if (auto r = g0.as<LogisticDriftRate>()) return 2.0 / (r->c * b);
    if (g0.as<LinearRate>()) return kInf;
    if (auto r = g0.as<PowerLawRate>()) {
        if (r->exponent <= 1.0) return kInf;
        return std::pow(b, 1.0 - r->exponent) / (std::abs(r->coefficient) * (r->exponent - 1.0));
    }
    return std::nullopt;
}

// Negative on [b, inf) for a polynomial: negative leading coefficient and no
// sign change between b and the Cauchy bound on the real roots.
bool polynomial_negative_beyond(const PolynomialRate& p, double b, std::string& why) {
    auto a = p.coefficients;
    while (a.size() > 1 && a.back() == 0.0) a.pop_back();
    const double lead = a.back();
    if (a.size() < 2 || lead >= 0.0) {
        why = "polynomial drift is not eventually negative";
        return false;
    }
    double bound = 0.0;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) bound = std::max(bound, std::abs(a[k] / lead));
    bound += 1.0;
    if (bound <= b) return true;
    const RateFunction f = RateFunction::polynomial(a);
    constexpr int kChecks = 10000;
    for (int i = 0; i <= kChecks; ++i) {
        const double x = b + (bound - b) * static_cast<double>(i) / kChecks;
        if (!(f(x) < -kNegativeMargin)) {
            why = "polynomial drift is not negative at x = " + fmt_num(x) + " beyond b";
            return false;
        }
    }
    return true;
}

BoundaryReport competition_branch(const ProcessSpec& spec, const ValidationReport& report) {
    BoundaryReport out;
    out.criterion_used = Criterion::CompetitionIntegral;
    if (!report.one_sided_lipschitz_theta) {
        out.details.push_back("no one-sided Lipschitz certificate for gamma0");
        return out;
    }
    if (std::abs(spec.gamma0(0.0)) > 0.0) {
        out.details.push_back("gamma0(0) != 0");
        return out;
    }
    if (spec.gamma0.as<TabulatedRate>()) {
        out.details.push_back("tabulated gamma0 ends at x_cap; the tail integral is undetermined");
        return out;
    }
    const auto b = negative_drift_threshold(spec.gamma0, report.grid);
    if (!b || !(*b > 0.0)) {
        out.details.push_back("gamma0 is not strictly negative on a tail of the grid");
        return out;
    }
    out.b_used = *b;

    double value = kInf;
    if (auto closed = closed_form_integral(spec.gamma0, *b)) {
        value = *closed;
        out.details.push_back("integral by closed form for " + spec.gamma0.kind_name());
    } else if (auto p = spec.gamma0.as<PolynomialRate>()) {
        std::string why;
        if (!polynomial_negative_beyond(*p, *b, why)) {
            out.details.push_back(why);
            return out;
        }
        const auto q = competition_integral_quadrature(spec.gamma0, *b);
        value = q.value;
        out.details.push_back("integral by quadrature, tail exponent " + fmt_num(q.tail_exponent));
    }
    out.integral_value = value;
    if (std::isfinite(value)) {
        out.verdict = Verdict::Entrance;
        out.details.push_back("int_b^inf dx/|gamma0| = " + fmt_num(value) + " at b = " +
                              fmt_num(*b));
    } else {
        out.details.push_back("int_b^inf dx/|gamma0| diverges");
    }
    return out;
}

BoundaryReport stable_power_branch(const ProcessSpec& spec) {
    BoundaryReport out;
    out.criterion_used = Criterion::StablePower;
    const double alpha = spec.nu.as<StableMeasure>()->alpha;
    const auto* g2 = spec.gamma2.as<PowerLawRate>();
    if (!(g2->coefficient > 0.0)) {
        out.details.push_back("gamma2 power-law coefficient must be positive");
        return out;
    }
    if (g2->exponent > alpha) {
        out.verdict = Verdict::Entrance;
        out.details.push_back("r2 = " + fmt_num(g2->exponent) + " > alpha = " + fmt_num(alpha));
    } else {
        out.details.push_back("r2 = " + fmt_num(g2->exponent) + " <= alpha = " + fmt_num(alpha) +
                              "; the criterion does not apply");
    }
    return out;
}

}  // namespace

const char* to_string(Verdict v) {
    return v == Verdict::Entrance ? "Entrance" : "Inconclusive";
}

const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::CompetitionIntegral: return "CompetitionIntegral";
        case Criterion::StablePower: return "StablePower";
        case Criterion::None: break;
    }
    return "None";
}

std::optional<double> negative_drift_threshold(const RateFunction& gamma0,
                                               const std::vector<double>& grid) {
    std::optional<double> b;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        if (!(gamma0(*it) < -kNegativeMargin)) break;
        b = *it;
    }
    return b;
}

quad::ImproperResult competition_integral_quadrature(const RateFunction& gamma0, double b) {
    return quad::integrate_to_infinity([&](double x) { return 1.0 / std::abs(gamma0(x)); }, b,
                                       quad::kAbsTol);
}

BoundaryReport classify(const ProcessSpec& spec, const ValidationReport& report) {
    if (spec.gamma1.is_identity() && spec.gamma2.is_identity()) {
        return competition_branch(spec, report);
    }
    if (spec.gamma0.is_identically_zero() && spec.gamma1.is_identically_zero() &&
        spec.nu.as<StableMeasure>() && spec.gamma2.as<PowerLawRate>()) {
        return stable_power_branch(spec);
    }
    BoundaryReport out;
    out.details.push_back(
        "outside the covered hypotheses: needs gamma1 = gamma2 = x (competition integral) or "
        "gamma0 = gamma1 = 0 with stable nu and power-law gamma2");
    return out;
}

}  // namespace entrance
