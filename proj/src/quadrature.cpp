#include "entrance/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "entrance/errors.hpp"

namespace entrance::quad {

namespace {

constexpr std::size_t kMaxPanels = 4000;
constexpr double kRelTol = 1e-12;

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel panel(const std::function<double(double)>& f, double a, double b) {
    Panel p{a, b, 0.0, 0.0};
    double l1 = 0.0;
    p.value = Rule::integrate(f, a, b, 0, 0.0, &p.error, &l1);
    p.error = std::max(p.error, 8.0 * std::numeric_limits<double>::epsilon() * l1);
    return p;
}

}  // namespace

// Globally adaptive: always bisect the panel with the largest K31/G15
// difference. boost's recursive driver keeps refining below the rounding
// floor and its summed estimate then grows with depth.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
    if (a == b) return 0.0;
    std::priority_queue<Panel> queue;
    queue.push(panel(f, a, b));
    double value = queue.top().value;
    double error = queue.top().error;
    while (error > abs_tol && error > kRelTol * std::abs(value) && queue.size() < kMaxPanels) {
        const Panel worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        queue.pop();
        const Panel left = panel(f, worst.a, mid);
        const Panel right = panel(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    if (!std::isfinite(value)) {
        throw NumericalError("quadrature produced a non-finite value", 0.0);
    }
    if (error > abs_tol && error > 1e-10 * std::abs(value)) {
        throw NumericalError("adaptive quadrature did not reach the requested tolerance", value);
    }
    return value;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    double value = integrator.integrate(f, a, b, rel_tol, &error, &l1);
    if (!std::isfinite(value)) {
        throw NumericalError("quadrature produced a non-finite value", 0.0);
    }
    return value;
}

ImproperResult integrate_to_infinity(const std::function<double(double)>& f, double b,
                                     double abs_tol, double cutoff_factor) {
    if (!(b > 0.0)) throw DomainError("integrate_to_infinity: lower limit must be positive");
    ImproperResult out;
    out.cutoff = b * cutoff_factor;

    const double f_half = f(out.cutoff / 2.0);
    const double f_end = f(out.cutoff);
    if (!(std::isfinite(f_half) && std::isfinite(f_end)) || f_half <= 0.0 || f_end <= 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.tail_exponent = std::log(f_half / f_end) / std::log(2.0);
    if (out.tail_exponent <= 1.0) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    // int_X^inf A x^{-p} dx = X f(X) / (p - 1)
    out.tail = out.cutoff * f_end / (out.tail_exponent - 1.0);

    // x = b / (1 - u) with 1 - u = e^{-s}: panels in s are scale-free for
    // power-like integrands
    auto g = [&](double s) {
        const double x = b * std::exp(s);
        return f(x) * x;
    };
    const double s_max = std::log(cutoff_factor);
    for (double lo = 0.0; lo < s_max;) {
        const double hi = std::min(s_max, lo + std::log(10.0));
        out.body += integrate(g, lo, hi, abs_tol);
        lo = hi;
    }
    out.value = out.body + out.tail;
    out.finite = std::isfinite(out.value);
    return out;
}

}  // namespace entrance::quad
