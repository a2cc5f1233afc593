#pragma once

#include <functional>

namespace entrance::quad {

inline constexpr double kAbsTol = 1e-9;

/// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = kAbsTol);

/// Tanh-sinh on a finite interval; tolerates integrable endpoint
/// singularities such as z^{-0.9} at 0.
double integrate_singular(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12);

struct ImproperResult {
    bool finite = false;
    double value = 0.0;         // body + tail when finite, +inf otherwise
    double body = 0.0;          // int_b^{cutoff} f
    double tail = 0.0;          // power-law envelope bound on int_{cutoff}^inf f
    double tail_exponent = 0.0; // fitted decay exponent p, f ~ A x^{-p}
    double cutoff = 0.0;
};

/// int_b^inf f(x) dx for a nonnegative, eventually power-like integrand.
/// The body uses x = b / (1 - u), integrated in s = -log(1 - u) one decade
/// of x at a time, up to x = cutoff_factor*b;
/// the remainder is bounded by the envelope A x^{-p} fitted at cutoff/2 and
/// cutoff. Reported infinite when p <= 1 (or f is not finite there).
ImproperResult integrate_to_infinity(const std::function<double(double)>& f, double b,
                                     double abs_tol = kAbsTol, double cutoff_factor = 1e8);

}  // namespace entrance::quad
