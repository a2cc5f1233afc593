#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entrance/model.hpp"
#include "entrance/quadrature.hpp"

namespace entrance {

enum class Verdict { Entrance, Inconclusive };
enum class Criterion { CompetitionIntegral, StablePower, None };

const char* to_string(Verdict v);
const char* to_string(Criterion c);

struct BoundaryReport {
    Verdict verdict = Verdict::Inconclusive;
    Criterion criterion_used = Criterion::None;
    std::optional<double> integral_value;  // int_b^inf dx / |gamma0(x)|
    std::optional<double> b_used;
    std::vector<std::string> details;
};

/// Sufficient conditions for infinity to be an entrance boundary. Never
/// throws for a validated spec; anything outside the covered hypotheses is
/// Inconclusive with an explanation in details.
BoundaryReport classify(const ProcessSpec& spec, const ValidationReport& report);

/// Smallest grid point g with gamma0 < -1e-9 at every grid point >= g.
std::optional<double> negative_drift_threshold(const RateFunction& gamma0,
                                               const std::vector<double>& grid);

/// int_b^inf dx / |gamma0(x)| by quadrature with the power-law tail envelope,
/// whatever the family of gamma0. Used by classify for polynomials and by the
/// tests against the closed forms.
quad::ImproperResult competition_integral_quadrature(const RateFunction& gamma0, double b);

}  // namespace entrance
