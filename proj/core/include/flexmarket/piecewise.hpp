#pragma once

#include <vector>

namespace flexmarket {

// Tangent-cut description of coefficient * x^2 over a bounded domain.
struct PiecewiseSpec {
    int segment_count = 16;
    double lo = 0.0;
    double hi = 1.0;

    void validate() const;
};

// One supporting line y >= slope * x + intercept of the epigraph.
struct LinearCut {
    double slope = 0.0;
    double intercept = 0.0;

    double at(double x) const { return slope * x + intercept; }
};

// Tangents of coefficient*x^2 at the segment knots (segment_count+1 cuts).
// The pointwise maximum of the cuts underestimates the parabola by at most
//   coefficient * ((hi-lo)/segment_count)^2 / 4
// anywhere in [lo, hi]; a zero coefficient yields no cuts. Negative
// coefficients are rejected (the epigraph of a concave term has no outer
// linear description).
std::vector<LinearCut> linearize_quadratic(double coefficient, const PiecewiseSpec& spec);

// The documented worst-case underestimation bound for the cut family.
double linearization_bound(double coefficient, const PiecewiseSpec& spec);

}  // namespace flexmarket
