#include "flexmarket/piecewise.hpp"

#include "flexmarket/errors.hpp"

namespace flexmarket {

void PiecewiseSpec::validate() const {
    if (segment_count < 4) throw ConfigError("PiecewiseSpec: segment_count must be >= 4");
    if (!(hi > lo)) throw ConfigError("PiecewiseSpec: empty domain");
}

std::vector<LinearCut> linearize_quadratic(double coefficient, const PiecewiseSpec& spec) {
    if (coefficient < 0.0)
        throw ConfigError("linearize_quadratic: negative coefficient breaks convexity");
    spec.validate();
    std::vector<LinearCut> cuts;
    if (coefficient == 0.0) return cuts;
    const double h = (spec.hi - spec.lo) / spec.segment_count;
    cuts.reserve(static_cast<size_t>(spec.segment_count) + 1);
    for (int k = 0; k <= spec.segment_count; ++k) {
        const double x = spec.lo + k * h;
        // Tangent of c*x^2 at the knot: y = 2cx0 * x - c*x0^2.
        cuts.push_back({2.0 * coefficient * x, -coefficient * x * x});
    }
    return cuts;
}

double linearization_bound(double coefficient, const PiecewiseSpec& spec) {
    const double h = (spec.hi - spec.lo) / spec.segment_count;
    return coefficient * h * h / 4.0;
}

}  // namespace flexmarket
