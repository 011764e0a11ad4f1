#include "flexmarket/offer_curve.hpp"

#include <cmath>

#include "flexmarket/errors.hpp"

namespace flexmarket {

double OfferCurve::capacity_at(double fee) const {
    double cap = 0.0;
    for (int g = 0; g < size(); ++g) {
        if (fees[static_cast<size_t>(g)] <= fee + 1e-12) cap = capacities[static_cast<size_t>(g)];
    }
    return cap;
}

std::vector<double> OfferCurve::increments() const {
    std::vector<double> inc(capacities.size(), 0.0);
    double prev = 0.0;
    for (size_t g = 0; g < capacities.size(); ++g) {
        inc[g] = capacities[g] - prev;
        if (inc[g] < 0.0 && inc[g] > -1e-12) inc[g] = 0.0;
        prev = capacities[g];
    }
    return inc;
}

OfferCurve OfferCurve::zero(const PriceGrid& grid) {
    OfferCurve c;
    c.fees = grid.levels;
    c.capacities.assign(grid.levels.size(), 0.0);
    return c;
}

OfferCurve OfferCurve::scaled(double factor) const {
    OfferCurve c = *this;
    for (auto& v : c.capacities) v *= factor;
    return c;
}

void OfferCurve::validate() const {
    if (fees.size() != capacities.size()) throw ConfigError("OfferCurve: ragged point list");
    for (size_t g = 0; g < fees.size(); ++g) {
        if (capacities[g] < -1e-12) throw ConfigError("OfferCurve: negative capacity");
        if (g > 0 && fees[g] <= fees[g - 1]) throw ConfigError("OfferCurve: fees not increasing");
        if (g > 0 && capacities[g] < capacities[g - 1] - 1e-9)
            throw ConfigError("OfferCurve: capacity decreasing in fee");
    }
}

OfferCurve aggregate_curves(const std::vector<OfferCurve>& curves, const PriceGrid& grid) {
    OfferCurve total = OfferCurve::zero(grid);
    for (const auto& c : curves) {
        if (c.size() != grid.size())
            throw ConfigError("aggregate_curves: curve not aligned with the price grid");
        for (int g = 0; g < c.size(); ++g) {
            if (std::fabs(c.fees[static_cast<size_t>(g)] - grid[g]) > 1e-9)
                throw ConfigError("aggregate_curves: curve fee levels differ from the price grid");
            total.capacities[static_cast<size_t>(g)] += c.capacities[static_cast<size_t>(g)];
        }
    }
    return total;
}

double true_equilibrium(const OfferCurve& aggregate, double demand_mw, double ceiling) {
    if (demand_mw < 0.0) throw ConfigError("true_equilibrium: negative demand");
    for (int g = 0; g < aggregate.size(); ++g) {
        if (aggregate.capacities[static_cast<size_t>(g)] >= demand_mw - 1e-9)
            return aggregate.fees[static_cast<size_t>(g)];
    }
    return ceiling;
}

}  // namespace flexmarket
