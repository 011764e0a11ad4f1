#pragma once

#include <vector>

#include "flexmarket/time_grid.hpp"

namespace flexmarket {

// Monotone map from availability fee (GBP/MW/h) to the flexible capacity (MW)
// the asset will keep ready at that fee. Points are aligned with a PriceGrid.
struct OfferCurve {
    std::vector<double> fees;        // GBP/MW/h, strictly increasing
    std::vector<double> capacities;  // MW, nondecreasing

    int size() const { return static_cast<int>(fees.size()); }
    double capacity_at(double fee) const;  // step evaluation; 0 below first level

    // Per-level increments: capacity new at each fee level.
    std::vector<double> increments() const;

    static OfferCurve zero(const PriceGrid& grid);
    // Scale all capacities (portfolio shares). Fees unchanged.
    OfferCurve scaled(double factor) const;
    void validate() const;
};

// Pointwise sum over a shared PriceGrid. Empty input yields the zero curve.
OfferCurve aggregate_curves(const std::vector<OfferCurve>& curves, const PriceGrid& grid);

// Smallest grid fee whose aggregate capacity covers `demand_mw`; the ceiling
// when supply never reaches demand.
double true_equilibrium(const OfferCurve& aggregate, double demand_mw, double ceiling);

}  // namespace flexmarket
