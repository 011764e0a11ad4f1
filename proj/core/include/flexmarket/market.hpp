#pragma once

#include <string>
#include <vector>

#include "flexmarket/scenario.hpp"

namespace flexmarket {

enum class Mechanism { Pab, Pac, Dra, Vcg };
Mechanism mechanism_from_string(const std::string& tag);
std::string mechanism_name(Mechanism m);
// PAC and VCG clear uniformly; PAB and DRA pay each accepted slot its own
// offer price (DRA is the sealed-bid equivalent of PAB at this layer, the
// mechanisms differ in the bidding behaviour agents adopt).
bool discriminatory(Mechanism m);

// Offers per agent, one (capacity, price) slot per price-grid level. Slots
// priced above the ceiling are void; slot prices may sit off-grid once
// strategies move them.
struct OfferBook {
    struct AgentOffers {
        std::string agent;
        std::vector<double> capacity_mw;
        std::vector<double> price;  // GBP/MW/h
    };
    std::vector<AgentOffers> agents;

    int levels() const { return agents.empty() ? 0 : static_cast<int>(agents[0].capacity_mw.size()); }
    void validate(double ceiling) const;
};

struct ClearingResult {
    std::vector<std::vector<double>> accepted_mw;  // [agent][slot]
    double lambda = 0.0;  // marginal price, the dual of the balance row
    double unmet_mw = 0.0;

    double accepted_total(int agent) const;
    double total_accepted() const;
    // Highest offer price among accepted slots; the ceiling when demand is
    // unmet, zero when nothing clears.
    double max_accepted_price(const OfferBook& book, double ceiling) const;
};

// Least-cost clearing of the book against the requirement. Acceptance at the
// marginal price is pro-rata to offered capacity so agent ordering cannot
// leak into the game loop; lambda comes from the balance-row dual and equals
// the ceiling whenever demand is unmet.
ClearingResult clear(const OfferBook& book, const ServiceRequirement& req);

struct Settlement {
    struct Line {
        std::string agent;
        double capacity_mw = 0.0;   // paid capacity
        double rate_gbp_mw_h = 0.0; // average payment rate
        double revenue_gbp_day = 0.0;
    };
    std::vector<Line> lines;
    double dso_payment_gbp_day = 0.0;
};

Settlement settle(const ClearingResult& result, const OfferBook& book,
                  const ServiceRequirement& req, Mechanism mechanism);

// Clarke pivot payments: each accepted agent is paid the cost increase its
// absence would impose on the clearing (unmet demand priced at the ceiling).
Settlement vcg_payments(const OfferBook& book, const ServiceRequirement& req);

// Cumulative demand met at or below each grid fee, with off-grid offer
// prices binned upward to the next grid value.
struct DemandMetSchedule {
    std::vector<double> met_mw;  // aligned with grid levels
    std::vector<double> fee;     // grid values
};
DemandMetSchedule demand_met_schedule(const ClearingResult& result, const OfferBook& book,
                                      const PriceGrid& grid);

}  // namespace flexmarket
