#pragma once

#include <string>
#include <vector>

#include "flexmarket/market.hpp"
#include "flexmarket/offer_curve.hpp"

namespace flexmarket {

enum class Strategy { Truthful, Overpricing, Understatement, Underbidding };
Strategy strategy_from_string(const std::string& tag);
std::string strategy_name(Strategy s);

enum class ProviderType { Domestic, Storage, Industrial };
std::string provider_type_name(ProviderType t);

// One bidder: a share of an asset-class supply curve plus the walk state of
// its bidding rule. Offers live on the price-grid slots: slot g holds the
// capacity increment that becomes available at grid fee g, offered at a
// price the strategy may move.
struct AgentState {
    std::string id;
    ProviderType type = ProviderType::Domestic;
    Strategy strategy = Strategy::Truthful;

    std::vector<double> true_capacity_mw;  // per slot
    std::vector<double> true_price;        // grid fees
    std::vector<double> offer_capacity_mw;
    std::vector<double> offer_price;

    // Walk state.
    double price_step = 1.0;          // current signed price move
    double capacity_step = 0.0;       // current capacity move, >= 0
    double last_profit = 0.0;
    bool initialised = false;

    // Offer change applied in the latest update (the convergence norm reads
    // these, one scalar of each kind per agent per round).
    double applied_price_change = 0.0;
    double applied_capacity_change = 0.0;
};

// Share of agent a (1-based) among n same-type agents: 1 / (a * H(n)).
double portfolio_share(int agent_index, int n_agents);

struct Portfolio {
    std::vector<AgentState> agents;
};

// Split the class curves across per-type agent counts with the harmonic
// share rule; the truthful curve of an agent is its share of the class
// curve, prices unchanged. A class with capacity but no agents is an error.
Portfolio distribute(int domestic_agents, int storage_agents, int industrial_agents,
                     const OfferCurve& domestic, const OfferCurve& storage,
                     const OfferCurve& industrial, const PriceGrid& grid);

// Round profit used by the bidding walks, in GBP per window-hour terms:
// uniform pricing pays lambda on every accepted slot, discriminatory pays
// the slot's own offer price. VCG clears uniformly, so its walks read the
// uniform formula; pivot settlement cash appears in Settlement records.
double profit(const AgentState& agent, const std::vector<double>& accepted_mw, double lambda,
              Mechanism mechanism);

// Strategy updates. Ties in the profit comparison (within 1e-9) halve the
// step and hold the offers, which makes the walk's applied changes vanish
// once profits stabilise.
void init_offers(AgentState& agent, double lambda1, double ceiling);
void op_step(AgentState& agent, double profit_now);
void us_step(AgentState& agent, double profit_now, double lambda);
void ub_step(AgentState& agent, double profit_now, const std::vector<double>& accepted_mw,
             const DemandMetSchedule& met, const ServiceRequirement& req);

}  // namespace flexmarket
