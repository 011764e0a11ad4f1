#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flexmarket/agents.hpp"
#include "flexmarket/flex_models.hpp"
#include "flexmarket/market.hpp"

namespace flexmarket {

struct GameConfig {
    Mechanism mechanism = Mechanism::Pac;
    Strategy strategy = Strategy::Truthful;  // all agents follow the same rule
    int domestic_agents = 1;
    int storage_agents = 1;
    int industrial_agents = 1;
    ServiceRequirement requirement;
    PriceGrid prices;
    double tolerance = 1e-3;  // on ||price changes||_2 + ||capacity changes||_2
    int max_iterations = 500;
    bool record_replay = false;
};

struct ReplayRound {
    int iteration = 0;
    double lambda = 0.0;
    double unmet_mw = 0.0;
    std::vector<double> profits;
    std::vector<std::vector<double>> offer_prices;
    std::vector<std::vector<double>> offer_capacities;
};

struct Equilibrium {
    OfferBook offers;            // offers cleared in the final round
    ClearingResult clearing;
    Settlement settlement;
    double price = 0.0;          // lambda for uniform clearing, highest
                                 // accepted offer price for discriminatory
    int iterations = 0;
    bool converged = false;
    std::vector<ReplayRound> replay;  // filled when record_replay is set
};

// Iterate offer collection -> clearing -> settlement -> strategy updates
// until the summed offer-change norm falls inside the tolerance. Round one
// plays truthful curves; its clearing price seeds the strategy walks.
// Deterministic; non-convergence at the iteration cap is reported, not
// thrown. A repeated offer state (a cycle on the price grid) also stops the
// game and reports converged = false.
Equilibrium run_game(const GameConfig& config, const Portfolio& portfolio);

struct SweepCell {
    std::string scenario;
    Mechanism mechanism = Mechanism::Pac;
    Strategy strategy = Strategy::Truthful;
    int agent_count = 0;  // total, split evenly across the three types
    double true_price = 0.0;
    double demand_mw = 0.0;
    double ceiling = 0.0;
    double window_hours = 0.0;
    // Flattened equilibrium outcome (survives the CSV round trip that the
    // full Equilibrium record does not need to).
    double price = 0.0;
    bool converged = false;
    int iterations = 0;
    double unmet_mw = 0.0;
    std::optional<Equilibrium> equilibrium;
    std::string error;  // set when the cell failed; the sweep continues
    // Accepted capacity (MW) and its truthful marginal cost (GBP on the
    // per-window-hour basis) per provider type, indexed by ProviderType.
    double accepted_mw[3] = {0.0, 0.0, 0.0};
    double accepted_cost[3] = {0.0, 0.0, 0.0};
};

struct EquilibriumTable {
    std::vector<SweepCell> cells;
};

struct SweepRequest {
    std::vector<std::string> scenarios;
    std::vector<Mechanism> mechanisms;
    std::vector<Strategy> strategies;
    std::vector<int> agent_counts;  // totals; divided evenly across types
    double tolerance = 1e-3;
    int max_iterations = 500;
    int jobs = 1;
};

struct ScenarioInputs {
    std::string name;
    ServiceRequirement requirement;
    PriceGrid prices;
    OfferCurve domestic, storage, industrial;  // class curves
    OfferCurve aggregate;
};
ScenarioInputs scenario_inputs(const ScenarioBundle& bundle, const ScenarioCurves& curves);

// Full cross product; cells run independently (optionally in parallel) and
// land in a deterministic order.
EquilibriumTable sweep(const SweepRequest& request, const std::vector<ScenarioInputs>& inputs);

}  // namespace flexmarket
