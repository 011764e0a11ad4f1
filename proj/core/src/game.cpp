#include "flexmarket/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <set>
#include <thread>

#include "flexmarket/errors.hpp"

namespace flexmarket {

namespace {

OfferBook collect_offers(const Portfolio& p) {
    OfferBook book;
    for (const auto& a : p.agents) {
        OfferBook::AgentOffers o;
        o.agent = a.id;
        o.capacity_mw = a.offer_capacity_mw;
        o.price = a.offer_price;
        book.agents.push_back(std::move(o));
    }
    return book;
}

// Bitwise fingerprint over offers and walk state (FNV-1a). A revisited
// fingerprint means the deterministic game is in a true cycle: the shrinking
// probe steps are part of the state, so bisection walks that re-touch a
// price do not trip it.
uint64_t offer_fingerprint(const Portfolio& p) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto& a : p.agents) {
        for (double v : a.offer_capacity_mw) mix(v);
        for (double v : a.offer_price) mix(v);
        mix(a.price_step);
        mix(a.capacity_step);
        mix(a.last_profit);
    }
    return h;
}

}  // namespace

Equilibrium run_game(const GameConfig& config, const Portfolio& portfolio) {
    if (portfolio.agents.empty()) throw ConfigError("run_game: empty portfolio");
    if (config.tolerance <= 0.0) throw ConfigError("run_game: tolerance must be positive");
    if (config.max_iterations < 1) throw ConfigError("run_game: max_iterations must be >= 1");

    Portfolio state = portfolio;
    for (auto& a : state.agents) {
        a.strategy = config.strategy;
        a.offer_capacity_mw = a.true_capacity_mw;
        a.offer_price = a.true_price;
        a.initialised = false;
        a.last_profit = 0.0;
        a.price_step = 1.0;
        a.capacity_step = 0.0;
    }

    Equilibrium eq;
    std::set<uint64_t> seen;
    bool cycled = false;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        OfferBook book = collect_offers(state);
        ClearingResult clearing = clear(book, config.requirement);
        Settlement settlement = settle(clearing, book, config.requirement, config.mechanism);
        DemandMetSchedule met = demand_met_schedule(clearing, book, config.prices);

        std::vector<double> profits(state.agents.size(), 0.0);
        for (size_t a = 0; a < state.agents.size(); ++a)
            profits[a] = profit(state.agents[a], clearing.accepted_mw[a], clearing.lambda,
                                config.mechanism);

        eq.offers = book;
        eq.clearing = clearing;
        eq.settlement = settlement;
        eq.iterations = iter;
        eq.price = discriminatory(config.mechanism)
                       ? clearing.max_accepted_price(book, config.requirement.ceiling_gbp_per_mw_h)
                       : clearing.lambda;
        if (config.record_replay) {
            ReplayRound r;
            r.iteration = iter;
            r.lambda = clearing.lambda;
            r.unmet_mw = clearing.unmet_mw;
            r.profits = profits;
            for (const auto& a : state.agents) {
                r.offer_prices.push_back(a.offer_price);
                r.offer_capacities.push_back(a.offer_capacity_mw);
            }
            eq.replay.push_back(std::move(r));
        }

        // Strategy updates produce the next round's offers.
        if (iter == 1) {
            for (size_t a = 0; a < state.agents.size(); ++a) {
                auto& ag = state.agents[a];
                init_offers(ag, clearing.lambda, config.requirement.ceiling_gbp_per_mw_h);
                // The understatement walk compares its first round against
                // the printed zero baseline, which is what arms the first
                // withholding move. The overpricing walk instead measures
                // its opening reprice against the truthful round, so a
                // uniform-price book that merely dilutes the agent's own
                // acceptance reads as a loss and the walk backs off.
                ag.last_profit =
                    config.strategy == Strategy::Understatement ? 0.0 : profits[a];
            }
            if (config.strategy == Strategy::Truthful) {
                eq.converged = true;  // fixed point: no agent ever moves
                return eq;
            }
            continue;
        }

        for (size_t a = 0; a < state.agents.size(); ++a) {
            auto& ag = state.agents[a];
            switch (config.strategy) {
                case Strategy::Truthful:
                    break;
                case Strategy::Overpricing:
                    op_step(ag, profits[a]);
                    break;
                case Strategy::Understatement:
                    us_step(ag, profits[a], clearing.lambda);
                    break;
                case Strategy::Underbidding:
                    ub_step(ag, profits[a], clearing.accepted_mw[a], met, config.requirement);
                    break;
            }
        }

        double price_norm = 0.0, cap_norm = 0.0;
        for (const auto& a : state.agents) {
            price_norm += a.applied_price_change * a.applied_price_change;
            cap_norm += a.applied_capacity_change * a.applied_capacity_change;
        }
        double movement = std::sqrt(price_norm) + std::sqrt(cap_norm);
        if (movement <= config.tolerance) {
            eq.converged = true;
            return eq;
        }
        if (!seen.insert(offer_fingerprint(state)).second) {
            cycled = true;  // revisited state: oscillation on the grid
            break;
        }
    }
    eq.converged = false;
    (void)cycled;
    return eq;
}

ScenarioInputs scenario_inputs(const ScenarioBundle& bundle, const ScenarioCurves& curves) {
    ScenarioInputs in;
    in.name = bundle.name;
    in.requirement = bundle.service;
    in.prices = bundle.prices;
    in.domestic = aggregate_curves({curves.hp, curves.ev}, bundle.prices);
    in.storage = curves.ees;
    in.industrial = curves.ic;
    in.aggregate = curves.aggregate;
    return in;
}

namespace {

SweepCell run_cell(const ScenarioInputs& in, Mechanism mech, Strategy strat, int count,
                   double tolerance, int max_iterations) {
    SweepCell cell;
    cell.scenario = in.name;
    cell.mechanism = mech;
    cell.strategy = strat;
    cell.agent_count = count;
    cell.true_price = true_equilibrium(in.aggregate, in.requirement.demand_mw,
                                       in.requirement.ceiling_gbp_per_mw_h);
    cell.demand_mw = in.requirement.demand_mw;
    cell.ceiling = in.requirement.ceiling_gbp_per_mw_h;
    cell.window_hours = in.requirement.window.duration_hours;
    try {
        if (count % 3 != 0)
            throw ConfigError("agent count " + std::to_string(count) +
                              " does not split across the three provider types");
        int per_type = count / 3;
        Portfolio p = distribute(per_type, per_type, per_type, in.domestic, in.storage,
                                 in.industrial, in.prices);
        GameConfig cfg;
        cfg.mechanism = mech;
        cfg.strategy = strat;
        cfg.domestic_agents = cfg.storage_agents = cfg.industrial_agents = per_type;
        cfg.requirement = in.requirement;
        cfg.prices = in.prices;
        cfg.tolerance = tolerance;
        cfg.max_iterations = max_iterations;
        Equilibrium eq = run_game(cfg, p);

        for (size_t a = 0; a < p.agents.size(); ++a) {
            int type = static_cast<int>(p.agents[a].type);
            cell.accepted_mw[type] += eq.clearing.accepted_total(static_cast<int>(a));
            for (size_t g = 0; g < eq.clearing.accepted_mw[a].size(); ++g)
                cell.accepted_cost[type] +=
                    eq.clearing.accepted_mw[a][g] * p.agents[a].true_price[g];
        }
        cell.price = eq.price;
        cell.converged = eq.converged;
        cell.iterations = eq.iterations;
        cell.unmet_mw = eq.clearing.unmet_mw;
        cell.equilibrium = std::move(eq);
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

EquilibriumTable sweep(const SweepRequest& request, const std::vector<ScenarioInputs>& inputs) {
    struct Task {
        const ScenarioInputs* in;
        Mechanism mech;
        Strategy strat;
        int count;
    };
    std::vector<Task> tasks;
    for (const auto& name : request.scenarios) {
        const ScenarioInputs* in = nullptr;
        for (const auto& i : inputs)
            if (i.name == name) in = &i;
        if (!in) throw ConfigError("sweep: no curves for scenario '" + name + "'");
        for (auto mech : request.mechanisms)
            for (auto strat : request.strategies)
                for (int count : request.agent_counts) tasks.push_back({in, mech, strat, count});
    }

    EquilibriumTable table;
    table.cells.resize(tasks.size());
    int jobs = std::max(1, request.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < tasks.size(); ++i) {
            const auto& t = tasks[i];
            table.cells[i] = run_cell(*t.in, t.mech, t.strat, t.count, request.tolerance,
                                      request.max_iterations);
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                    const auto& t = tasks[i];
                    table.cells[i] = run_cell(*t.in, t.mech, t.strat, t.count, request.tolerance,
                                              request.max_iterations);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return table;
}

}  // namespace flexmarket
