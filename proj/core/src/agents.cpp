#include "flexmarket/agents.hpp"

#include <algorithm>
#include <cmath>

#include "flexmarket/errors.hpp"

namespace flexmarket {

namespace {
constexpr double kProfitTol = 1e-9;
constexpr double kPriceTol = 1e-9;
}  // namespace

Strategy strategy_from_string(const std::string& tag) {
    if (tag == "truthful") return Strategy::Truthful;
    if (tag == "op") return Strategy::Overpricing;
    if (tag == "us") return Strategy::Understatement;
    if (tag == "ub") return Strategy::Underbidding;
    throw ConfigError("unknown strategy '" + tag + "' (expected op, us, ub or truthful)");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Truthful: return "truthful";
        case Strategy::Overpricing: return "op";
        case Strategy::Understatement: return "us";
        case Strategy::Underbidding: return "ub";
    }
    return "?";
}

std::string provider_type_name(ProviderType t) {
    switch (t) {
        case ProviderType::Domestic: return "domestic";
        case ProviderType::Storage: return "ees";
        case ProviderType::Industrial: return "ic";
    }
    return "?";
}

double portfolio_share(int agent_index, int n_agents) {
    double harmonic = 0.0;
    for (int j = 1; j <= n_agents; ++j) harmonic += 1.0 / j;
    return 1.0 / (agent_index * harmonic);
}

namespace {

void append_type(Portfolio& p, ProviderType type, int n, const OfferCurve& curve,
                 const PriceGrid& grid) {
    double total = curve.capacities.empty() ? 0.0 : curve.capacities.back();
    if (n < 1) {
        if (total > 1e-9)
            throw ConfigError("distribute: " + provider_type_name(type) +
                              " class has capacity but no agents");
        return;
    }
    auto inc = curve.increments();
    for (int a = 1; a <= n; ++a) {
        AgentState st;
        st.type = type;
        st.id = provider_type_name(type) + std::to_string(a);
        double share = portfolio_share(a, n);
        st.true_price = grid.levels;
        st.true_capacity_mw.assign(inc.size(), 0.0);
        for (size_t g = 0; g < inc.size(); ++g) st.true_capacity_mw[g] = share * inc[g];
        st.offer_capacity_mw = st.true_capacity_mw;
        st.offer_price = st.true_price;
        p.agents.push_back(std::move(st));
    }
}

}  // namespace

Portfolio distribute(int domestic_agents, int storage_agents, int industrial_agents,
                     const OfferCurve& domestic, const OfferCurve& storage,
                     const OfferCurve& industrial, const PriceGrid& grid) {
    Portfolio p;
    append_type(p, ProviderType::Domestic, domestic_agents, domestic, grid);
    append_type(p, ProviderType::Storage, storage_agents, storage, grid);
    append_type(p, ProviderType::Industrial, industrial_agents, industrial, grid);
    return p;
}

double profit(const AgentState& agent, const std::vector<double>& accepted_mw, double lambda,
              Mechanism mechanism) {
    double pi = 0.0;
    for (size_t g = 0; g < accepted_mw.size(); ++g) {
        double cap = accepted_mw[g];
        if (cap <= 0.0) continue;
        double rate = discriminatory(mechanism) ? agent.offer_price[g] : lambda;
        pi += cap * (rate - agent.true_price[g]);
    }
    return pi;
}

void init_offers(AgentState& agent, double lambda1, double ceiling) {
    agent.offer_capacity_mw = agent.true_capacity_mw;
    agent.offer_price = agent.true_price;
    agent.applied_price_change = 0.0;
    agent.applied_capacity_change = 0.0;
    switch (agent.strategy) {
        case Strategy::Truthful:
            break;
        case Strategy::Overpricing:
            // Cheap slots open at the first clearing price.
            for (size_t g = 0; g < agent.offer_price.size(); ++g)
                if (agent.true_price[g] <= lambda1 + kPriceTol) agent.offer_price[g] = lambda1;
            agent.price_step = 1.0;
            break;
        case Strategy::Understatement: {
            agent.price_step = 0.0;
            agent.capacity_step = 0.0;
            for (size_t g = 0; g < agent.offer_price.size(); ++g)
                if (std::fabs(agent.offer_price[g] - lambda1) <= kPriceTol)
                    agent.capacity_step = 0.1 * agent.true_capacity_mw[g];
            break;
        }
        case Strategy::Underbidding:
            // Significantly overpriced start: everything at the ceiling.
            for (size_t g = 0; g < agent.offer_price.size(); ++g)
                if (agent.true_price[g] <= ceiling + kPriceTol) agent.offer_price[g] = ceiling;
            break;
    }
    agent.initialised = true;
}

namespace {

// Reprice every slot whose truthful cost qualifies to one uniform price.
double apply_uniform_price(AgentState& agent, double new_price) {
    double change = 0.0;
    for (size_t g = 0; g < agent.offer_price.size(); ++g) {
        if (agent.true_price[g] <= new_price + kPriceTol) {
            change = std::max(change, std::fabs(new_price - agent.offer_price[g]));
            agent.offer_price[g] = new_price;
        }
    }
    return change;
}

}  // namespace

void op_step(AgentState& agent, double profit_now) {
    const double diff = profit_now - agent.last_profit;
    const double tol = kProfitTol * std::max({1.0, std::fabs(profit_now),
                                              std::fabs(agent.last_profit)});
    agent.applied_price_change = 0.0;
    agent.applied_capacity_change = 0.0;
    double step = agent.price_step;
    bool apply = true;
    if (std::fabs(diff) <= tol) {
        // Stable profit: shrink the probe and hold position.
        step = agent.price_step / 2.0;
        apply = false;
    } else if (diff > 0.0) {
        // Keep a working move; a paying decrease flips into half-sized raises.
        step = agent.price_step >= 0.0 ? agent.price_step : -agent.price_step / 2.0;
    } else {
        // A losing increase reverses; a losing decrease keeps falling.
        step = agent.price_step >= 0.0 ? -agent.price_step : agent.price_step;
    }
    agent.price_step = step;
    agent.last_profit = profit_now;
    if (!apply || step == 0.0) return;
    double base = agent.offer_price.empty() ? 0.0 : agent.offer_price[0];
    agent.applied_price_change = apply_uniform_price(agent, base + step);
}

void us_step(AgentState& agent, double profit_now, double lambda) {
    const double diff = profit_now - agent.last_profit;
    const double tol = kProfitTol * std::max({1.0, std::fabs(profit_now),
                                              std::fabs(agent.last_profit)});
    agent.applied_price_change = 0.0;
    agent.applied_capacity_change = 0.0;
    agent.last_profit = profit_now;

    bool withhold;
    if (std::fabs(diff) <= tol) {
        agent.capacity_step /= 2.0;
        return;  // hold offers, shrink the probe
    } else if (diff > 0.0) {
        withhold = true;  // keep withholding the same amount
    } else {
        agent.capacity_step /= 2.0;  // overshoot: restore half
        withhold = false;
    }
    if (agent.capacity_step <= 0.0) return;
    double moved = 0.0;
    for (size_t g = 0; g < agent.offer_price.size(); ++g) {
        if (std::fabs(agent.offer_price[g] - lambda) > kPriceTol) continue;
        double before = agent.offer_capacity_mw[g];
        double after = withhold
                           ? std::max(0.0, before - agent.capacity_step)
                           : std::min(agent.true_capacity_mw[g], before + agent.capacity_step);
        agent.offer_capacity_mw[g] = after;
        moved += std::fabs(after - before);
    }
    agent.applied_capacity_change = moved;
}

void ub_step(AgentState& agent, double profit_now, const std::vector<double>& accepted_mw,
             const DemandMetSchedule& met, const ServiceRequirement& req) {
    agent.applied_price_change = 0.0;
    agent.applied_capacity_change = 0.0;
    agent.last_profit = profit_now;

    // Descending-clock semantics. The marginal met fee tells the agent where
    // the book cleared; as long as capacity it could serve at or below that
    // fee is being rationed away, the clock is still against it and it
    // undercuts. It reprices to the highest profitable candidate at which
    // its whole cost-eligible block fits inside the residual demand, so the
    // descent cannot overshoot below its own ladder.
    double marginal_fee = req.ceiling_gbp_per_mw_h;
    if (!met.met_mw.empty() && met.met_mw.back() >= req.demand_mw - 1e-9) {
        double prev = 0.0;
        for (size_t k = 0; k < met.fee.size(); ++k) {
            if (met.met_mw[k] > prev + 1e-12) marginal_fee = met.fee[k];
            prev = met.met_mw[k];
        }
    }
    // Pressure is read strictly below the margin: capacity the agent could
    // serve cheaper than the marginal fee but has not placed there. The
    // pro-rata sliver of a slot sitting exactly at the margin is the cleared
    // state of the clock, not pressure.
    double eligible_below = 0.0;
    for (size_t g = 0; g < agent.true_capacity_mw.size(); ++g)
        if (agent.true_price[g] < marginal_fee - kPriceTol)
            eligible_below += agent.true_capacity_mw[g];
    double placed_below = 0.0;
    for (size_t g = 0; g < accepted_mw.size(); ++g)
        if (agent.offer_price[g] < marginal_fee - kPriceTol) placed_below += accepted_mw[g];
    if (eligible_below <= placed_below + 1e-9) return;  // clock has cleared for us

    const double current = agent.offer_price.empty() ? 0.0 : agent.offer_price[0];
    auto met_at_or_below = [&](double price) {
        double m = 0.0;
        for (size_t k = 0; k < met.fee.size(); ++k)
            if (met.fee[k] <= price + kPriceTol) m = met.met_mw[k];
        return m;
    };
    double own_accepted_below = 0.0;  // own acceptance is repositioned, not lost
    auto own_at_or_below = [&](double price) {
        double m = 0.0;
        for (size_t g = 0; g < accepted_mw.size(); ++g)
            if (agent.offer_price[g] <= price + kPriceTol) m += accepted_mw[g];
        return m;
    };

    double best_estimate = 0.0;
    double best_price = -1.0;
    for (size_t k = 0; k <= met.fee.size(); ++k) {
        double candidate = k == met.fee.size() ? req.ceiling_gbp_per_mw_h : met.fee[k];
        if (candidate >= current - kPriceTol) continue;
        own_accepted_below = own_at_or_below(candidate);
        double residual = req.demand_mw - (met_at_or_below(candidate) - own_accepted_below);
        if (residual <= 1e-12) continue;
        double eligible = 0.0, cost = 0.0;
        for (size_t g = 0; g < agent.true_capacity_mw.size(); ++g) {
            if (agent.true_price[g] > candidate + kPriceTol) break;
            eligible += agent.true_capacity_mw[g];
            cost += agent.true_capacity_mw[g] * agent.true_price[g];
        }
        if (eligible <= 1e-12 || eligible > residual + 1e-9) continue;  // not safe
        double estimate = eligible * candidate - cost;
        if (estimate > kProfitTol && estimate >= best_estimate) {
            best_estimate = estimate;
            best_price = candidate;
        }
    }
    if (best_price < 0.0) return;
    // Undercut the eligible block; slots the candidate cannot cover step out
    // of the clock and return to their truthful prices.
    double change = apply_uniform_price(agent, best_price);
    for (size_t g = 0; g < agent.offer_price.size(); ++g) {
        if (agent.true_price[g] > best_price + kPriceTol &&
            std::fabs(agent.offer_price[g] - agent.true_price[g]) > kPriceTol) {
            change = std::max(change, std::fabs(agent.offer_price[g] - agent.true_price[g]));
            agent.offer_price[g] = agent.true_price[g];
        }
    }
    agent.applied_price_change = change;
}

}  // namespace flexmarket
