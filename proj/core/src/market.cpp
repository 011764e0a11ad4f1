#include "flexmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flexmarket/errors.hpp"
#include "flexmarket/simplex.hpp"

namespace flexmarket {

namespace {
constexpr double kCapTol = 1e-12;
}

Mechanism mechanism_from_string(const std::string& tag) {
    if (tag == "pab") return Mechanism::Pab;
    if (tag == "pac") return Mechanism::Pac;
    if (tag == "dra") return Mechanism::Dra;
    if (tag == "vcg") return Mechanism::Vcg;
    throw ConfigError("unknown mechanism '" + tag + "' (expected pab, pac, dra or vcg)");
}

std::string mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::Pab: return "pab";
        case Mechanism::Pac: return "pac";
        case Mechanism::Dra: return "dra";
        case Mechanism::Vcg: return "vcg";
    }
    return "?";
}

bool discriminatory(Mechanism m) { return m == Mechanism::Pab || m == Mechanism::Dra; }

void OfferBook::validate(double ceiling) const {
    (void)ceiling;
    for (const auto& a : agents) {
        if (a.capacity_mw.size() != a.price.size())
            throw ConfigError("OfferBook: ragged offer vectors for agent " + a.agent);
        for (double c : a.capacity_mw)
            if (c < -1e-9) throw ConfigError("OfferBook: negative capacity for agent " + a.agent);
    }
}

double ClearingResult::accepted_total(int agent) const {
    const auto& row = accepted_mw[static_cast<size_t>(agent)];
    return std::accumulate(row.begin(), row.end(), 0.0);
}

double ClearingResult::total_accepted() const {
    double s = 0.0;
    for (size_t a = 0; a < accepted_mw.size(); ++a) s += accepted_total(static_cast<int>(a));
    return s;
}

double ClearingResult::max_accepted_price(const OfferBook& book, double ceiling) const {
    if (unmet_mw > 1e-9) return ceiling;
    double p = 0.0;
    for (size_t a = 0; a < accepted_mw.size(); ++a)
        for (size_t g = 0; g < accepted_mw[a].size(); ++g)
            if (accepted_mw[a][g] > 1e-9) p = std::max(p, book.agents[a].price[g]);
    return p;
}

ClearingResult clear(const OfferBook& book, const ServiceRequirement& req) {
    book.validate(req.ceiling_gbp_per_mw_h);
    const double ceiling = req.ceiling_gbp_per_mw_h;
    const int n_agents = static_cast<int>(book.agents.size());

    struct SlotRef {
        int agent, slot;
        double cap, price;
    };
    std::vector<SlotRef> slots;
    for (int a = 0; a < n_agents; ++a) {
        const auto& ag = book.agents[static_cast<size_t>(a)];
        for (int g = 0; g < static_cast<int>(ag.capacity_mw.size()); ++g) {
            double cap = ag.capacity_mw[static_cast<size_t>(g)];
            double price = ag.price[static_cast<size_t>(g)];
            // Offers above the ceiling or with non-positive price are void.
            if (cap <= kCapTol || price > ceiling + 1e-9 || price <= 0.0) continue;
            slots.push_back({a, g, cap, price});
        }
    }

    // Least-cost acceptance LP; the balance-row dual is the clearing price.
    LinearProgram lp(Sense::Minimize);
    for (const auto& s : slots)
        lp.add_variable("x_" + std::to_string(s.agent) + "_" + std::to_string(s.slot), 0.0, s.cap,
                        s.price);
    int unmet_var = lp.add_variable("unmet", 0.0, req.demand_mw, ceiling);
    int balance = lp.add_constraint("balance", Rel::Eq, req.demand_mw);
    for (int j = 0; j < static_cast<int>(slots.size()); ++j) lp.add_coefficient(balance, j, 1.0);
    lp.add_coefficient(balance, unmet_var, 1.0);
    Solution sol = solve_lp(lp);
    if (!sol.optimal()) throw SolverFailure("market clearing did not solve", sol.iterations);

    ClearingResult out;
    out.accepted_mw.assign(static_cast<size_t>(n_agents), {});
    for (int a = 0; a < n_agents; ++a)
        out.accepted_mw[static_cast<size_t>(a)].assign(
            book.agents[static_cast<size_t>(a)].capacity_mw.size(), 0.0);

    // Canonical acceptance: merit order with pro-rata ties at the marginal
    // price. Cost-identical to the LP vertex, but independent of agent order.
    std::vector<int> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        if (slots[static_cast<size_t>(i)].price != slots[static_cast<size_t>(j)].price)
            return slots[static_cast<size_t>(i)].price < slots[static_cast<size_t>(j)].price;
        if (slots[static_cast<size_t>(i)].agent != slots[static_cast<size_t>(j)].agent)
            return slots[static_cast<size_t>(i)].agent < slots[static_cast<size_t>(j)].agent;
        return slots[static_cast<size_t>(i)].slot < slots[static_cast<size_t>(j)].slot;
    });
    double residual = req.demand_mw;
    size_t i = 0;
    while (i < order.size() && residual > 1e-15) {
        // Gather the tier of equal-priced slots.
        size_t j = i;
        double tier_cap = 0.0;
        while (j < order.size() && slots[static_cast<size_t>(order[j])].price ==
                                       slots[static_cast<size_t>(order[i])].price) {
            tier_cap += slots[static_cast<size_t>(order[j])].cap;
            ++j;
        }
        double take = std::min(residual, tier_cap);
        double ratio = tier_cap > 0.0 ? take / tier_cap : 0.0;
        for (size_t k = i; k < j; ++k) {
            const auto& s = slots[static_cast<size_t>(order[k])];
            out.accepted_mw[static_cast<size_t>(s.agent)][static_cast<size_t>(s.slot)] =
                s.cap * ratio;
        }
        residual -= take;
        i = j;
    }
    out.unmet_mw = std::max(0.0, residual);

    out.lambda = sol.duals[static_cast<size_t>(balance)];
    if (out.unmet_mw > 1e-12) out.lambda = ceiling;
    out.lambda = std::max(0.0, out.lambda);
    return out;
}

Settlement settle(const ClearingResult& result, const OfferBook& book,
                  const ServiceRequirement& req, Mechanism mechanism) {
    if (mechanism == Mechanism::Vcg) return vcg_payments(book, req);
    const double hours = req.window.duration_hours;
    Settlement s;
    for (size_t a = 0; a < book.agents.size(); ++a) {
        Settlement::Line line;
        line.agent = book.agents[a].agent;
        double paid = 0.0;
        for (size_t g = 0; g < result.accepted_mw[a].size(); ++g) {
            double cap = result.accepted_mw[a][g];
            if (cap <= 0.0) continue;
            double rate = discriminatory(mechanism) ? book.agents[a].price[g] : result.lambda;
            line.capacity_mw += cap;
            paid += rate * cap;
        }
        line.revenue_gbp_day = paid * hours;
        line.rate_gbp_mw_h = line.capacity_mw > 1e-12 ? paid / line.capacity_mw : 0.0;
        s.dso_payment_gbp_day += line.revenue_gbp_day;
        s.lines.push_back(std::move(line));
    }
    return s;
}

Settlement vcg_payments(const OfferBook& book, const ServiceRequirement& req) {
    const double hours = req.window.duration_hours;
    const double ceiling = req.ceiling_gbp_per_mw_h;
    ClearingResult base = clear(book, req);

    auto clearing_cost = [&](const OfferBook& b, const ClearingResult& r) {
        double cost = r.unmet_mw * ceiling;
        for (size_t a = 0; a < b.agents.size(); ++a)
            for (size_t g = 0; g < r.accepted_mw[a].size(); ++g)
                cost += r.accepted_mw[a][g] * b.agents[a].price[g];
        return cost;
    };
    const double cost_with = clearing_cost(book, base);

    Settlement s;
    for (size_t a = 0; a < book.agents.size(); ++a) {
        Settlement::Line line;
        line.agent = book.agents[a].agent;
        line.capacity_mw = base.accepted_total(static_cast<int>(a));
        if (line.capacity_mw > 1e-12) {
            double own_cost = 0.0;
            for (size_t g = 0; g < base.accepted_mw[a].size(); ++g)
                own_cost += base.accepted_mw[a][g] * book.agents[a].price[g];
            OfferBook without = book;
            without.agents.erase(without.agents.begin() + static_cast<long>(a));
            ClearingResult rival = clear(without, req);
            double cost_without = clearing_cost(without, rival);
            double payment = cost_without - (cost_with - own_cost);
            line.revenue_gbp_day = payment * hours;
            line.rate_gbp_mw_h = payment / line.capacity_mw;
        }
        s.dso_payment_gbp_day += line.revenue_gbp_day;
        s.lines.push_back(std::move(line));
    }
    return s;
}

DemandMetSchedule demand_met_schedule(const ClearingResult& result, const OfferBook& book,
                                      const PriceGrid& grid) {
    DemandMetSchedule out;
    out.fee = grid.levels;
    out.met_mw.assign(grid.levels.size(), 0.0);
    for (size_t a = 0; a < book.agents.size(); ++a) {
        for (size_t g = 0; g < result.accepted_mw[a].size(); ++g) {
            double cap = result.accepted_mw[a][g];
            if (cap <= 0.0) continue;
            double price = book.agents[a].price[g];
            for (size_t k = 0; k < grid.levels.size(); ++k) {
                if (grid.levels[k] >= price - 1e-9) {
                    out.met_mw[k] += cap;
                    break;
                }
            }
        }
    }
    double cum = 0.0;
    for (auto& v : out.met_mw) {
        cum += v;
        v = cum;
    }
    return out;
}

}  // namespace flexmarket
