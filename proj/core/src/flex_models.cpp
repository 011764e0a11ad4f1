#include "flexmarket/flex_models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "flexmarket/branch_and_bound.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/piecewise.hpp"
#include "flexmarket/simplex.hpp"

namespace flexmarket {

namespace {

constexpr double kCutTol = 1e-7;
constexpr int kMaxCutRounds = 80;


int most_violated_cut(const std::vector<LinearCut>& cuts, double x, double y) {
    int best = -1;
    double worst = kCutTol;
    for (size_t k = 0; k < cuts.size(); ++k) {
        double v = cuts[k].at(x) - y;
        if (v > worst) {
            worst = v;
            best = static_cast<int>(k);
        }
    }
    return best;
}

std::vector<int> violated_cuts(const std::vector<LinearCut>& cuts, double x, double y) {
    std::vector<int> out;
    for (size_t k = 0; k < cuts.size(); ++k)
        if (cuts[k].at(x) - y > kCutTol) out.push_back(static_cast<int>(k));
    return out;
}

}  // namespace

std::string asset_class_name(AssetClass a) {
    switch (a) {
        case AssetClass::HeatPumps: return "heat_pumps";
        case AssetClass::Evs: return "evs";
        case AssetClass::Ees: return "ees";
        case AssetClass::IndustrialDsr: return "ic";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Heat pumps.
//
// The indoor-temperature recursion
//   tau[t+1] = tau[t] - (K/C)(tau[t] - amb[t]) dt + (k/C) P[t] dt, cyclic,
// is eliminated up front: tau[t] = base[t] + sum_u W[t][u] P[u]. The program
// then carries heating powers, the flexible capacity, and comfort-penalty
// epigraph variables; deviation squares enter through lazy tangent cuts
// written directly on the tau expressions.
// ---------------------------------------------------------------------------

namespace {

struct ThermalResponse {
    std::vector<double> base;            // degC trajectory with zero heating
    std::vector<std::vector<double>> w;  // degC per MW: w[t][u]
};

ThermalResponse thermal_response(const DwellingParams& d, const HpScenario& s,
                                 const TimeGrid& grid) {
    const int T = grid.count;
    const double dt = grid.step_hours;
    const double a = 1.0 - d.conductance_mw_per_c / d.capacitance_mwh_per_c * dt;
    const double q = d.conductance_mw_per_c / d.capacitance_mwh_per_c * dt;
    const double r = s.conversion_factor / d.capacitance_mwh_per_c * dt;
    if (a <= 0.0 || a >= 1.0)
        throw ModelInfeasible("heat_pumps",
                              "thermal time constant shorter than the grid step for " + d.name);

    std::vector<double> apow(static_cast<size_t>(T) + 1, 1.0);
    for (int t = 1; t <= T; ++t)
        apow[static_cast<size_t>(t)] = apow[static_cast<size_t>(t - 1)] * a;
    const double closure = 1.0 - apow[static_cast<size_t>(T)];

    ThermalResponse resp;
    resp.base.assign(static_cast<size_t>(T), 0.0);
    resp.w.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(T), 0.0));

    double amb_sum = 0.0;
    std::vector<double> w0(static_cast<size_t>(T), 0.0);
    for (int u = 0; u < T; ++u) {
        amb_sum += apow[static_cast<size_t>(T - 1 - u)] * q * s.ambient_c[u];
        w0[static_cast<size_t>(u)] = apow[static_cast<size_t>(T - 1 - u)] * r / closure;
    }
    const double tau0 = amb_sum / closure;

    for (int t = 0; t < T; ++t) {
        double base = apow[static_cast<size_t>(t)] * tau0;
        for (int u = 0; u < t; ++u)
            base += apow[static_cast<size_t>(t - 1 - u)] * q * s.ambient_c[u];
        resp.base[static_cast<size_t>(t)] = base;
        auto& wt = resp.w[static_cast<size_t>(t)];
        for (int u = 0; u < T; ++u) {
            double w = apow[static_cast<size_t>(t)] * w0[static_cast<size_t>(u)];
            if (u < t) w += apow[static_cast<size_t>(t - 1 - u)] * r;
            wt[static_cast<size_t>(u)] = w;
        }
    }
    return resp;
}

}  // namespace

HpDispatch hp_flexibility(const HpScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments) {
    const int T = grid.count;
    HpDispatch out;
    out.heating_mw.assign(static_cast<size_t>(T), 0.0);
    if (s.count == 0 || s.dwellings.empty()) return out;
    s.validate(grid);
    fw.validate(grid);

    const int D = static_cast<int>(s.dwellings.size());
    const double dt = grid.step_hours;
    const double mid = 0.5 * (s.comfort_min_c + s.comfort_max_c);

    std::vector<ThermalResponse> resp;
    resp.reserve(static_cast<size_t>(D));
    for (const auto& d : s.dwellings) resp.push_back(thermal_response(d, s, grid));

    // Two tangent families on the unit parabola: a fine one where deviations
    // actually live (fractions of a degree; the discomfort price dwarfs any
    // on-grid fee) and a coarse one spanning the physically reachable range
    // so the epigraph stays supported everywhere.
    double dev_reach = 1.5;
    {
        double amb_min = s.ambient_c[0], amb_max = s.ambient_c[0];
        for (int t = 0; t < T; ++t) {
            amb_min = std::min(amb_min, s.ambient_c[t]);
            amb_max = std::max(amb_max, s.ambient_c[t]);
        }
        dev_reach = std::max(dev_reach, s.comfort_min_c - amb_min);
        for (const auto& dw : s.dwellings)
            dev_reach = std::max(dev_reach, amb_max +
                                                s.conversion_factor * dw.hp_rating_mw /
                                                    dw.conductance_mw_per_c -
                                                s.comfort_max_c);
    }
    auto cuts = linearize_quadratic(1.0, PiecewiseSpec{segments, 0.0, 1.5});
    for (const auto& c : linearize_quadratic(1.0, PiecewiseSpec{segments, 0.0, dev_reach}))
        if (c.slope > 2.0 * 1.5) cuts.push_back(c);

    LinearProgram lp(Sense::Maximize);
    const int pf = lp.add_variable("pf", 0.0, kInf, fee * fw.duration_hours);
    auto pv = [&](int d, int t) { return 1 + d * T + t; };
    for (int d = 0; d < D; ++d) {
        const auto& dw = s.dwellings[static_cast<size_t>(d)];
        const double weight = s.count * dw.share;
        for (int t = 0; t < T; ++t) {
            lp.add_variable("p_" + std::to_string(d) + "_" + std::to_string(t), 0.0,
                            dw.hp_rating_mw, -weight * s.tariff_gbp_per_mwh[t] * dt);
        }
    }
    // Comfort-deviation epigraph columns appear lazily with their first cut;
    // at service-relevant fees the comfort band effectively never breaks, so
    // almost none of them materialise.
    std::vector<int> ypcol(static_cast<size_t>(D) * T, -1),
        yncol(static_cast<size_t>(D) * T, -1);
    auto epi_col = [&](std::vector<int>& cols, const char* tag, int d, int t) {
        int& c = cols[static_cast<size_t>(d * T + t)];
        if (c < 0) {
            const auto& dw = s.dwellings[static_cast<size_t>(d)];
            c = lp.add_variable(tag + std::to_string(d) + "_" + std::to_string(t), 0.0, kInf,
                                -s.count * dw.share * 0.5 * s.discomfort_gbp_per_c2h * dt);
        }
        return c;
    };

    // Peak cap, as published: P[d][t] <= (p / horizon) * sum_u P[d][u].
    const double peak_coeff = s.peak_factor / grid.horizon_hours;
    for (int d = 0; d < D; ++d) {
        for (int t = 0; t < T; ++t) {
            int row = lp.add_constraint("peak_" + std::to_string(d) + "_" + std::to_string(t),
                                        Rel::Le, 0.0);
            for (int u = 0; u < T; ++u)
                lp.add_coefficient(row, pv(d, u), (u == t ? 1.0 : 0.0) - peak_coeff);
        }
    }

    // Flexible capacity: pf + N sum_d mu_d P[d][t] <= N sum_d mu_d ss_d(t),
    // where ss is the steady-state draw holding the comfort midpoint.
    for (int t = fw.start_index; t <= fw.end_index; ++t) {
        double rhs = 0.0;
        for (int d = 0; d < D; ++d) {
            const auto& dw = s.dwellings[static_cast<size_t>(d)];
            rhs += s.count * dw.share * dw.conductance_mw_per_c / s.conversion_factor *
                   (mid - s.ambient_c[t]);
        }
        int row = lp.add_constraint("flex_" + std::to_string(t), Rel::Le, rhs);
        lp.add_coefficient(row, pf, 1.0);
        for (int d = 0; d < D; ++d)
            lp.add_coefficient(row, pv(d, t),
                               s.count * s.dwellings[static_cast<size_t>(d)].share);
    }

    auto add_dev_cut = [&](int d, int t, bool above, int k) {
        const auto& c = cuts[static_cast<size_t>(k)];
        const auto& r = resp[static_cast<size_t>(d)];
        // above: y >= slope*(tau - max) + b; below: y >= slope*(min - tau) + b.
        const double sign = above ? 1.0 : -1.0;
        const double bound = above ? s.comfort_max_c : s.comfort_min_c;
        double rhs = c.intercept + c.slope * sign * (r.base[static_cast<size_t>(t)] - bound);
        int row = lp.add_constraint(
            (above ? "cp_" : "cn_") + std::to_string(d) + "_" + std::to_string(t) + "_" +
                std::to_string(k),
            Rel::Ge, rhs);
        lp.add_coefficient(row, epi_col(above ? ypcol : yncol, above ? "yp_" : "yn_", d, t), 1.0);
        for (int u = 0; u < T; ++u) {
            double w = r.w[static_cast<size_t>(t)][static_cast<size_t>(u)];
            if (w != 0.0) lp.add_coefficient(row, pv(d, u), -sign * c.slope * w);
        }
    };

    auto epi_value = [&](const Solution& sol, const std::vector<int>& cols, int d, int t) {
        int c = cols[static_cast<size_t>(d * T + t)];
        return c < 0 ? 0.0 : sol.primal[static_cast<size_t>(c)];
    };

    std::set<std::tuple<int, int, bool, int>> added;
    // Shaving a pocket of the below-band penalty saves heating energy at
    // every single interval, so the first below-band tangent would be
    // requested everywhere anyway; seeding it ends that discovery loop.
    for (int d = 0; d < D; ++d)
        for (int t = 0; t < T; ++t)
            if (added.insert({d, t, false, 1}).second) add_dev_cut(d, t, false, 1);

    Solution sol;
    for (int round = 0;; ++round) {
        sol = solve_lp(lp);
        if (sol.status == SolveStatus::Infeasible)
            throw ModelInfeasible("heat_pumps", "dispatch program infeasible at fee " +
                                                    std::to_string(fee));
        if (sol.status == SolveStatus::Unbounded)
            throw SolverFailure("heat_pumps dispatch unbounded", sol.iterations);
        if (round >= kMaxCutRounds)
            throw SolverFailure("heat_pumps cut loop did not settle", sol.iterations);

        int violations = 0;
        for (int d = 0; d < D; ++d) {
            const auto& r = resp[static_cast<size_t>(d)];
            for (int t = 0; t < T; ++t) {
                double tau = r.base[static_cast<size_t>(t)];
                for (int u = 0; u < T; ++u)
                    tau += r.w[static_cast<size_t>(t)][static_cast<size_t>(u)] *
                           sol.primal[static_cast<size_t>(pv(d, u))];
                const double devp = tau - s.comfort_max_c;
                const double devn = s.comfort_min_c - tau;
                for (int k : violated_cuts(cuts, devp, epi_value(sol, ypcol, d, t)))
                    if (added.insert({d, t, true, k}).second) {
                        add_dev_cut(d, t, true, k);
                        ++violations;
                    }
                for (int k : violated_cuts(cuts, devn, epi_value(sol, yncol, d, t)))
                    if (added.insert({d, t, false, k}).second) {
                        add_dev_cut(d, t, false, k);
                        ++violations;
                    }
            }
        }
        if (violations == 0) break;
    }

    out.flexible_mw = std::max(0.0, sol.primal[static_cast<size_t>(pf)]);
    out.objective_gbp = sol.objective;
    out.indoor_c.assign(static_cast<size_t>(D), std::vector<double>(static_cast<size_t>(T), 0.0));
    out.deviation_c.assign(static_cast<size_t>(D),
                           std::vector<double>(static_cast<size_t>(T), 0.0));
    for (int d = 0; d < D; ++d) {
        const auto& dw = s.dwellings[static_cast<size_t>(d)];
        const auto& r = resp[static_cast<size_t>(d)];
        for (int t = 0; t < T; ++t) {
            double p = sol.primal[static_cast<size_t>(pv(d, t))];
            out.heating_mw[static_cast<size_t>(t)] += s.count * dw.share * p;
            double tau = r.base[static_cast<size_t>(t)];
            for (int u = 0; u < T; ++u)
                tau += r.w[static_cast<size_t>(t)][static_cast<size_t>(u)] *
                       sol.primal[static_cast<size_t>(pv(d, u))];
            out.indoor_c[static_cast<size_t>(d)][static_cast<size_t>(t)] = tau;
            out.deviation_c[static_cast<size_t>(d)][static_cast<size_t>(t)] =
                std::max(0.0, tau - s.comfort_max_c) - std::max(0.0, s.comfort_min_c - tau);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// EV charging.
//
// The fleet's charged energy is tracked cumulatively from the start of the
// day, E[t] = sum_{u<t} Pb[u] dt, and the day must deliver exactly the
// fleet's daily demand (net state of charge is unchanged once driving is
// accounted for). Charge-by pressure applies inside the departure window:
// shortfall below e*(1 - plugged share) is penalised quadratically. The
// battery loss curve Pt >= Pb + q Pb^2 enters as lazy tangent cuts; q scales
// the per-vehicle resistance to the plugged sub-fleet.
// ---------------------------------------------------------------------------

EvDispatch ev_flexibility(const EvScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments) {
    const int T = grid.count;
    EvDispatch out;
    out.terminal_mw.assign(static_cast<size_t>(T), 0.0);
    out.battery_mw.assign(static_cast<size_t>(T), 0.0);
    out.unmet_mwh.assign(static_cast<size_t>(T), 0.0);
    if (s.count == 0) return out;
    s.validate(grid);
    fw.validate(grid);

    const double dt = grid.step_hours;
    std::vector<double> cap(static_cast<size_t>(T), 0.0);
    double deliverable = 0.0;
    for (int t = 0; t < T; ++t) {
        cap[static_cast<size_t>(t)] = s.plug_share[t] * s.charger_capacity_mw;
        deliverable += cap[static_cast<size_t>(t)] * dt;
    }
    if (deliverable < s.daily_energy_mwh - 1e-9)
        throw ModelInfeasible("evs", "daily energy demand exceeds deliverable charge");

    LinearProgram lp(Sense::Maximize);
    const int pf = lp.add_variable("pf", 0.0, kInf, fee * fw.duration_hours);
    std::vector<int> pt(static_cast<size_t>(T)), pb(static_cast<size_t>(T)),
        yl(static_cast<size_t>(T), -1);
    for (int t = 0; t < T; ++t) {
        pt[static_cast<size_t>(t)] = lp.add_variable(
            "pt_" + std::to_string(t), 0.0, cap[static_cast<size_t>(t)],
            -s.tariff_gbp_per_mwh[t] * dt);
        pb[static_cast<size_t>(t)] = lp.add_variable("pb_" + std::to_string(t), 0.0,
                                                     cap[static_cast<size_t>(t)], 0.0);
    }
    for (int t = s.departure_window.start_index; t <= s.departure_window.end_index; ++t)
        yl[static_cast<size_t>(t)] =
            lp.add_variable("yl_" + std::to_string(t), 0.0, kInf,
                            -0.5 * s.nondelivery_gbp_per_mwh2h * dt);

    {  // daily charge budget
        int row = lp.add_constraint("budget", Rel::Eq, s.daily_energy_mwh);
        for (int t = 0; t < T; ++t) lp.add_coefficient(row, pb[static_cast<size_t>(t)], dt);
    }
    // Loss-free floor of the loss curve; lazy cuts sharpen it where charging
    // is active.
    for (int t = 0; t < T; ++t) {
        if (cap[static_cast<size_t>(t)] <= 1e-12) continue;
        int row = lp.add_constraint("loss0_" + std::to_string(t), Rel::Ge, 0.0);
        lp.add_coefficient(row, pt[static_cast<size_t>(t)], 1.0);
        lp.add_coefficient(row, pb[static_cast<size_t>(t)], -1.0);
    }
    for (int t = fw.start_index; t <= fw.end_index; ++t) {
        int row = lp.add_constraint("flex_" + std::to_string(t), Rel::Le,
                                    s.uncontrolled_demand_mw[t]);
        lp.add_coefficient(row, pf, 1.0);
        lp.add_coefficient(row, pt[static_cast<size_t>(t)], 1.0);
    }

    // Loss coefficient per interval: per-vehicle Rint aggregated over the
    // plugged sub-fleet, in MW of loss per MW^2 at the battery.
    std::vector<double> qcoef(static_cast<size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        double plugged = s.plug_share[t] * s.count;
        if (plugged > 1e-9)
            qcoef[static_cast<size_t>(t)] =
                s.battery_rint_ohm * 1e6 / (s.battery_voc_v * s.battery_voc_v * plugged);
    }
    // Tangent knots resolve the operating range (a few multiples of the
    // fleet's average draw), not the nameplate charger capacity, which can
    // sit an order of magnitude higher.
    const double loss_domain_hi = 6.0 * s.daily_energy_mwh / grid.horizon_hours;

    const PiecewiseSpec unmet_spec{segments, 0.0, 0.5 * s.daily_energy_mwh};
    const auto unmet_cuts = linearize_quadratic(1.0, unmet_spec);

    std::set<std::pair<int, int>> loss_added, unmet_added;
    Solution sol;
    for (int round = 0;; ++round) {
        sol = solve_lp(lp);
        if (sol.status == SolveStatus::Infeasible)
            throw ModelInfeasible("evs",
                                  "dispatch program infeasible at fee " + std::to_string(fee));
        if (sol.status == SolveStatus::Unbounded)
            throw SolverFailure("evs dispatch unbounded", sol.iterations);
        if (round >= kMaxCutRounds)
            throw SolverFailure("evs cut loop did not settle", sol.iterations);

        int violations = 0;
        // Battery loss cuts: fine knots over the operating range, coarse
        // ones out to the full charger bound so the epigraph stays supported.
        for (int t = 0; t < T; ++t) {
            double q = qcoef[static_cast<size_t>(t)];
            if (q <= 0.0 || cap[static_cast<size_t>(t)] <= 1e-12) continue;
            const double fine_hi = std::min(cap[static_cast<size_t>(t)], loss_domain_hi);
            auto lcuts = linearize_quadratic(q, PiecewiseSpec{segments, 0.0, fine_hi});
            if (cap[static_cast<size_t>(t)] > fine_hi * (1.0 + 1e-9)) {
                for (const auto& c : linearize_quadratic(
                         q, PiecewiseSpec{segments, 0.0, cap[static_cast<size_t>(t)]}))
                    if (c.slope > 2.0 * q * fine_hi) lcuts.push_back(c);
            }
            double x = sol.primal[static_cast<size_t>(pb[static_cast<size_t>(t)])];
            double y = sol.primal[static_cast<size_t>(pt[static_cast<size_t>(t)])] - x;
            int k = most_violated_cut(lcuts, x, y);
            if (k >= 0 && loss_added.insert({t, k}).second) {
                const auto& c = lcuts[static_cast<size_t>(k)];
                // pt - pb >= slope*pb + intercept
                int row = lp.add_constraint("loss_" + std::to_string(t) + "_" + std::to_string(k),
                                            Rel::Ge, c.intercept);
                lp.add_coefficient(row, pt[static_cast<size_t>(t)], 1.0);
                lp.add_coefficient(row, pb[static_cast<size_t>(t)], -1.0 - c.slope);
                ++violations;
            }
        }
        // Charge-by shortfall cuts inside the departure window.
        for (int t = s.departure_window.start_index; t <= s.departure_window.end_index; ++t) {
            double cum = 0.0;
            for (int u = 0; u < t; ++u)
                cum += sol.primal[static_cast<size_t>(pb[static_cast<size_t>(u)])] * dt;
            double need = s.daily_energy_mwh * (1.0 - s.plug_share[t]);
            double z = need - cum;
            double y = sol.primal[static_cast<size_t>(yl[static_cast<size_t>(t)])];
            int k = most_violated_cut(unmet_cuts, z, y);
            if (k >= 0 && unmet_added.insert({t, k}).second) {
                const auto& c = unmet_cuts[static_cast<size_t>(k)];
                // yl >= slope*(need - dt*sum_{u<t} pb[u]) + intercept
                int row = lp.add_constraint(
                    "unmet_" + std::to_string(t) + "_" + std::to_string(k), Rel::Ge,
                    c.intercept + c.slope * need);
                lp.add_coefficient(row, yl[static_cast<size_t>(t)], 1.0);
                for (int u = 0; u < t; ++u)
                    lp.add_coefficient(row, pb[static_cast<size_t>(u)], c.slope * dt);
                ++violations;
            }
        }
        if (violations == 0) break;
    }

    out.flexible_mw = std::max(0.0, sol.primal[static_cast<size_t>(pf)]);
    out.objective_gbp = sol.objective;
    for (int t = 0; t < T; ++t) {
        out.terminal_mw[static_cast<size_t>(t)] =
            sol.primal[static_cast<size_t>(pt[static_cast<size_t>(t)])];
        out.battery_mw[static_cast<size_t>(t)] =
            sol.primal[static_cast<size_t>(pb[static_cast<size_t>(t)])];
    }
    for (int t = s.departure_window.start_index; t <= s.departure_window.end_index; ++t) {
        double cum = 0.0;
        for (int u = 0; u < t; ++u) cum += out.battery_mw[static_cast<size_t>(u)] * dt;
        out.unmet_mwh[static_cast<size_t>(t)] =
            std::max(0.0, s.daily_energy_mwh * (1.0 - s.plug_share[t]) - cum);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Electrical energy storage (MILP).
//
// DoD-decile cycle costing: exactly one decile indicator is up; an extra
// zero-cost "idle" indicator covers DoD = 0 so a battery that does not cycle
// books no degradation for the day.
// ---------------------------------------------------------------------------

EesDispatch ees_flexibility(const EesScenario& s, const TimeGrid& grid, double fee,
                            const Window& fw) {
    const int T = grid.count;
    EesDispatch out;
    out.net_mw.assign(static_cast<size_t>(T), 0.0);
    if (s.power_mw <= 0.0) return out;
    s.validate(grid);
    fw.validate(grid);

    const double dt = grid.step_hours;
    const int segs = static_cast<int>(s.cycle_life.size());

    LinearProgram lp(Sense::Maximize);
    const int pf = lp.add_variable("pf", 0.0, kInf, fee * fw.duration_hours);
    std::vector<int> ch(static_cast<size_t>(T)), dis(static_cast<size_t>(T)),
        e(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) {
        ch[static_cast<size_t>(t)] = lp.add_variable("ch_" + std::to_string(t), 0.0, s.power_mw,
                                                     -s.tariff_gbp_per_mwh[t] * dt);
        dis[static_cast<size_t>(t)] = lp.add_variable("dis_" + std::to_string(t), -s.power_mw,
                                                      0.0, -s.tariff_gbp_per_mwh[t] * dt);
        e[static_cast<size_t>(t)] =
            lp.add_variable("e_" + std::to_string(t), 0.0, s.energy_mwh, 0.0);
    }
    const int dod = lp.add_variable("dod", 0.0, 1.0, 0.0);
    std::vector<int> alpha(static_cast<size_t>(segs) + 1);
    alpha[0] = lp.add_variable("idle", 0.0, 1.0, 0.0, true);
    for (int i = 1; i <= segs; ++i)
        alpha[static_cast<size_t>(i)] =
            lp.add_variable("seg_" + std::to_string(i), 0.0, 1.0,
                            -s.energy_mwh * s.capex_gbp_per_mwh /
                                s.cycle_life[static_cast<size_t>(i - 1)],
                            true);

    // Storage continuity with a cyclic day.
    for (int t = 0; t < T; ++t) {
        int next = (t + 1) % T;
        int row = lp.add_constraint("cont_" + std::to_string(t), Rel::Eq, 0.0);
        lp.add_coefficient(row, e[static_cast<size_t>(next)], 1.0);
        lp.add_coefficient(row, e[static_cast<size_t>(t)], -1.0);
        lp.add_coefficient(row, ch[static_cast<size_t>(t)], -s.efficiency_charge * dt);
        lp.add_coefficient(row, dis[static_cast<size_t>(t)], -dt / s.efficiency_discharge);
    }
    {  // DoD definition
        int row = lp.add_constraint("dod_def", Rel::Eq, 0.0);
        lp.add_coefficient(row, dod, 1.0);
        for (int t = 0; t < T; ++t) {
            lp.add_coefficient(row, ch[static_cast<size_t>(t)],
                               -s.efficiency_charge * dt / (2.0 * s.energy_mwh));
            lp.add_coefficient(row, dis[static_cast<size_t>(t)],
                               dt / (s.efficiency_discharge * 2.0 * s.energy_mwh));
        }
    }
    {  // decile selection
        int lo = lp.add_constraint("dod_lo", Rel::Ge, 0.0);
        int hi = lp.add_constraint("dod_hi", Rel::Le, 0.0);
        lp.add_coefficient(lo, dod, 1.0);
        lp.add_coefficient(hi, dod, 1.0);
        for (int i = 1; i <= segs; ++i) {
            lp.add_coefficient(lo, alpha[static_cast<size_t>(i)],
                               -static_cast<double>(i - 1) / segs);
            lp.add_coefficient(hi, alpha[static_cast<size_t>(i)], -static_cast<double>(i) / segs);
        }
        int one = lp.add_constraint("one_hot", Rel::Eq, 1.0);
        for (int i = 0; i <= segs; ++i)
            lp.add_coefficient(one, alpha[static_cast<size_t>(i)], 1.0);
    }
    // Flexibility is net export during the window.
    for (int t = fw.start_index; t <= fw.end_index; ++t) {
        int row = lp.add_constraint("flex_" + std::to_string(t), Rel::Le, 0.0);
        lp.add_coefficient(row, pf, 1.0);
        lp.add_coefficient(row, ch[static_cast<size_t>(t)], 1.0);
        lp.add_coefficient(row, dis[static_cast<size_t>(t)], 1.0);
    }

    Solution sol = solve_milp(lp);
    if (sol.status == SolveStatus::Infeasible)
        throw ModelInfeasible("ees", "no decile admits the feasible depth of discharge");
    if (sol.status != SolveStatus::Optimal)
        throw SolverFailure("ees dispatch did not solve", sol.iterations);

    out.flexible_mw = std::max(0.0, sol.primal[static_cast<size_t>(pf)]);
    out.objective_gbp = sol.objective;
    out.depth_of_discharge = sol.primal[static_cast<size_t>(dod)];
    for (int t = 0; t < T; ++t)
        out.net_mw[static_cast<size_t>(t)] =
            sol.primal[static_cast<size_t>(ch[static_cast<size_t>(t)])] +
            sol.primal[static_cast<size_t>(dis[static_cast<size_t>(t)])];
    for (int i = 0; i <= segs; ++i)
        if (sol.primal[static_cast<size_t>(alpha[static_cast<size_t>(i)])] > 0.5) out.segment = i;
    return out;
}

// ---------------------------------------------------------------------------
// Industrial & commercial demand-side response.
//
// Modelled on the service + recovery sub-horizon only. Curtailment during
// the window is priced by the quadratic opportunity-cost curve (tangent cuts
// added up front); recovered energy must match the curtailed energy scaled
// by the recovery factor, capped per interval.
// ---------------------------------------------------------------------------

IcDispatch ic_flexibility(const IcScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments) {
    IcDispatch out;
    if (s.capacity_mw <= 0.0) return out;
    s.validate(grid);
    fw.validate(grid);

    const double dt = grid.step_hours;
    const int rec_len = s.recovery_window.length();
    out.recovery_mw.assign(static_cast<size_t>(rec_len), 0.0);
    if (s.power_recovery_factor * rec_len * dt < s.energy_recovery_factor * fw.duration_hours - 1e-12)
        throw ModelInfeasible("ic", "recovery window too short for the energy recovery factor");

    LinearProgram lp(Sense::Maximize);
    const int pf = lp.add_variable("pf", 0.0, s.capacity_mw, fee * fw.duration_hours -
                                                                 s.lin_cost_gbp_per_mw);
    const int yq = lp.add_variable("yq", 0.0, kInf, -1.0);
    std::vector<int> pr(static_cast<size_t>(rec_len));
    std::vector<int> pw(static_cast<size_t>(fw.length()));
    for (int i = 0; i < rec_len; ++i) {
        int t = s.recovery_window.start_index + i;
        pr[static_cast<size_t>(i)] = lp.add_variable("pr_" + std::to_string(i), 0.0, kInf,
                                                     -s.tariff_gbp_per_mwh[t] * dt);
    }
    for (int i = 0; i < fw.length(); ++i) {
        int t = fw.start_index + i;
        pw[static_cast<size_t>(i)] = lp.add_variable("pw_" + std::to_string(i), 0.0, kInf,
                                                     -s.tariff_gbp_per_mwh[t] * dt);
    }

    // Opportunity-cost epigraph: yq >= a * pf^2 via upfront tangent cuts.
    if (s.quad_cost_gbp_per_mw2 > 0.0) {
        PiecewiseSpec spec{segments, 0.0, s.capacity_mw};
        for (const auto& c : linearize_quadratic(s.quad_cost_gbp_per_mw2, spec)) {
            int row = lp.add_constraint("quad", Rel::Ge, c.intercept);
            lp.add_coefficient(row, yq, 1.0);
            lp.add_coefficient(row, pf, -c.slope);
        }
    }
    {  // recovery energy balance: e * pf * dT_fw = sum recovery * dt
        int row = lp.add_constraint("recover", Rel::Eq, 0.0);
        lp.add_coefficient(row, pf, -s.energy_recovery_factor * fw.duration_hours);
        for (int i = 0; i < rec_len; ++i)
            lp.add_coefficient(row, pr[static_cast<size_t>(i)], dt);
    }
    for (int i = 0; i < rec_len; ++i) {  // per-interval recovery cap
        int row = lp.add_constraint("rcap_" + std::to_string(i), Rel::Le, 0.0);
        lp.add_coefficient(row, pr[static_cast<size_t>(i)], 1.0);
        lp.add_coefficient(row, pf, -s.power_recovery_factor);
    }
    for (int i = 0; i < fw.length(); ++i) {  // capacity bound in the window
        int row = lp.add_constraint("wcap_" + std::to_string(i), Rel::Le, s.capacity_mw);
        lp.add_coefficient(row, pf, 1.0);
        lp.add_coefficient(row, pw[static_cast<size_t>(i)], 1.0);
    }

    Solution sol = solve_lp(lp);
    if (sol.status == SolveStatus::Infeasible)
        throw ModelInfeasible("ic", "dispatch program infeasible at fee " + std::to_string(fee));
    if (sol.status != SolveStatus::Optimal)
        throw SolverFailure("ic dispatch did not solve", sol.iterations);

    out.flexible_mw = std::max(0.0, sol.primal[static_cast<size_t>(pf)]);
    out.objective_gbp = sol.objective;
    for (int i = 0; i < rec_len; ++i)
        out.recovery_mw[static_cast<size_t>(i)] = sol.primal[static_cast<size_t>(pr[static_cast<size_t>(i)])];
    return out;
}

// ---------------------------------------------------------------------------
// Offer curves.
// ---------------------------------------------------------------------------

OfferCurve offer_curve(const ScenarioBundle& bundle, AssetClass asset, int jobs,
                       CurveBuildStats* stats) {
    const auto& grid = bundle.grid;
    const auto& fw = bundle.service.window;
    const int n = bundle.prices.size();

    auto solve_one = [&](double fee) -> double {
        switch (asset) {
            case AssetClass::HeatPumps:
                return hp_flexibility(bundle.hp, grid, fee, fw).flexible_mw;
            case AssetClass::Evs:
                return ev_flexibility(bundle.ev, grid, fee, fw).flexible_mw;
            case AssetClass::Ees:
                return ees_flexibility(bundle.ees, grid, fee, fw).flexible_mw;
            case AssetClass::IndustrialDsr:
                return ic_flexibility(bundle.ic, grid, fee, fw).flexible_mw;
        }
        return 0.0;
    };

    OfferCurve curve;
    curve.fees = bundle.prices.levels;
    curve.capacities.assign(static_cast<size_t>(n), 0.0);

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int g = 0; g < n; ++g)
            curve.capacities[static_cast<size_t>(g)] = solve_one(bundle.prices[g]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int g = next.fetch_add(1); g < n; g = next.fetch_add(1))
                        curve.capacities[static_cast<size_t>(g)] = solve_one(bundle.prices[g]);
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    // Monotone repair: reward monotonicity holds in exact arithmetic, so any
    // dip is solver noise; dips beyond the documented tolerance are faults.
    CurveBuildStats local;
    for (int g = 1; g < n; ++g) {
        double prev = curve.capacities[static_cast<size_t>(g - 1)];
        double& cur = curve.capacities[static_cast<size_t>(g)];
        if (cur < prev) {
            double dip = prev - cur;
            local.largest_dip_mw = std::max(local.largest_dip_mw, dip);
            if (dip > 1e-6)
                throw SolverFailure(asset_class_name(asset) +
                                        " offer curve dipped by " + std::to_string(dip) +
                                        " MW between fee levels",
                                    0);
            cur = prev;
            ++local.monotone_repairs;
        }
    }
    if (stats) *stats = local;
    curve.validate();
    return curve;
}

ScenarioCurves build_all_curves(const ScenarioBundle& bundle, int jobs) {
    ScenarioCurves c;
    c.hp = offer_curve(bundle, AssetClass::HeatPumps, jobs);
    c.ev = offer_curve(bundle, AssetClass::Evs, jobs);
    c.ees = offer_curve(bundle, AssetClass::Ees, jobs);
    c.ic = offer_curve(bundle, AssetClass::IndustrialDsr, jobs);
    c.aggregate = aggregate_curves({c.hp, c.ev, c.ees, c.ic}, bundle.prices);
    return c;
}

}  // namespace flexmarket
