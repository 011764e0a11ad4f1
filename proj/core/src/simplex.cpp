#include "flexmarket/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flexmarket/errors.hpp"

namespace flexmarket {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-10;

enum class VStat : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// Dense bounded-variable tableau. Columns: structurals, then one slack per
// row, then one artificial per row. The rhs vector holds current basic
// values, not B^-1 b.
struct Tableau {
    int m = 0;       // rows
    int n = 0;       // structural columns
    int width = 0;   // n + 2m
    std::vector<double> a;      // m x width, row major, = B^-1 A
    std::vector<double> rhs;    // basic values per row
    std::vector<double> cost1;  // phase-1 reduced costs
    std::vector<double> cost2;  // phase-2 reduced costs
    std::vector<double> lo, hi;
    std::vector<VStat> stat;
    std::vector<int> basis;     // variable basic in each row

    double* row(int i) { return a.data() + static_cast<size_t>(i) * width; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * width; }

    double value_of(int j) const {
        switch (stat[static_cast<size_t>(j)]) {
            case VStat::AtLower: return lo[static_cast<size_t>(j)];
            case VStat::AtUpper: return hi[static_cast<size_t>(j)];
            case VStat::FreeZero: return 0.0;
            case VStat::Basic: break;
        }
        for (int i = 0; i < m; ++i)
            if (basis[static_cast<size_t>(i)] == j) return rhs[static_cast<size_t>(i)];
        return 0.0;
    }
};

struct PivotChoice {
    int col = -1;
    int dir = 0;  // +1 increase, -1 decrease
};

PivotChoice choose_entering(const Tableau& t, const std::vector<double>& cost, bool phase1,
                            bool bland) {
    PivotChoice best;
    double best_score = kCostTol;
    for (int j = 0; j < t.width; ++j) {
        if (t.stat[static_cast<size_t>(j)] == VStat::Basic) continue;
        if (t.lo[static_cast<size_t>(j)] == t.hi[static_cast<size_t>(j)]) continue;
        // Artificials never re-enter (their bounds are pinched after phase 1,
        // so the line above already excludes them in phase 2).
        if (!phase1 && j >= t.n + t.m) continue;
        double c = cost[static_cast<size_t>(j)];
        int dir = 0;
        double score = 0.0;
        switch (t.stat[static_cast<size_t>(j)]) {
            case VStat::AtLower:
                if (c < -kCostTol) { dir = +1; score = -c; }
                break;
            case VStat::AtUpper:
                if (c > kCostTol) { dir = -1; score = c; }
                break;
            case VStat::FreeZero:
                if (std::fabs(c) > kCostTol) { dir = c < 0.0 ? +1 : -1; score = std::fabs(c); }
                break;
            case VStat::Basic: break;
        }
        if (dir == 0) continue;
        if (bland) return {j, dir};
        if (score > best_score) {
            best_score = score;
            best = {j, dir};
        }
    }
    return best;
}

struct RatioResult {
    double step = kInf;
    int row = -1;       // -1 means the entering variable hits its own bound
    int leave_to = 0;   // +1 leaves at upper, -1 leaves at lower
};

RatioResult ratio_test(const Tableau& t, int col, int dir) {
    RatioResult r;
    double self_span = t.hi[static_cast<size_t>(col)] - t.lo[static_cast<size_t>(col)];
    if (std::isfinite(self_span)) r.step = self_span;
    double best_pivot = 0.0;
    for (int i = 0; i < t.m; ++i) {
        double w = t.row(i)[col] * dir;
        if (std::fabs(w) <= kPivotTol) continue;
        int b = t.basis[static_cast<size_t>(i)];
        double xb = t.rhs[static_cast<size_t>(i)];
        double limit, to;
        if (w > 0.0) {  // basic decreases toward its lower bound
            double lob = t.lo[static_cast<size_t>(b)];
            if (!std::isfinite(lob)) continue;
            limit = (xb - lob) / w;
            to = -1;
        } else {  // basic increases toward its upper bound
            double hib = t.hi[static_cast<size_t>(b)];
            if (!std::isfinite(hib)) continue;
            limit = (xb - hib) / w;
            to = +1;
        }
        if (limit < -kFeasTol) limit = 0.0;
        if (limit < 0.0) limit = 0.0;
        if (limit < r.step - kFeasTol ||
            (limit < r.step + kFeasTol &&
             (std::fabs(w) > best_pivot ||
              (std::fabs(w) == best_pivot && (r.row < 0 || i < r.row))))) {
            if (limit < r.step) r.step = limit;
            r.row = i;
            r.leave_to = static_cast<int>(to);
            best_pivot = std::fabs(w);
        }
    }
    return r;
}

void apply_step(Tableau& t, int col, int dir, double step) {
    if (step == 0.0) return;
    for (int i = 0; i < t.m; ++i)
        t.rhs[static_cast<size_t>(i)] -= dir * step * t.row(i)[col];
}

void pivot(Tableau& t, int prow, int col, double entering_value) {
    double* pr = t.row(prow);
    double inv = 1.0 / pr[col];
    for (int j = 0; j < t.width; ++j) pr[j] *= inv;
    pr[col] = 1.0;
    for (int i = 0; i < t.m; ++i) {
        if (i == prow) continue;
        double f = t.row(i)[col];
        if (std::fabs(f) <= kPivotTol) { t.row(i)[col] = 0.0; continue; }
        double* ri = t.row(i);
        for (int j = 0; j < t.width; ++j) ri[j] -= f * pr[j];
        ri[col] = 0.0;
    }
    for (auto* cost : {&t.cost1, &t.cost2}) {
        double f = (*cost)[static_cast<size_t>(col)];
        if (std::fabs(f) > kPivotTol) {
            for (int j = 0; j < t.width; ++j) (*cost)[static_cast<size_t>(j)] -= f * pr[j];
        }
        (*cost)[static_cast<size_t>(col)] = 0.0;
    }
    t.rhs[static_cast<size_t>(prow)] = entering_value;
}

// Reprice a cost row from scratch: reduced costs with the current basis.
void reprice(Tableau& t, std::vector<double>& cost, const std::vector<double>& raw) {
    cost = raw;
    for (int i = 0; i < t.m; ++i) {
        int b = t.basis[static_cast<size_t>(i)];
        double f = cost[static_cast<size_t>(b)];
        if (std::fabs(f) <= kPivotTol) { cost[static_cast<size_t>(b)] = 0.0; continue; }
        const double* ri = t.row(i);
        for (int j = 0; j < t.width; ++j) cost[static_cast<size_t>(j)] -= f * ri[j];
        cost[static_cast<size_t>(b)] = 0.0;
    }
}

double phase1_infeasibility(const Tableau& t) {
    double s = 0.0;
    for (int i = 0; i < t.m; ++i) {
        int b = t.basis[static_cast<size_t>(i)];
        if (b >= t.n + t.m) s += std::fabs(t.rhs[static_cast<size_t>(i)]);
    }
    return s;
}

}  // namespace

Solution solve_lp(const LinearProgram& lp) {
    if (lp.has_integrality())
        throw ConfigError("solve_lp: program has integrality flags, use solve_milp");
    lp.validate();

    const int n = lp.num_variables();
    const int m = lp.num_constraints();
    const bool maximize = lp.sense() == Sense::Maximize;

    // Row equilibration keeps pivot tolerances meaningful across the mixed
    // units the models produce.
    std::vector<double> rowscale(static_cast<size_t>(m), 1.0);
    for (int i = 0; i < m; ++i) {
        double amax = 0.0;
        for (const auto& e : lp.row(i).entries) amax = std::max(amax, std::fabs(e.value));
        if (amax > 0.0) rowscale[static_cast<size_t>(i)] = 1.0 / amax;
    }

    Tableau t;
    t.m = m;
    t.n = n;
    t.width = n + 2 * m;
    t.a.assign(static_cast<size_t>(m) * t.width, 0.0);
    t.rhs.assign(static_cast<size_t>(m), 0.0);
    t.lo.assign(static_cast<size_t>(t.width), 0.0);
    t.hi.assign(static_cast<size_t>(t.width), 0.0);
    t.stat.assign(static_cast<size_t>(t.width), VStat::AtLower);
    t.basis.assign(static_cast<size_t>(m), -1);

    std::vector<double> raw_cost2(static_cast<size_t>(t.width), 0.0);
    for (int j = 0; j < n; ++j) {
        const auto& c = lp.column(j);
        t.lo[static_cast<size_t>(j)] = c.lo;
        t.hi[static_cast<size_t>(j)] = c.hi;
        raw_cost2[static_cast<size_t>(j)] = maximize ? -c.obj : c.obj;
        if (std::isfinite(c.lo))
            t.stat[static_cast<size_t>(j)] = VStat::AtLower;
        else if (std::isfinite(c.hi))
            t.stat[static_cast<size_t>(j)] = VStat::AtUpper;
        else
            t.stat[static_cast<size_t>(j)] = VStat::FreeZero;
    }
    for (int i = 0; i < m; ++i) {
        const auto& r = lp.row(i);
        for (const auto& e : r.entries)
            t.row(i)[e.var] += e.value * rowscale[static_cast<size_t>(i)];
        int sj = n + i;  // slack
        t.row(i)[sj] = 1.0;
        switch (r.rel) {
            case Rel::Le: t.lo[static_cast<size_t>(sj)] = 0.0; t.hi[static_cast<size_t>(sj)] = kInf; break;
            case Rel::Eq: t.lo[static_cast<size_t>(sj)] = 0.0; t.hi[static_cast<size_t>(sj)] = 0.0; break;
            case Rel::Ge: t.lo[static_cast<size_t>(sj)] = -kInf; t.hi[static_cast<size_t>(sj)] = 0.0; break;
        }
        t.stat[static_cast<size_t>(sj)] =
            r.rel == Rel::Ge ? VStat::AtUpper : VStat::AtLower;
    }

    // Crash basis: a row whose residual fits inside its slack bounds starts
    // with the slack basic; otherwise an artificial hosts |residual|. Rows
    // with negative residual are flipped so every basic column is +1.
    std::vector<double> raw_cost1(static_cast<size_t>(t.width), 0.0);
    for (int i = 0; i < m; ++i) {
        double res = lp.row(i).rhs * rowscale[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            switch (t.stat[static_cast<size_t>(j)]) {
                case VStat::AtLower: v = t.lo[static_cast<size_t>(j)]; break;
                case VStat::AtUpper: v = t.hi[static_cast<size_t>(j)]; break;
                default: v = 0.0; break;
            }
            if (v != 0.0) res -= t.row(i)[j] * v;
        }
        const int sj = n + i;
        const int aj = n + m + i;
        const bool slack_fits =
            res >= t.lo[static_cast<size_t>(sj)] - 1e-12 &&
            res <= t.hi[static_cast<size_t>(sj)] + 1e-12;
        if (slack_fits) {
            t.row(i)[aj] = 1.0;
            t.lo[static_cast<size_t>(aj)] = 0.0;
            t.hi[static_cast<size_t>(aj)] = 0.0;
            t.stat[static_cast<size_t>(aj)] = VStat::AtLower;
            t.stat[static_cast<size_t>(sj)] = VStat::Basic;
            t.basis[static_cast<size_t>(i)] = sj;
            t.rhs[static_cast<size_t>(i)] = res;
        } else {
            if (res < 0.0) {
                double* ri = t.row(i);
                for (int j = 0; j < t.width; ++j) ri[j] = -ri[j];
            }
            t.row(i)[aj] = 1.0;
            t.lo[static_cast<size_t>(aj)] = 0.0;
            t.hi[static_cast<size_t>(aj)] = kInf;
            t.stat[static_cast<size_t>(aj)] = VStat::Basic;
            t.basis[static_cast<size_t>(i)] = aj;
            t.rhs[static_cast<size_t>(i)] = std::fabs(res);
            raw_cost1[static_cast<size_t>(aj)] = 1.0;
        }
    }

    reprice(t, t.cost1, raw_cost1);
    t.cost2 = raw_cost2;  // artificial basis has zero phase-2 cost

    const long iter_budget = 200L * (m + n) + 20000L;
    long iterations = 0;
    bool bland = false;
    long stall = 0;
    double last_progress_metric = kInf;

    auto run_phase = [&](int phase) -> SolveStatus {
        std::vector<double>& cost = phase == 1 ? t.cost1 : t.cost2;
        while (true) {
            if (++iterations > iter_budget)
                throw SolverFailure("simplex iteration budget exhausted", iterations);
            PivotChoice e = choose_entering(t, cost, phase == 1, bland);
            if (e.col < 0) return SolveStatus::Optimal;
            RatioResult r = ratio_test(t, e.col, e.dir);
            if (!std::isfinite(r.step)) {
                if (phase == 1)
                    throw SolverFailure("phase-1 unbounded (internal error)", iterations);
                return SolveStatus::Unbounded;
            }
            // Degeneracy stall watchdog: flip to Bland's rule for guaranteed
            // termination when no progress is being made.
            double metric = phase == 1 ? phase1_infeasibility(t) : 0.0;
            if (r.step <= kFeasTol && phase == 1 && metric >= last_progress_metric) {
                if (++stall > 2L * (m + n) + 200) bland = true;
            } else if (r.step <= kFeasTol) {
                if (++stall > 2L * (m + n) + 200) bland = true;
            } else {
                stall = 0;
            }
            last_progress_metric = metric;

            apply_step(t, e.col, e.dir, r.step);
            if (r.row < 0) {
                // Bound flip, no basis change.
                t.stat[static_cast<size_t>(e.col)] =
                    e.dir > 0 ? VStat::AtUpper : VStat::AtLower;
                continue;
            }
            int leave = t.basis[static_cast<size_t>(r.row)];
            double entering_value;
            switch (t.stat[static_cast<size_t>(e.col)]) {
                case VStat::AtLower: entering_value = t.lo[static_cast<size_t>(e.col)] + e.dir * r.step; break;
                case VStat::AtUpper: entering_value = t.hi[static_cast<size_t>(e.col)] + e.dir * r.step; break;
                default: entering_value = e.dir * r.step; break;
            }
            t.stat[static_cast<size_t>(leave)] = r.leave_to > 0 ? VStat::AtUpper : VStat::AtLower;
            if (leave >= n + m) {
                // Artificial leaving for good: pinch so it can never return.
                t.lo[static_cast<size_t>(leave)] = 0.0;
                t.hi[static_cast<size_t>(leave)] = 0.0;
                t.stat[static_cast<size_t>(leave)] = VStat::AtLower;
            }
            t.stat[static_cast<size_t>(e.col)] = VStat::Basic;
            t.basis[static_cast<size_t>(r.row)] = e.col;
            pivot(t, r.row, e.col, entering_value);
        }
    };

    Solution sol;
    run_phase(1);
    if (phase1_infeasibility(t) > 1e-7) {
        sol.status = SolveStatus::Infeasible;
        sol.iterations = iterations;
        return sol;
    }
    // Pinch artificials so phase 2 cannot move them off zero.
    for (int i = 0; i < m; ++i) {
        int aj = n + m + i;
        t.lo[static_cast<size_t>(aj)] = 0.0;
        t.hi[static_cast<size_t>(aj)] = 0.0;
        if (t.stat[static_cast<size_t>(aj)] != VStat::Basic)
            t.stat[static_cast<size_t>(aj)] = VStat::AtLower;
    }
    reprice(t, t.cost2, raw_cost2);
    bland = false;
    stall = 0;
    SolveStatus st = run_phase(2);
    sol.status = st;
    sol.iterations = iterations;
    if (st != SolveStatus::Optimal) return sol;

    sol.primal.assign(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double v = t.value_of(j);
        double lo = lp.column(j).lo, hi = lp.column(j).hi;
        if (std::isfinite(lo)) v = std::max(v, lo);
        if (std::isfinite(hi)) v = std::min(v, hi);
        sol.primal[static_cast<size_t>(j)] = v;
    }
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += lp.column(j).obj * sol.primal[static_cast<size_t>(j)];
    sol.objective = obj;

    // Duals from slack reduced costs: cbar(slack_i) = -y_i in the minimized
    // problem, rescaled by the row equilibration factor. Sense flip for max.
    sol.duals.assign(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double y = -t.cost2[static_cast<size_t>(n + i)] * rowscale[static_cast<size_t>(i)];
        sol.duals[static_cast<size_t>(i)] = maximize ? -y : y;
    }
    return sol;
}

LpCheck check_solution(const LinearProgram& lp, const Solution& sol) {
    LpCheck chk;
    if (!sol.optimal()) return chk;
    const int n = lp.num_variables();
    const int m = lp.num_constraints();
    const double sgn = lp.sense() == Sense::Maximize ? -1.0 : 1.0;

    // Primal residuals and complementary slackness.
    for (int i = 0; i < m; ++i) {
        const auto& r = lp.row(i);
        double ax = 0.0, amax = 1.0;
        for (const auto& e : r.entries) {
            ax += e.value * sol.primal[static_cast<size_t>(e.var)];
            amax = std::max(amax, std::fabs(e.value));
        }
        double slack = 0.0;
        switch (r.rel) {
            case Rel::Le:
                chk.primal_residual = std::max(chk.primal_residual, (ax - r.rhs) / amax);
                slack = r.rhs - ax;
                break;
            case Rel::Ge:
                chk.primal_residual = std::max(chk.primal_residual, (r.rhs - ax) / amax);
                slack = ax - r.rhs;
                break;
            case Rel::Eq:
                chk.primal_residual = std::max(chk.primal_residual, std::fabs(ax - r.rhs) / amax);
                slack = 0.0;
                break;
        }
        chk.complementary_slackness =
            std::max(chk.complementary_slackness,
                     std::fabs(sol.duals[static_cast<size_t>(i)]) * std::max(0.0, slack) /
                         std::max(1.0, std::fabs(r.rhs)));
    }

    // Dual feasibility: reduced costs must point away from the active bound.
    std::vector<double> red(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) red[static_cast<size_t>(j)] = sgn * lp.column(j).obj;
    for (int i = 0; i < m; ++i)
        for (const auto& e : lp.row(i).entries)
            red[static_cast<size_t>(e.var)] -=
                sgn * sol.duals[static_cast<size_t>(i)] * e.value;
    double bound_terms = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& c = lp.column(j);
        double x = sol.primal[static_cast<size_t>(j)];
        double rc = red[static_cast<size_t>(j)];
        bool at_lo = std::isfinite(c.lo) && x <= c.lo + 1e-7;
        bool at_hi = std::isfinite(c.hi) && x >= c.hi - 1e-7;
        if (at_lo && at_hi) {
            bound_terms += rc * x;
            continue;  // fixed variable, any sign
        }
        if (at_lo) {
            chk.dual_residual = std::max(chk.dual_residual, -rc);
            bound_terms += rc * c.lo;
        } else if (at_hi) {
            chk.dual_residual = std::max(chk.dual_residual, rc);
            bound_terms += rc * c.hi;
        } else {
            chk.dual_residual = std::max(chk.dual_residual, std::fabs(rc));
        }
    }

    // Strong duality with bound contributions.
    double yb = 0.0;
    for (int i = 0; i < m; ++i)
        yb += sgn * sol.duals[static_cast<size_t>(i)] * lp.row(i).rhs;
    double min_obj = sgn * sol.objective;
    chk.duality_gap = std::fabs(min_obj - yb - bound_terms) / std::max(1.0, std::fabs(min_obj));
    return chk;
}

}  // namespace flexmarket
