#include "flexmarket/branch_and_bound.hpp"

#include <cmath>
#include <vector>

#include "flexmarket/errors.hpp"
#include "flexmarket/simplex.hpp"

namespace flexmarket {

namespace {

constexpr double kIntTol = 1e-7;
constexpr double kGapTol = 1e-6;

struct Node {
    std::vector<std::pair<int, int>> fixes;  // (variable, value)
};

int most_fractional(const LinearProgram& lp, const Solution& rel) {
    int pick = -1;
    double best = kIntTol;
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (!lp.column(j).binary) continue;
        double v = rel.primal[static_cast<size_t>(j)];
        double frac = std::fabs(v - std::round(v));
        if (frac > best) {
            best = frac;
            pick = j;
        }
    }
    return pick;
}

}  // namespace

Solution solve_milp(const LinearProgram& lp) {
    lp.validate();
    const bool maximize = lp.sense() == Sense::Maximize;
    const double worst = maximize ? -kInf : kInf;
    auto better = [&](double a, double b) { return maximize ? a > b + 0.0 : a < b - 0.0; };

    Solution incumbent;
    incumbent.status = SolveStatus::Infeasible;
    double incumbent_obj = worst;
    long total_iterations = 0;
    bool any_unbounded = false;

    // Depth-first with a deterministic stack; value 1 explored before 0 so
    // one-hot selection structures find an incumbent immediately.
    std::vector<Node> stack{Node{}};
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();

        LinearProgram sub = lp;
        for (int j = 0; j < sub.num_variables(); ++j) sub.column(j).binary = false;
        for (auto [var, val] : node.fixes) sub.fix_variable(var, static_cast<double>(val));

        Solution rel = solve_lp(sub);
        total_iterations += rel.iterations;
        if (rel.status == SolveStatus::Infeasible) continue;
        if (rel.status == SolveStatus::Unbounded) {
            any_unbounded = true;
            continue;
        }
        // Bound pruning against the incumbent.
        if (incumbent.status == SolveStatus::Optimal) {
            if (maximize ? rel.objective <= incumbent_obj + kGapTol
                         : rel.objective >= incumbent_obj - kGapTol)
                continue;
        }
        int branch = most_fractional(lp, rel);
        if (branch < 0) {
            // Integral relaxation: candidate incumbent.
            if (incumbent.status != SolveStatus::Optimal || better(rel.objective, incumbent_obj)) {
                incumbent = rel;
                incumbent_obj = rel.objective;
                for (int j = 0; j < lp.num_variables(); ++j)
                    if (lp.column(j).binary)
                        incumbent.primal[static_cast<size_t>(j)] =
                            std::round(incumbent.primal[static_cast<size_t>(j)]);
            }
            continue;
        }
        Node zero = node, one = node;
        zero.fixes.emplace_back(branch, 0);
        one.fixes.emplace_back(branch, 1);
        stack.push_back(std::move(zero));
        stack.push_back(std::move(one));
    }

    if (incumbent.status != SolveStatus::Optimal && any_unbounded) {
        incumbent.status = SolveStatus::Unbounded;
    }
    incumbent.iterations = total_iterations;
    incumbent.duals.clear();
    return incumbent;
}

}  // namespace flexmarket
