#pragma once

#include "flexmarket/lp.hpp"

namespace flexmarket {

// Two-phase bounded-variable primal simplex with dual extraction.
//
// Deterministic: Dantzig pricing with lowest-index tie-breaking, switching to
// Bland's rule after a degeneracy stall, so repeated solves of the same
// program return bit-identical answers. Throws SolverFailure if the iteration
// budget is exhausted, and ConfigError when integrality flags are present
// (use solve_milp for those).
Solution solve_lp(const LinearProgram& lp);

// Residual diagnostics used by tests: primal feasibility, dual feasibility,
// complementary slackness and the strong-duality gap (bound contributions
// included). All fields are absolute residuals.
struct LpCheck {
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementary_slackness = 0.0;
    double duality_gap = 0.0;
};
LpCheck check_solution(const LinearProgram& lp, const Solution& sol);

}  // namespace flexmarket
