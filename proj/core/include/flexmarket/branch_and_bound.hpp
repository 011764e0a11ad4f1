#pragma once

#include "flexmarket/lp.hpp"

namespace flexmarket {

// Branch-and-bound over the program's binary variables. The relaxation path
// is solve_lp; the incumbent is proven optimal within an absolute objective
// gap of 1e-6. Duals are not reported for mixed-integer solves.
Solution solve_milp(const LinearProgram& lp);

}  // namespace flexmarket
