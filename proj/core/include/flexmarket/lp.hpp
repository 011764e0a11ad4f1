#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace flexmarket {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Rel { Le, Eq, Ge };

enum class SolveStatus { Optimal, Infeasible, Unbounded };

// Sparse linear program with per-variable bounds and optional binary flags.
//
// Dual sign convention (stated for a minimization problem): the dual of a
// >= constraint is >= 0, the dual of a <= constraint is <= 0, equality duals
// are free. For maximization problems the signs flip. Strong duality
//   c'x = sum_i y_i b_i + sum_j (reduced cost at bound)_j * bound_j
// holds at Optimal within 1e-6 relative; tests assert it.
class LinearProgram {
public:
    explicit LinearProgram(Sense sense = Sense::Minimize) : sense_(sense) {}

    int add_variable(const std::string& name, double lo, double hi, double objective,
                     bool binary = false);
    void set_objective(int var, double coeff);

    // Rows are built incrementally; duplicate variable entries are summed.
    int add_constraint(const std::string& name, Rel rel, double rhs);
    void add_coefficient(int row, int var, double value);

    Sense sense() const { return sense_; }
    int num_variables() const { return static_cast<int>(cols_.size()); }
    int num_constraints() const { return static_cast<int>(rows_.size()); }
    bool has_integrality() const;

    struct Column {
        std::string name;
        double lo = 0.0, hi = kInf;
        double obj = 0.0;
        bool binary = false;
    };
    struct RowEntry {
        int var;
        double value;
    };
    struct Row {
        std::string name;
        Rel rel = Rel::Le;
        double rhs = 0.0;
        std::vector<RowEntry> entries;
    };

    const Column& column(int j) const { return cols_[static_cast<size_t>(j)]; }
    const Row& row(int i) const { return rows_[static_cast<size_t>(i)]; }
    Column& column(int j) { return cols_[static_cast<size_t>(j)]; }

    // Fix a variable to a value by pinching its bounds (used by branch&bound).
    void fix_variable(int var, double value);
    void set_bounds(int var, double lo, double hi);

    // Debug dump in the common LP text format, cross-checkable with external
    // tools.
    void write_lp(std::ostream& os) const;

    void validate() const;

private:
    Sense sense_;
    std::vector<Column> cols_;
    std::vector<Row> rows_;
};

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> primal;  // per variable
    std::vector<double> duals;   // per constraint; empty for MILP solves
    long iterations = 0;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

}  // namespace flexmarket
