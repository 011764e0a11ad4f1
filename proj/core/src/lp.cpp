#include "flexmarket/lp.hpp"

#include <cmath>
#include <map>

#include "flexmarket/errors.hpp"

namespace flexmarket {

int LinearProgram::add_variable(const std::string& name, double lo, double hi, double objective,
                                bool binary) {
    if (lo > hi) throw ConfigError("LinearProgram: variable '" + name + "' has lo > hi");
    Column c;
    c.name = name;
    c.lo = lo;
    c.hi = hi;
    c.obj = objective;
    c.binary = binary;
    if (binary && (lo < 0.0 || hi > 1.0))
        throw ConfigError("LinearProgram: binary variable '" + name + "' with bounds outside [0,1]");
    cols_.push_back(std::move(c));
    return static_cast<int>(cols_.size()) - 1;
}

void LinearProgram::set_objective(int var, double coeff) {
    cols_.at(static_cast<size_t>(var)).obj = coeff;
}

int LinearProgram::add_constraint(const std::string& name, Rel rel, double rhs) {
    Row r;
    r.name = name;
    r.rel = rel;
    r.rhs = rhs;
    rows_.push_back(std::move(r));
    return static_cast<int>(rows_.size()) - 1;
}

void LinearProgram::add_coefficient(int row, int var, double value) {
    if (var < 0 || var >= num_variables())
        throw ConfigError("LinearProgram: coefficient references undeclared variable");
    if (value == 0.0) return;
    auto& entries = rows_.at(static_cast<size_t>(row)).entries;
    for (auto& e : entries) {
        if (e.var == var) {
            e.value += value;
            return;
        }
    }
    entries.push_back({var, value});
}

bool LinearProgram::has_integrality() const {
    for (const auto& c : cols_)
        if (c.binary) return true;
    return false;
}

void LinearProgram::fix_variable(int var, double value) {
    auto& c = cols_.at(static_cast<size_t>(var));
    c.lo = value;
    c.hi = value;
}

void LinearProgram::set_bounds(int var, double lo, double hi) {
    if (lo > hi) throw ConfigError("LinearProgram: set_bounds with lo > hi");
    auto& c = cols_.at(static_cast<size_t>(var));
    c.lo = lo;
    c.hi = hi;
}

void LinearProgram::validate() const {
    for (const auto& r : rows_)
        for (const auto& e : r.entries)
            if (e.var < 0 || e.var >= num_variables())
                throw ConfigError("LinearProgram: row '" + r.name + "' references unknown variable");
}

namespace {
std::string lp_term(double v, const std::string& name, bool first) {
    std::string s;
    if (v >= 0.0)
        s += first ? "" : " + ";
    else
        s += first ? "- " : " - ";
    s += std::to_string(std::fabs(v)) + " " + name;
    return s;
}
}  // namespace

void LinearProgram::write_lp(std::ostream& os) const {
    os << (sense_ == Sense::Minimize ? "Minimize" : "Maximize") << "\n obj:";
    bool first = true;
    for (size_t j = 0; j < cols_.size(); ++j) {
        if (cols_[j].obj == 0.0) continue;
        os << " " << lp_term(cols_[j].obj, cols_[j].name, first);
        first = false;
    }
    if (first) os << " 0 " << (cols_.empty() ? "x" : cols_[0].name);
    os << "\nSubject To\n";
    for (const auto& r : rows_) {
        os << " " << r.name << ":";
        bool f = true;
        for (const auto& e : r.entries) {
            os << " " << lp_term(e.value, cols_[static_cast<size_t>(e.var)].name, f);
            f = false;
        }
        const char* rel = r.rel == Rel::Le ? "<=" : (r.rel == Rel::Eq ? "=" : ">=");
        os << " " << rel << " " << r.rhs << "\n";
    }
    os << "Bounds\n";
    for (const auto& c : cols_) {
        if (c.lo == -kInf && c.hi == kInf) {
            os << " " << c.name << " free\n";
        } else {
            if (c.lo == -kInf)
                os << " -inf <= " << c.name << " <= " << c.hi << "\n";
            else if (c.hi == kInf)
                os << " " << c.name << " >= " << c.lo << "\n";
            else
                os << " " << c.lo << " <= " << c.name << " <= " << c.hi << "\n";
        }
    }
    bool any_bin = false;
    for (const auto& c : cols_) any_bin |= c.binary;
    if (any_bin) {
        os << "Binaries\n";
        for (const auto& c : cols_)
            if (c.binary) os << " " << c.name << "\n";
    }
    os << "End\n";
}

}  // namespace flexmarket
