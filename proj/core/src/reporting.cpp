#include "flexmarket/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flexmarket/errors.hpp"
#include "json.hpp"

namespace flexmarket {

namespace {

using ordered_json = nlohmann::ordered_json;

double quantile_median(const std::vector<double>& sorted, size_t lo, size_t hi) {
    // median of sorted[lo..hi] inclusive
    size_t n = hi - lo + 1;
    size_t m = lo + n / 2;
    return n % 2 == 1 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
}

struct FiveNum {
    double min, q1, median, q3, max, mean;
};

// Inclusive-median convention: each half contains the middle observation
// when the count is odd.
FiveNum five_number(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    FiveNum f{};
    size_t n = v.size();
    f.min = v.front();
    f.max = v.back();
    f.median = quantile_median(v, 0, n - 1);
    size_t half = (n + 1) / 2;
    f.q1 = quantile_median(v, 0, half - 1);
    f.q3 = quantile_median(v, n - half, n - 1);
    double s = 0.0;
    for (double x : v) s += x;
    f.mean = s / static_cast<double>(n);
    return f;
}

std::string sanitize_csv(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError(path + ": cannot open for writing");
    return os;
}

}  // namespace

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // normalise -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

PriceStats price_stats(const EquilibriumTable& table) {
    std::map<std::pair<int, int>, std::vector<double>> pools;
    for (const auto& c : table.cells) {
        if (!c.error.empty()) continue;
        pools[{static_cast<int>(c.mechanism), static_cast<int>(c.strategy)}].push_back(c.price);
    }
    PriceStats out;
    for (const auto& [key, prices] : pools) {
        if (prices.empty()) continue;
        FiveNum f = five_number(prices);
        PriceStats::Row r;
        r.mechanism = static_cast<Mechanism>(key.first);
        r.strategy = static_cast<Strategy>(key.second);
        r.cells = static_cast<int>(prices.size());
        r.min = f.min;
        r.q1 = f.q1;
        r.median = f.median;
        r.q3 = f.q3;
        r.max = f.max;
        r.mean = f.mean;
        out.rows.push_back(r);
    }
    return out;
}

namespace {

CostBenefit cost_benefit_from(const std::string& label, double price, double demand, double ceiling,
                              double hours, const double accepted[3], const double cost[3],
                              double unmet) {
    CostBenefit cb;
    cb.label = label;
    cb.price = price;
    cb.dso_cost_gbp_day = price * demand * hours;
    cb.dso_benefit_gbp_day = (ceiling - price) * demand * hours;
    const char* names[3] = {"domestic", "ees", "ic"};
    double rev_sum = 0.0, profit_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        CostBenefit::Line l;
        l.provider = names[k];
        l.revenue_gbp_day = price * accepted[k] * hours;
        l.cost_gbp_day = cost[k] * hours;
        l.profit_gbp_day = l.revenue_gbp_day - l.cost_gbp_day;
        rev_sum += l.revenue_gbp_day;
        profit_sum += l.profit_gbp_day;
        cb.lines.push_back(std::move(l));
    }
    // Unserved capacity is carried at the cell price so the lines close the
    // DSO-cost identity even when the book cannot cover the demand.
    CostBenefit::Line u;
    u.provider = "unserved";
    u.revenue_gbp_day = price * unmet * hours;
    u.cost_gbp_day = u.revenue_gbp_day;
    cb.lines.push_back(std::move(u));
    cb.profit_share = rev_sum > 1e-12 ? profit_sum / rev_sum : 0.0;
    return cb;
}

}  // namespace

CostBenefit cost_benefit(const SweepCell& cell) {
    std::string label = cell.scenario + "/" + mechanism_name(cell.mechanism) + "(" +
                        strategy_name(cell.strategy) + ")/" + std::to_string(cell.agent_count);
    return cost_benefit_from(label, cell.price, cell.demand_mw, cell.ceiling, cell.window_hours,
                             cell.accepted_mw, cell.accepted_cost, cell.unmet_mw);
}

CostBenefit pooled_cost_benefit(const EquilibriumTable& table, Mechanism mech, Strategy strat,
                                const std::string& label) {
    double price = 0.0, demand = 0.0, ceiling = 0.0, hours = 0.0, unmet = 0.0;
    double accepted[3] = {0, 0, 0}, cost[3] = {0, 0, 0};
    int n = 0;
    for (const auto& c : table.cells) {
        if (!c.error.empty() || c.mechanism != mech || c.strategy != strat) continue;
        price += c.price;
        demand += c.demand_mw;
        ceiling += c.ceiling;
        hours += c.window_hours;
        unmet += c.unmet_mw;
        for (int k = 0; k < 3; ++k) {
            accepted[k] += c.accepted_mw[k];
            cost[k] += c.accepted_cost[k];
        }
        ++n;
    }
    if (n == 0) throw ConfigError("pooled_cost_benefit: no cells for " + label);
    const double inv = 1.0 / n;
    price *= inv;
    demand *= inv;
    ceiling *= inv;
    hours *= inv;
    unmet *= inv;
    for (int k = 0; k < 3; ++k) {
        accepted[k] *= inv;
        cost[k] *= inv;
    }
    return cost_benefit_from(label, price, demand, ceiling, hours, accepted, cost, unmet);
}

namespace {

// First fee at which the curve reaches (1 - eps) of its final capacity;
// the ceiling if the curve never rises.
double saturation_fee(const OfferCurve& c, double frac = 0.999) {
    double target = c.capacities.empty() ? 0.0 : c.capacities.back() * frac;
    if (target <= 1e-9) return c.fees.empty() ? 0.0 : c.fees.back();
    for (int g = 0; g < c.size(); ++g)
        if (c.capacities[static_cast<size_t>(g)] >= target) return c.fees[static_cast<size_t>(g)];
    return c.fees.back();
}

double entry_fee(const OfferCurve& c, double eps_mw = 1e-3) {
    for (int g = 0; g < c.size(); ++g)
        if (c.capacities[static_cast<size_t>(g)] > eps_mw) return c.fees[static_cast<size_t>(g)];
    return c.fees.empty() ? 0.0 : c.fees.back();
}

double mean_price(const EquilibriumTable& t, Mechanism m, std::optional<Strategy> s) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : t.cells) {
        if (!c.error.empty() || c.mechanism != m) continue;
        if (s && c.strategy != *s) continue;
        sum += c.price;
        ++n;
    }
    return n ? sum / n : 0.0;
}

}  // namespace

PaperComparison paper_comparison(const std::vector<ScenarioInputs>& inputs,
                                 const std::vector<ScenarioCurves>& curves,
                                 const EquilibriumTable& table) {
    PaperComparison out;
    const std::map<std::string, double> true_targets{
        {"ST", 50.0}, {"CT", 9.0}, {"LW", 8.0}, {"NZE", 10.0}};
    for (const auto& in : inputs) {
        auto it = true_targets.find(in.name);
        if (it == true_targets.end()) continue;
        double eq = true_equilibrium(in.aggregate, in.requirement.demand_mw,
                                     in.requirement.ceiling_gbp_per_mw_h);
        out.rows.push_back({"true_equilibrium_" + in.name, it->second, eq});
    }
    for (size_t i = 0; i < inputs.size() && i < curves.size(); ++i) {
        if (inputs[i].name != "CT") continue;
        const auto& c = curves[i];
        out.rows.push_back({"hp_full_potential_fee_CT", 8.0, saturation_fee(c.hp)});
        out.rows.push_back({"ev_full_potential_fee_CT", 11.0, saturation_fee(c.ev)});
        out.rows.push_back({"ic_full_potential_fee_CT", 30.0, saturation_fee(c.ic)});
        out.rows.push_back({"ees_entry_fee_CT", 50.0, entry_fee(c.ees)});
    }
    if (!table.cells.empty()) {
        out.rows.push_back(
            {"mean_price_pab_op", 12.4, mean_price(table, Mechanism::Pab, Strategy::Overpricing)});
        out.rows.push_back({"mean_price_pac_us", 9.6,
                            mean_price(table, Mechanism::Pac, Strategy::Understatement)});
        out.rows.push_back({"mean_price_dra_ub", 9.3,
                            mean_price(table, Mechanism::Dra, Strategy::Underbidding)});
        out.rows.push_back({"mean_price_vcg", 9.0, mean_price(table, Mechanism::Vcg, std::nullopt)});

        auto benefit = [&](Mechanism m, std::optional<Strategy> s) {
            double sum = 0.0;
            int n = 0;
            for (const auto& c : table.cells) {
                if (!c.error.empty() || c.mechanism != m) continue;
                if (s && c.strategy != *s) continue;
                sum += (c.ceiling - c.price) * c.demand_mw * c.window_hours;
                ++n;
            }
            return n ? sum / n : 0.0;
        };
        out.rows.push_back({"dso_benefit_pab_op", 188.0,
                            benefit(Mechanism::Pab, Strategy::Overpricing)});
        out.rows.push_back({"dso_benefit_pac_us", 202.0,
                            benefit(Mechanism::Pac, Strategy::Understatement)});
        out.rows.push_back({"dso_benefit_dra_ub", 203.5,
                            benefit(Mechanism::Dra, Strategy::Underbidding)});
        out.rows.push_back({"dso_benefit_vcg", 205.0, benefit(Mechanism::Vcg, std::nullopt)});

        auto share = [&](Mechanism m, Strategy s, const char* label) {
            CostBenefit cb = pooled_cost_benefit(table, m, s, label);
            return 100.0 * cb.profit_share;
        };
        out.rows.push_back(
            {"profit_share_pct_pab_op", 53.3, share(Mechanism::Pab, Strategy::Overpricing, "pab")});
        out.rows.push_back({"profit_share_pct_pac_us", 43.3,
                            share(Mechanism::Pac, Strategy::Understatement, "pac")});
        out.rows.push_back({"profit_share_pct_dra_ub", 41.4,
                            share(Mechanism::Dra, Strategy::Underbidding, "dra")});
        double vcg_share = 0.0;
        {
            double rev = 0.0, prof = 0.0;
            for (auto s : {Strategy::Overpricing, Strategy::Understatement,
                           Strategy::Underbidding}) {
                CostBenefit cb = pooled_cost_benefit(table, Mechanism::Vcg, s, "vcg");
                for (const auto& l : cb.lines) {
                    if (l.provider == "unserved") continue;
                    rev += l.revenue_gbp_day;
                    prof += l.profit_gbp_day;
                }
            }
            vcg_share = rev > 1e-12 ? 100.0 * prof / rev : 0.0;
        }
        out.rows.push_back({"profit_share_pct_vcg", 39.5, vcg_share});
    }
    return out;
}

void write_curves_csv(const std::string& path, const ScenarioInputs& in) {
    auto os = open_out(path);
    os << "fee_gbp_mw_h,domestic_mw,ees_mw,ic_mw,aggregate_mw\n";
    for (int g = 0; g < in.aggregate.size(); ++g) {
        size_t k = static_cast<size_t>(g);
        os << format_double(in.aggregate.fees[k]) << "," << format_double(in.domestic.capacities[k])
           << "," << format_double(in.storage.capacities[k]) << ","
           << format_double(in.industrial.capacities[k]) << ","
           << format_double(in.aggregate.capacities[k]) << "\n";
    }
}

ScenarioInputs read_curves_csv(const std::string& path, const std::string& scenario_name) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open curves file");
    ScenarioInputs in;
    in.name = scenario_name;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(path + ": empty curves file");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 5)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 5 columns");
        try {
            in.domestic.fees.push_back(std::stod(f[0]));
            in.domestic.capacities.push_back(std::stod(f[1]));
            in.storage.fees.push_back(std::stod(f[0]));
            in.storage.capacities.push_back(std::stod(f[2]));
            in.industrial.fees.push_back(std::stod(f[0]));
            in.industrial.capacities.push_back(std::stod(f[3]));
            in.aggregate.fees.push_back(std::stod(f[0]));
            in.aggregate.capacities.push_back(std::stod(f[4]));
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (in.aggregate.fees.empty()) throw ConfigError(path + ": no curve rows");
    in.prices.levels = in.aggregate.fees;
    in.prices.ceiling = in.aggregate.fees.back();
    in.domestic.validate();
    in.storage.validate();
    in.industrial.validate();
    in.aggregate.validate();
    return in;
}

void write_equilibria_csv(const std::string& path, const EquilibriumTable& table) {
    auto os = open_out(path);
    os << "scenario,mechanism,strategy,agents,true_price,demand_mw,ceiling,window_hours,"
          "price,converged,iterations,unmet_mw,accepted_domestic_mw,accepted_ees_mw,"
          "accepted_ic_mw,cost_domestic,cost_ees,cost_ic,error\n";
    for (const auto& c : table.cells) {
        os << c.scenario << "," << mechanism_name(c.mechanism) << "," << strategy_name(c.strategy)
           << "," << c.agent_count << "," << format_double(c.true_price) << ","
           << format_double(c.demand_mw) << "," << format_double(c.ceiling) << ","
           << format_double(c.window_hours) << "," << format_double(c.price) << ","
           << (c.converged ? 1 : 0) << "," << c.iterations << "," << format_double(c.unmet_mw);
        for (int k = 0; k < 3; ++k) os << "," << format_double(c.accepted_mw[k]);
        for (int k = 0; k < 3; ++k) os << "," << format_double(c.accepted_cost[k]);
        os << "," << sanitize_csv(c.error) << "\n";
    }
}

EquilibriumTable read_equilibria_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open equilibrium table");
    EquilibriumTable table;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(path + ": empty equilibrium table");
    if (line.rfind("scenario,", 0) != 0)
        throw ConfigError(path + ": unrecognised header (schema mismatch)");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 19)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 19 columns");
        SweepCell c;
        try {
            c.scenario = f[0];
            c.mechanism = mechanism_from_string(f[1]);
            c.strategy = strategy_from_string(f[2]);
            c.agent_count = std::stoi(f[3]);
            c.true_price = std::stod(f[4]);
            c.demand_mw = std::stod(f[5]);
            c.ceiling = std::stod(f[6]);
            c.window_hours = std::stod(f[7]);
            c.price = std::stod(f[8]);
            c.converged = f[9] == "1";
            c.iterations = std::stoi(f[10]);
            c.unmet_mw = std::stod(f[11]);
            for (int k = 0; k < 3; ++k) c.accepted_mw[k] = std::stod(f[12 + static_cast<size_t>(k)]);
            for (int k = 0; k < 3; ++k)
                c.accepted_cost[k] = std::stod(f[15 + static_cast<size_t>(k)]);
            c.error = f[18];
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        table.cells.push_back(std::move(c));
    }
    return table;
}

namespace {

void write_price_stats_csv(const std::string& path, const PriceStats& stats) {
    auto os = open_out(path);
    os << "mechanism,strategy,cells,min,q1,median,q3,max,mean\n";
    for (const auto& r : stats.rows) {
        os << mechanism_name(r.mechanism) << "," << strategy_name(r.strategy) << "," << r.cells
           << "," << format_double(r.min) << "," << format_double(r.q1) << ","
           << format_double(r.median) << "," << format_double(r.q3) << "," << format_double(r.max)
           << "," << format_double(r.mean) << "\n";
    }
}

void write_cost_benefit_csv(const std::string& path, const std::vector<CostBenefit>& rows) {
    auto os = open_out(path);
    os << "label,price,dso_cost_gbp_day,dso_benefit_gbp_day,provider,revenue_gbp_day,"
          "cost_gbp_day,profit_gbp_day,profit_share\n";
    for (const auto& cb : rows) {
        for (const auto& l : cb.lines) {
            os << cb.label << "," << format_double(cb.price) << ","
               << format_double(cb.dso_cost_gbp_day) << "," << format_double(cb.dso_benefit_gbp_day)
               << "," << l.provider << "," << format_double(l.revenue_gbp_day) << ","
               << format_double(l.cost_gbp_day) << "," << format_double(l.profit_gbp_day) << ","
               << format_double(cb.profit_share) << "\n";
        }
    }
}

void write_comparison_csv(const std::string& path, const PaperComparison& cmp) {
    auto os = open_out(path);
    os << "quantity,published,computed,deviation\n";
    for (const auto& r : cmp.rows) {
        os << r.quantity << "," << format_double(r.published) << "," << format_double(r.computed)
           << "," << format_double(r.computed - r.published) << "\n";
    }
}

}  // namespace

void emit(const ReportArtifacts& artifacts, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError(out_dir + ": cannot create output directory: " + ec.message());

    for (size_t i = 0; i < artifacts.inputs.size(); ++i) {
        const auto& in = artifacts.inputs[i];
        write_curves_csv(out_dir + "/curves_" + in.name + ".csv", in);
        if (i < artifacts.curves.size()) {
            const auto& c = artifacts.curves[i];
            auto os = open_out(out_dir + "/curves_assets_" + in.name + ".csv");
            os << "fee_gbp_mw_h,hp_mw,ev_mw,ees_mw,ic_mw\n";
            for (int g = 0; g < c.hp.size(); ++g) {
                size_t k = static_cast<size_t>(g);
                os << format_double(c.hp.fees[k]) << "," << format_double(c.hp.capacities[k])
                   << "," << format_double(c.ev.capacities[k]) << ","
                   << format_double(c.ees.capacities[k]) << ","
                   << format_double(c.ic.capacities[k]) << "\n";
            }
        }
    }

    write_equilibria_csv(out_dir + "/equilibria.csv", artifacts.table);
    PriceStats stats = price_stats(artifacts.table);
    write_price_stats_csv(out_dir + "/price_stats.csv", stats);

    std::vector<CostBenefit> cb_rows;
    if (!artifacts.table.cells.empty()) {
        struct Pick {
            Mechanism m;
            Strategy s;
            const char* label;
        };
        const Pick picks[] = {
            {Mechanism::Pab, Strategy::Overpricing, "pab(op)"},
            {Mechanism::Pac, Strategy::Understatement, "pac(us)"},
            {Mechanism::Dra, Strategy::Underbidding, "dra(ub)"},
            {Mechanism::Vcg, Strategy::Overpricing, "vcg(op)"},
            {Mechanism::Vcg, Strategy::Understatement, "vcg(us)"},
            {Mechanism::Vcg, Strategy::Underbidding, "vcg(ub)"},
        };
        for (const auto& p : picks) {
            try {
                cb_rows.push_back(pooled_cost_benefit(artifacts.table, p.m, p.s, p.label));
            } catch (const ConfigError&) {
                // mechanism/strategy not present in this run
            }
        }
        for (const auto& c : artifacts.table.cells)
            if (c.error.empty()) cb_rows.push_back(cost_benefit(c));
    }
    write_cost_benefit_csv(out_dir + "/cost_benefit.csv", cb_rows);

    PaperComparison cmp = paper_comparison(artifacts.inputs, artifacts.curves, artifacts.table);
    write_comparison_csv(out_dir + "/paper_comparison.csv", cmp);

    ordered_json summary;
    summary["schema_version"] = kSummarySchemaVersion;
    summary["scenarios"] = ordered_json::array();
    for (const auto& in : artifacts.inputs) {
        ordered_json s;
        s["name"] = in.name;
        s["demand_mw"] = in.requirement.demand_mw;
        s["ceiling"] = in.requirement.ceiling_gbp_per_mw_h;
        s["true_equilibrium"] = true_equilibrium(in.aggregate, in.requirement.demand_mw,
                                                 in.requirement.ceiling_gbp_per_mw_h);
        summary["scenarios"].push_back(s);
    }
    summary["price_stats"] = ordered_json::array();
    for (const auto& r : stats.rows) {
        ordered_json s;
        s["mechanism"] = mechanism_name(r.mechanism);
        s["strategy"] = strategy_name(r.strategy);
        s["cells"] = r.cells;
        s["min"] = r.min;
        s["q1"] = r.q1;
        s["median"] = r.median;
        s["q3"] = r.q3;
        s["max"] = r.max;
        s["mean"] = r.mean;
        summary["price_stats"].push_back(s);
    }
    summary["cost_benefit"] = ordered_json::array();
    for (const auto& cb : cb_rows) {
        if (cb.label.find('/') != std::string::npos) continue;  // per-cell rows stay in the CSV
        ordered_json s;
        s["label"] = cb.label;
        s["price"] = cb.price;
        s["dso_cost_gbp_day"] = cb.dso_cost_gbp_day;
        s["dso_benefit_gbp_day"] = cb.dso_benefit_gbp_day;
        s["profit_share"] = cb.profit_share;
        summary["cost_benefit"].push_back(s);
    }
    summary["paper_comparison"] = ordered_json::array();
    for (const auto& r : cmp.rows) {
        ordered_json s;
        s["quantity"] = r.quantity;
        s["published"] = r.published;
        s["computed"] = r.computed;
        summary["paper_comparison"].push_back(s);
    }
    auto os = open_out(out_dir + "/summary.json");
    os << summary.dump(2) << "\n";
}

}  // namespace flexmarket
