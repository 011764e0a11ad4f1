// Pipeline driver: `curves` solves the asset dispatch models over the fee
// grid, `game` runs the iterative bidding rounds on those curves, `report`
// turns an equilibrium table into statistics and cost-benefit files. The
// stages hand data over through files so every intermediate is inspectable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "flexmarket/errors.hpp"
#include "flexmarket/flex_models.hpp"
#include "flexmarket/game.hpp"
#include "flexmarket/reporting.hpp"
#include "flexmarket/scenario.hpp"
#include "json.hpp"

namespace fm = flexmarket;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNonConverged = 2;

fm::ScenarioBundle resolve_scenario(const std::string& spec) {
    for (const auto& name : fm::bundled_scenario_names())
        if (spec == name) return fm::bundled_scenario(name);
    std::string path = spec;
    if (!fs::exists(path)) {
        if (const char* dir = std::getenv("FLEXMARKET_CONFIG_DIR")) {
            std::string alt = std::string(dir) + "/" + spec;
            if (fs::exists(alt)) path = alt;
            else if (fs::exists(alt + ".yaml")) path = alt + ".yaml";
        }
    }
    if (!fs::exists(path))
        throw fm::ConfigError("scenario '" + spec +
                              "' is neither bundled (ST, CT, LW, NZE) nor a readable file");
    return fm::load_scenario(path);
}

fm::PriceGrid parse_price_flag(const std::string& flag, double fallback_ceiling) {
    if (flag.empty()) return fm::PriceGrid::integer_fees(fallback_ceiling);
    auto dots = flag.find("..");
    if (dots == std::string::npos)
        throw fm::ConfigError("--prices expects LO..HI, e.g. 1..50");
    double lo = std::stod(flag.substr(0, dots));
    double hi = std::stod(flag.substr(dots + 2));
    if (lo != 1.0)
        throw fm::ConfigError("--prices must start at 1 (whole-pound fee grid)");
    return fm::PriceGrid::integer_fees(hi);
}

void write_meta(const std::string& path, const fm::ScenarioInputs& in) {
    ordered_json j;
    j["schema_version"] = fm::kSummarySchemaVersion;
    j["name"] = in.name;
    j["demand_mw"] = in.requirement.demand_mw;
    j["ceiling"] = in.requirement.ceiling_gbp_per_mw_h;
    j["window_hours"] = in.requirement.window.duration_hours;
    j["window_start_index"] = in.requirement.window.start_index;
    j["window_end_index"] = in.requirement.window.end_index;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw fm::ConfigError(path + ": cannot open for writing");
    os << j.dump(2) << "\n";
}

fm::ScenarioInputs read_curves_with_meta(const std::string& csv_path) {
    fs::path p(csv_path);
    std::string stem = p.stem().string();
    std::string name = stem.rfind("curves_", 0) == 0 ? stem.substr(7) : stem;
    fm::ScenarioInputs in = fm::read_curves_csv(csv_path, name);
    std::string meta_path = (p.parent_path() / ("curves_" + name + ".meta.json")).string();
    std::ifstream is(meta_path);
    if (!is) throw fm::ConfigError(meta_path + ": missing curve metadata (run `curves` first)");
    ordered_json j;
    is >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != fm::kSummarySchemaVersion)
        throw fm::ConfigError(meta_path + ": schema_version mismatch");
    in.name = j["name"].get<std::string>();
    in.requirement.demand_mw = j["demand_mw"].get<double>();
    in.requirement.ceiling_gbp_per_mw_h = j["ceiling"].get<double>();
    fm::TimeGrid grid = fm::TimeGrid::half_hourly_day();
    in.requirement.window.start_index = j["window_start_index"].get<int>();
    in.requirement.window.end_index = j["window_end_index"].get<int>();
    in.requirement.window.duration_hours = j["window_hours"].get<double>();
    in.requirement.window.validate(grid);
    return in;
}

int cmd_curves(const std::vector<std::string>& scenarios, const std::string& prices_flag,
               const std::string& out_dir, int jobs) {
    fs::create_directories(out_dir);
    for (const auto& spec : scenarios) {
        fm::ScenarioBundle bundle = resolve_scenario(spec);
        bundle.prices = parse_price_flag(prices_flag, bundle.service.ceiling_gbp_per_mw_h);
        fm::ScenarioCurves curves = fm::build_all_curves(bundle, jobs);
        fm::ScenarioInputs in = fm::scenario_inputs(bundle, curves);
        fm::write_curves_csv(out_dir + "/curves_" + bundle.name + ".csv", in);
        write_meta(out_dir + "/curves_" + bundle.name + ".meta.json", in);
        {
            std::ofstream os(out_dir + "/curves_assets_" + bundle.name + ".csv",
                             std::ios::binary);
            os << "fee_gbp_mw_h,hp_mw,ev_mw,ees_mw,ic_mw\n";
            for (int g = 0; g < curves.hp.size(); ++g) {
                size_t k = static_cast<size_t>(g);
                os << fm::format_double(curves.hp.fees[k]) << ","
                   << fm::format_double(curves.hp.capacities[k]) << ","
                   << fm::format_double(curves.ev.capacities[k]) << ","
                   << fm::format_double(curves.ees.capacities[k]) << ","
                   << fm::format_double(curves.ic.capacities[k]) << "\n";
            }
        }
        double eq = fm::true_equilibrium(in.aggregate, in.requirement.demand_mw,
                                         in.requirement.ceiling_gbp_per_mw_h);
        std::cout << bundle.name << ": hp " << curves.hp.capacities.back() << " MW, ev "
                  << curves.ev.capacities.back() << " MW, ees " << curves.ees.capacities.back()
                  << " MW, ic " << curves.ic.capacities.back()
                  << " MW; true equilibrium " << eq << " GBP/MW/h\n";
    }
    return 0;
}

int cmd_game(const std::vector<std::string>& curve_files, const std::string& mechanism,
             const std::string& strategy, const std::string& agents_flag, bool full_sweep,
             const std::string& out_dir, int jobs, bool replay) {
    if (curve_files.empty()) throw fm::ConfigError("game: pass at least one --curves file");
    std::vector<fm::ScenarioInputs> inputs;
    for (const auto& f : curve_files) inputs.push_back(read_curves_with_meta(f));

    fm::SweepRequest req;
    req.jobs = jobs;
    for (const auto& in : inputs) req.scenarios.push_back(in.name);
    if (full_sweep) {
        if (!mechanism.empty() || !strategy.empty())
            throw fm::ConfigError("game: --sweep conflicts with --mechanism/--strategy");
        req.mechanisms = {fm::Mechanism::Pab, fm::Mechanism::Pac, fm::Mechanism::Dra,
                          fm::Mechanism::Vcg};
        req.strategies = {fm::Strategy::Overpricing, fm::Strategy::Understatement,
                          fm::Strategy::Underbidding};
    } else {
        if (mechanism.empty() || strategy.empty())
            throw fm::ConfigError("game: give --mechanism and --strategy, or --sweep");
        req.mechanisms = {fm::mechanism_from_string(mechanism)};
        req.strategies = {fm::strategy_from_string(strategy)};
    }
    {
        std::stringstream ss(agents_flag);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            req.agent_counts.push_back(std::stoi(tok));
        }
        if (req.agent_counts.empty()) req.agent_counts = {3, 6, 9, 12};
    }

    fm::EquilibriumTable table = fm::sweep(req, inputs);
    fs::create_directories(out_dir);
    fm::write_equilibria_csv(out_dir + "/equilibria.csv", table);

    bool all_converged = true;
    for (const auto& c : table.cells) {
        if (!c.error.empty()) {
            std::cout << c.scenario << " " << fm::mechanism_name(c.mechanism) << " "
                      << fm::strategy_name(c.strategy) << " n=" << c.agent_count
                      << ": ERROR " << c.error << "\n";
            all_converged = false;
            continue;
        }
        std::cout << c.scenario << " " << fm::mechanism_name(c.mechanism) << " "
                  << fm::strategy_name(c.strategy) << " n=" << c.agent_count << ": price "
                  << c.price << " (true " << c.true_price << ", "
                  << (c.converged ? "converged" : "NOT converged") << " in " << c.iterations
                  << " rounds)\n";
        all_converged &= c.converged;
    }

    if (replay) {
        // Replays are per-cell JSON lines; rerun the cells that need them.
        // Only single-cell requests are worth replaying interactively.
        std::ofstream os(out_dir + "/replay.jsonl", std::ios::binary);
        for (const auto& in : inputs) {
            for (auto mech : req.mechanisms)
                for (auto strat : req.strategies)
                    for (int count : req.agent_counts) {
                        if (count % 3 != 0) continue;
                        int per = count / 3;
                        fm::Portfolio p = fm::distribute(per, per, per, in.domestic, in.storage,
                                                         in.industrial, in.prices);
                        fm::GameConfig cfg;
                        cfg.mechanism = mech;
                        cfg.strategy = strat;
                        cfg.requirement = in.requirement;
                        cfg.prices = in.prices;
                        cfg.record_replay = true;
                        fm::Equilibrium eq = fm::run_game(cfg, p);
                        for (const auto& r : eq.replay) {
                            ordered_json j;
                            j["scenario"] = in.name;
                            j["mechanism"] = fm::mechanism_name(mech);
                            j["strategy"] = fm::strategy_name(strat);
                            j["agents"] = count;
                            j["iteration"] = r.iteration;
                            j["lambda"] = r.lambda;
                            j["unmet_mw"] = r.unmet_mw;
                            j["profits"] = r.profits;
                            j["offer_prices"] = r.offer_prices;
                            j["offer_capacities"] = r.offer_capacities;
                            os << j.dump() << "\n";
                        }
                    }
        }
    }
    return all_converged ? 0 : kExitNonConverged;
}

int cmd_report(const std::string& table_file, const std::vector<std::string>& curve_files,
               const std::string& out_dir) {
    fm::ReportArtifacts artifacts;
    artifacts.table = fm::read_equilibria_csv(table_file);
    for (const auto& f : curve_files) {
        artifacts.inputs.push_back(read_curves_with_meta(f));
        // Per-asset curves ride along when the assets file is present.
        fs::path p(f);
        std::string name = artifacts.inputs.back().name;
        fs::path assets = p.parent_path() / ("curves_assets_" + name + ".csv");
        if (fs::exists(assets)) {
            std::ifstream is(assets);
            std::string line;
            std::getline(is, line);
            fm::ScenarioCurves sc;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::string tok;
                std::vector<double> v;
                while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
                if (v.size() != 5) throw fm::ConfigError(assets.string() + ": expected 5 columns");
                sc.hp.fees.push_back(v[0]);
                sc.hp.capacities.push_back(v[1]);
                sc.ev.fees.push_back(v[0]);
                sc.ev.capacities.push_back(v[2]);
                sc.ees.fees.push_back(v[0]);
                sc.ees.capacities.push_back(v[3]);
                sc.ic.fees.push_back(v[0]);
                sc.ic.capacities.push_back(v[4]);
            }
            artifacts.curves.push_back(std::move(sc));
        }
    }
    fm::emit(artifacts, out_dir);
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demand-side flexibility market simulator"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    auto* curves = app.add_subcommand("curves", "Solve asset models into supply curves");
    std::vector<std::string> scenario_specs;
    std::string prices_flag;
    curves->add_option("--scenario", scenario_specs,
                       "Bundled scenario name (ST, CT, LW, NZE) or a scenario file")
        ->required();
    curves->add_option("--prices", prices_flag, "Fee grid as LO..HI (default 1..ceiling)");
    curves->add_option("--out", out_dir, "Output directory");
    curves->add_option("--jobs", jobs, "Worker threads");

    auto* game = app.add_subcommand("game", "Run the iterative bidding game");
    std::vector<std::string> curve_files;
    std::string mechanism, strategy, agents_flag;
    bool full_sweep = false, replay = false;
    game->add_option("--curves", curve_files, "curves_<name>.csv files from the curves stage")
        ->required();
    game->add_option("--mechanism", mechanism, "pab, pac, dra or vcg");
    game->add_option("--strategy", strategy, "op, us, ub or truthful");
    game->add_option("--agents", agents_flag, "Total agent counts, e.g. 3,6,9,12");
    game->add_flag("--sweep", full_sweep, "All mechanisms x strategies x agent counts");
    game->add_flag("--replay", replay, "Write round-by-round replay logs");
    game->add_option("--out", out_dir, "Output directory");
    game->add_option("--jobs", jobs, "Worker threads");

    auto* report = app.add_subcommand("report", "Statistics and cost-benefit from a table");
    std::string table_file;
    report->add_option("--table", table_file, "equilibria.csv from the game stage")->required();
    report->add_option("--curves", curve_files, "curves_<name>.csv files for context")
        ->required();
    report->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (curves->parsed()) return cmd_curves(scenario_specs, prices_flag, out_dir, jobs);
        if (game->parsed())
            return cmd_game(curve_files, mechanism, strategy, agents_flag, full_sweep, out_dir,
                            jobs, replay);
        if (report->parsed()) return cmd_report(table_file, curve_files, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
