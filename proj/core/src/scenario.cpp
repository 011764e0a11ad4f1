#include "flexmarket/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <numbers>

#include "flexmarket/errors.hpp"

namespace flexmarket {

namespace {

double hour_mid(const TimeGrid& grid, int t) {
    return (t + 0.5) * grid.step_hours;
}

// Linear interpolation on a closed 24h clock.
double ramp(double h, double h0, double h1, double v0, double v1) {
    return v0 + (v1 - v0) * (h - h0) / (h1 - h0);
}

}  // namespace

Profile default_tariff(const TimeGrid& grid) {
    // Flat 100 GBP/MWh with an evening peak after the service window. A peak
    // overlapping the window would pay customers to do what the service
    // already asks of them, and a multiplier much beyond 1.25 would hand
    // storage a free arbitrage cycle; 1.16 over 18:30-22:30 prices the
    // post-window recovery without either artefact.
    Profile p;
    p.unit = "GBP/MWh";
    p.values.resize(static_cast<size_t>(grid.count));
    for (int t = 0; t < grid.count; ++t) {
        double h = hour_mid(grid, t);
        double v = 100.0;
        if (h >= 18.5 && h < 22.5) v *= 1.16;
        p.values[static_cast<size_t>(t)] = v;
    }
    return p;
}

Profile default_ambient(const TimeGrid& grid) {
    Profile p;
    p.unit = "degC";
    p.values.resize(static_cast<size_t>(grid.count));
    constexpr double lo = 2.0, hi = 8.0;
    for (int t = 0; t < grid.count; ++t) {
        double h = hour_mid(grid, t);
        double v;
        if (h >= 6.0 && h <= 15.0) {
            // warming arc 06:00 -> 15:00
            v = lo + (hi - lo) * 0.5 * (1.0 - std::cos(std::numbers::pi * (h - 6.0) / 9.0));
        } else {
            // cooling arc 15:00 -> 06:00 (+24h wrap)
            double x = h > 15.0 ? h - 15.0 : h + 9.0;
            v = lo + (hi - lo) * 0.5 * (1.0 + std::cos(std::numbers::pi * x / 15.0));
        }
        p.values[static_cast<size_t>(t)] = v;
    }
    return p;
}

Profile default_plug_share(const TimeGrid& grid) {
    Profile p;
    p.unit = "pu";
    p.values.resize(static_cast<size_t>(grid.count));
    constexpr double hi = 0.95, lo = 0.25;
    for (int t = 0; t < grid.count; ++t) {
        double h = hour_mid(grid, t);
        double v;
        if (h < 6.0 || h >= 20.0)
            v = hi;
        else if (h < 10.0)
            v = ramp(h, 6.0, 10.0, hi, lo);
        else if (h < 16.0)
            v = lo;
        else
            v = ramp(h, 16.0, 20.0, lo, hi);
        p.values[static_cast<size_t>(t)] = v;
    }
    return p;
}

Profile default_ev_demand(const TimeGrid& grid, double daily_energy_mwh) {
    // Uncontrolled charging shape: flat trickle by day, commuter arrivals
    // ramping through the service window to an evening plateau, decaying
    // overnight. Normalised to the fleet's daily energy.
    Profile p;
    p.unit = "MW";
    p.values.resize(static_cast<size_t>(grid.count));
    double sum = 0.0;
    for (int t = 0; t < grid.count; ++t) {
        double h = hour_mid(grid, t);
        double s;
        if (h < 6.0)
            s = 0.35;
        else if (h < 16.35)
            s = 0.5;
        else if (h < 17.35)
            s = ramp(h, 16.35, 17.35, 0.5, 1.75);
        else if (h < 21.5)
            s = 1.75;
        else
            s = ramp(h, 21.5, 24.0, 1.75, 0.35);
        p.values[static_cast<size_t>(t)] = s;
        sum += s * grid.step_hours;
    }
    for (auto& v : p.values) v *= daily_energy_mwh / sum;
    return p;
}

void HpScenario::validate(const TimeGrid& grid) const {
    if (count < 0) throw ConfigError("heat_pumps.count: negative");
    if (count > 0 && dwellings.empty()) throw ConfigError("heat_pumps.dwellings: empty");
    double share_sum = 0.0;
    for (const auto& d : dwellings) {
        if (d.share <= 0 || d.conductance_mw_per_c <= 0 || d.capacitance_mwh_per_c <= 0 ||
            d.hp_rating_mw <= 0)
            throw ConfigError("heat_pumps.dwellings." + d.name + ": all parameters must be > 0");
        share_sum += d.share;
    }
    if (count > 0 && std::fabs(share_sum - 1.0) > 1e-9)
        throw ConfigError("heat_pumps.dwellings: shares must sum to 1");
    if (!(comfort_min_c < comfort_max_c))
        throw ConfigError("heat_pumps: comfort_min_c must be below comfort_max_c");
    if (conversion_factor < 1.0 || conversion_factor > 4.0)
        throw ConfigError("heat_pumps.conversion_factor: expected within [1, 4]");
    if (peak_factor < 1.0) throw ConfigError("heat_pumps.peak_factor: must be >= 1");
    tariff_gbp_per_mwh.validate(grid, "heat_pumps.tariff");
    ambient_c.validate(grid, "heat_pumps.ambient");
}

void EvScenario::validate(const TimeGrid& grid) const {
    if (count < 0) throw ConfigError("evs.count: negative");
    if (count == 0) return;
    plug_share.validate(grid, "evs.plug_share");
    for (double v : plug_share.values)
        if (v < 0.0 || v > 1.0) throw ConfigError("evs.plug_share: values must lie in [0,1]");
    uncontrolled_demand_mw.validate(grid, "evs.uncontrolled_demand");
    for (int t = 0; t < grid.count; ++t)
        if (plug_share[t] <= 0.0 && uncontrolled_demand_mw[t] > 1e-9)
            throw ConfigError("evs: uncontrolled demand with no EV plugged in at interval " +
                              std::to_string(t));
    if (charger_capacity_mw <= 0.0) throw ConfigError("evs.charger capacity must be positive");
    if (daily_energy_mwh <= 0.0) throw ConfigError("evs.daily energy must be positive");
    if (battery_voc_v <= 0.0) throw ConfigError("evs.battery_voc_v must be positive");
    if (battery_rint_ohm < 0.0) throw ConfigError("evs.battery_rint_ohm must be >= 0");
    departure_window.validate(grid);
    tariff_gbp_per_mwh.validate(grid, "evs.tariff");
}

void EesScenario::validate(const TimeGrid& grid) const {
    if (power_mw < 0.0) throw ConfigError("ees.power: negative");
    if (power_mw == 0.0) return;
    if (energy_mwh <= 0.0) throw ConfigError("ees.energy must be positive");
    if (efficiency_charge <= 0.0 || efficiency_charge > 1.0 || efficiency_discharge <= 0.0 ||
        efficiency_discharge > 1.0)
        throw ConfigError("ees: efficiencies must lie in (0,1]");
    if (cycle_life.size() != 10) throw ConfigError("ees.cycle_life: expected 10 deciles");
    for (size_t i = 0; i < cycle_life.size(); ++i) {
        if (cycle_life[i] <= 0.0) throw ConfigError("ees.cycle_life: must be positive");
        if (i > 0 && cycle_life[i] >= cycle_life[i - 1])
            throw ConfigError("ees.cycle_life: must be strictly decreasing in DoD");
    }
    tariff_gbp_per_mwh.validate(grid, "ees.tariff");
}

void IcScenario::validate(const TimeGrid& grid) const {
    if (capacity_mw < 0.0) throw ConfigError("ic.capacity: negative");
    if (capacity_mw == 0.0) return;
    if (quad_cost_gbp_per_mw2 < 0.0 || lin_cost_gbp_per_mw < 0.0)
        throw ConfigError("ic: cost coefficients must be >= 0");
    if (energy_recovery_factor < 0.0 || energy_recovery_factor > 1.5)
        throw ConfigError("ic.energy_recovery_factor: expected within [0, 1.5]");
    if (power_recovery_factor <= 0.0)
        throw ConfigError("ic.power_recovery_factor: must be positive");
    recovery_window.validate(grid);
    tariff_gbp_per_mwh.validate(grid, "ic.tariff");
}

void ServiceRequirement::validate(const TimeGrid& grid) const {
    if (demand_mw <= 0.0) throw ConfigError("service.demand must be positive");
    if (ceiling_gbp_per_mw_h <= 0.0) throw ConfigError("service.ceiling must be positive");
    window.validate(grid);
}

void ScenarioBundle::validate() const {
    grid.validate();
    prices.validate();
    service.validate(grid);
    hp.validate(grid);
    ev.validate(grid);
    ees.validate(grid);
    ic.validate(grid);
    // Recovery must start after the availability window ends.
    if (ic.capacity_mw > 0.0 && ic.recovery_window.start_index <= service.window.end_index)
        throw ConfigError("ic.recovery_window must start after the service window");
}

namespace {

struct UptakeRow {
    const char* name;
    int evs;
    int hps;
    double ees_kw;
    double ic_kw;
};

// 2030 uptake per customer-engagement scenario.
constexpr UptakeRow kUptake[] = {
    {"ST", 2528, 782, 134.0, 616.0},
    {"CT", 5117, 3454, 236.0, 901.0},
    {"LW", 6680, 4207, 729.0, 869.0},
    {"NZE", 7157, 2015, 736.0, 928.0},
};

struct DwellingRow {
    const char* name;
    double share;
    double conductance_w_per_c;
    double capacitance_kwh_per_c;
};

constexpr DwellingRow kDwellings[] = {
    {"detached", 0.068, 160.3, 10.0},
    {"semi_detached", 0.348, 111.4, 6.5},
    {"terraced", 0.309, 76.4, 5.0},
    {"flat", 0.275, 38.1, 4.0},
};

constexpr double kChargerKwPerEv = 6.0;
constexpr double kDailyKwhPerEv = 4.8;
constexpr double kRatingDesignAmbientC = -5.0;

}  // namespace

ScenarioBundle bundled_scenario(const std::string& name) {
    const UptakeRow* row = nullptr;
    for (const auto& r : kUptake)
        if (name == r.name) row = &r;
    if (!row) throw ConfigError("unknown bundled scenario '" + name + "'");

    ScenarioBundle b;
    b.name = name;
    b.grid = TimeGrid::half_hourly_day();
    b.prices = PriceGrid::integer_fees(50.0);
    b.service.demand_mw = 2.5;
    b.service.ceiling_gbp_per_mw_h = 50.0;
    b.service.window = Window::from_hours(b.grid, 16.5, 18.5);

    Profile tariff = default_tariff(b.grid);

    b.hp.count = row->hps;
    b.hp.conversion_factor = 3.0;
    b.hp.peak_factor = 2.0;
    b.hp.comfort_min_c = 18.0;
    b.hp.comfort_max_c = 22.0;
    b.hp.discomfort_gbp_per_c2h = 1000.0;
    b.hp.tariff_gbp_per_mwh = tariff;
    b.hp.ambient_c = default_ambient(b.grid);
    double mid = 0.5 * (b.hp.comfort_min_c + b.hp.comfort_max_c);
    for (const auto& d : kDwellings) {
        DwellingParams dp;
        dp.name = d.name;
        dp.share = d.share;
        dp.conductance_mw_per_c = d.conductance_w_per_c * 1e-6;
        dp.capacitance_mwh_per_c = d.capacitance_kwh_per_c * 1e-3;
        // Rating sized so steady-state heating at the design ambient fits.
        dp.hp_rating_mw = dp.conductance_mw_per_c * (mid - kRatingDesignAmbientC) /
                          b.hp.conversion_factor;
        b.hp.dwellings.push_back(dp);
    }

    b.ev.count = row->evs;
    b.ev.charger_capacity_mw = row->evs * kChargerKwPerEv * 1e-3;
    b.ev.daily_energy_mwh = row->evs * kDailyKwhPerEv * 1e-3;
    b.ev.plug_share = default_plug_share(b.grid);
    b.ev.uncontrolled_demand_mw = default_ev_demand(b.grid, b.ev.daily_energy_mwh);
    b.ev.departure_window = Window::from_hours(b.grid, 2.0, 14.0);
    b.ev.tariff_gbp_per_mwh = tariff;

    b.ees.power_mw = row->ees_kw * 1e-3;
    b.ees.energy_mwh = 2.0 * b.ees.power_mw;
    b.ees.tariff_gbp_per_mwh = tariff;

    b.ic.capacity_mw = row->ic_kw * 1e-3;
    b.ic.quad_cost_gbp_per_mw2 = 17.65 / b.ic.capacity_mw;
    b.ic.lin_cost_gbp_per_mw = 23.52;
    b.ic.energy_recovery_factor = 1.0;
    b.ic.power_recovery_factor = 0.5;
    b.ic.recovery_window = Window::from_hours(b.grid, 18.5, 22.5);
    // The published DSR trial cost function already prices the recovered
    // energy; the I&C tariff term defaults to zero and can be overridden.
    b.ic.tariff_gbp_per_mwh = Profile::constant(b.grid, 0.0, "GBP/MWh");

    b.validate();
    return b;
}

std::vector<std::string> bundled_scenario_names() { return {"ST", "CT", "LW", "NZE"}; }

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& msg) {
    throw ConfigError("line " + std::to_string(node.Mark().line + 1) + ": " + msg);
}

double num_field(const YAML::Node& parent, const std::string& key, double fallback,
                 bool required = false) {
    auto n = parent[key];
    if (!n) {
        if (required) fail_at(parent, "missing required field '" + key + "'");
        return fallback;
    }
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        fail_at(n, "field '" + key + "' is not a number");
    }
}

Profile profile_field(const YAML::Node& parent, const std::string& key, const TimeGrid& grid,
                      const Profile& fallback, const std::string& unit) {
    auto n = parent[key];
    if (!n) return fallback;
    if (!n.IsSequence()) fail_at(n, "field '" + key + "' must be an array");
    Profile p;
    p.unit = unit;
    for (const auto& v : n) {
        try {
            p.values.push_back(v.as<double>());
        } catch (const YAML::Exception&) {
            fail_at(v, "field '" + key + "' contains a non-numeric entry");
        }
    }
    if (p.size() != grid.count)
        fail_at(n, "field '" + key + "': expected " + std::to_string(grid.count) +
                       " values, got " + std::to_string(p.size()));
    return p;
}

double parse_clock(const YAML::Node& n) {
    std::string s;
    try {
        s = n.as<std::string>();
    } catch (const YAML::Exception&) {
        fail_at(n, "expected a clock time like \"16:30\"");
    }
    auto colon = s.find(':');
    if (colon == std::string::npos) fail_at(n, "expected a clock time like \"16:30\"");
    try {
        double h = std::stod(s.substr(0, colon));
        double m = std::stod(s.substr(colon + 1));
        return h + m / 60.0;
    } catch (const std::exception&) {
        fail_at(n, "malformed clock time '" + s + "'");
    }
}

Window window_field(const YAML::Node& parent, const std::string& key, const TimeGrid& grid,
                    const Window& fallback) {
    auto n = parent[key];
    if (!n) return fallback;
    if (!n["start"] || !n["end"]) fail_at(n, "window '" + key + "' needs start and end");
    return Window::from_hours(grid, parse_clock(n["start"]), parse_clock(n["end"]));
}

}  // namespace

ScenarioBundle load_scenario(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError(path + ": cannot open scenario file");
    } catch (const YAML::Exception& e) {
        throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }

    try {
        // Start from the closest bundled scenario when `base` is given so a
        // file only has to state what differs.
        std::string base = root["base"] ? root["base"].as<std::string>() : "CT";
        ScenarioBundle b = bundled_scenario(base);
        if (root["name"]) b.name = root["name"].as<std::string>();

        if (auto g = root["grid"]) {
            double step = num_field(g, "step_hours", b.grid.step_hours);
            double horizon = num_field(g, "horizon_hours", b.grid.horizon_hours);
            b.grid = TimeGrid::make(step, horizon);
        }
        if (auto pg = root["prices"]) {
            double ceiling = num_field(pg, "ceiling", b.prices.ceiling);
            b.prices = PriceGrid::integer_fees(ceiling);
        }
        if (auto s = root["service"]) {
            b.service.demand_mw = num_field(s, "demand_mw", b.service.demand_mw);
            b.service.ceiling_gbp_per_mw_h =
                num_field(s, "ceiling_gbp_per_mw_h", b.service.ceiling_gbp_per_mw_h);
            b.service.window = window_field(s, "window", b.grid, b.service.window);
            if (std::fabs(b.service.ceiling_gbp_per_mw_h - b.prices.ceiling) > 1e-9)
                b.prices = PriceGrid::integer_fees(b.service.ceiling_gbp_per_mw_h);
        }

        Profile shared_tariff =
            profile_field(root, "tariff_gbp_per_mwh", b.grid, default_tariff(b.grid), "GBP/MWh");
        b.hp.tariff_gbp_per_mwh = shared_tariff;
        b.ev.tariff_gbp_per_mwh = shared_tariff;
        b.ees.tariff_gbp_per_mwh = shared_tariff;

        if (auto h = root["heat_pumps"]) {
            b.hp.count = static_cast<int>(num_field(h, "count", b.hp.count));
            b.hp.conversion_factor = num_field(h, "conversion_factor", b.hp.conversion_factor);
            b.hp.peak_factor = num_field(h, "peak_factor", b.hp.peak_factor);
            b.hp.comfort_min_c = num_field(h, "comfort_min_c", b.hp.comfort_min_c);
            b.hp.comfort_max_c = num_field(h, "comfort_max_c", b.hp.comfort_max_c);
            b.hp.discomfort_gbp_per_c2h =
                num_field(h, "discomfort_gbp_per_c2h", b.hp.discomfort_gbp_per_c2h);
            b.hp.ambient_c = profile_field(h, "ambient_c", b.grid, b.hp.ambient_c, "degC");
            b.hp.tariff_gbp_per_mwh =
                profile_field(h, "tariff_gbp_per_mwh", b.grid, b.hp.tariff_gbp_per_mwh, "GBP/MWh");
            if (auto ds = h["dwellings"]) {
                if (!ds.IsSequence()) fail_at(ds, "heat_pumps.dwellings must be a list");
                b.hp.dwellings.clear();
                double mid = 0.5 * (b.hp.comfort_min_c + b.hp.comfort_max_c);
                for (const auto& d : ds) {
                    DwellingParams dp;
                    dp.name = d["name"] ? d["name"].as<std::string>() : "dwelling";
                    dp.share = num_field(d, "share", 0.0, true);
                    dp.conductance_mw_per_c =
                        num_field(d, "conductance_w_per_c", 0.0, true) * 1e-6;
                    dp.capacitance_mwh_per_c =
                        num_field(d, "capacitance_kwh_per_c", 0.0, true) * 1e-3;
                    double rating_kw = num_field(d, "rating_kw", 0.0);
                    dp.hp_rating_mw =
                        rating_kw > 0.0
                            ? rating_kw * 1e-3
                            : dp.conductance_mw_per_c * (mid - kRatingDesignAmbientC) /
                                  b.hp.conversion_factor;
                    b.hp.dwellings.push_back(dp);
                }
            }
        }
        if (auto e = root["evs"]) {
            b.ev.count = static_cast<int>(num_field(e, "count", b.ev.count));
            double charger_kw = num_field(e, "charger_kw_per_ev", kChargerKwPerEv);
            b.ev.charger_capacity_mw = num_field(e, "charger_capacity_mw", b.ev.count * charger_kw * 1e-3);
            double per_ev_kwh = num_field(e, "daily_energy_kwh_per_ev", kDailyKwhPerEv);
            b.ev.daily_energy_mwh = num_field(e, "daily_energy_mwh", b.ev.count * per_ev_kwh * 1e-3);
            b.ev.battery_rint_ohm = num_field(e, "battery_rint_ohm", b.ev.battery_rint_ohm);
            b.ev.battery_voc_v = num_field(e, "battery_voc_v", b.ev.battery_voc_v);
            b.ev.nondelivery_gbp_per_mwh2h =
                num_field(e, "nondelivery_gbp_per_mwh2h", b.ev.nondelivery_gbp_per_mwh2h);
            b.ev.plug_share = profile_field(e, "plug_share", b.grid, default_plug_share(b.grid), "pu");
            b.ev.uncontrolled_demand_mw =
                profile_field(e, "uncontrolled_demand_mw", b.grid,
                              default_ev_demand(b.grid, b.ev.daily_energy_mwh), "MW");
            b.ev.departure_window = window_field(e, "departure_window", b.grid, b.ev.departure_window);
            b.ev.tariff_gbp_per_mwh =
                profile_field(e, "tariff_gbp_per_mwh", b.grid, b.ev.tariff_gbp_per_mwh, "GBP/MWh");
        }
        if (auto s = root["ees"]) {
            b.ees.power_mw = num_field(s, "power_kw", b.ees.power_mw * 1e3) * 1e-3;
            b.ees.energy_mwh = num_field(s, "energy_kwh", 2.0 * b.ees.power_mw * 1e3) * 1e-3;
            b.ees.efficiency_charge = num_field(s, "efficiency_charge", b.ees.efficiency_charge);
            b.ees.efficiency_discharge =
                num_field(s, "efficiency_discharge", b.ees.efficiency_discharge);
            b.ees.capex_gbp_per_mwh = num_field(s, "capex_gbp_per_kwh", 100.0) * 1e3;
            if (auto cl = s["cycle_life"]) {
                if (!cl.IsSequence()) fail_at(cl, "ees.cycle_life must be an array");
                b.ees.cycle_life.clear();
                for (const auto& v : cl) b.ees.cycle_life.push_back(v.as<double>());
            }
            b.ees.tariff_gbp_per_mwh =
                profile_field(s, "tariff_gbp_per_mwh", b.grid, b.ees.tariff_gbp_per_mwh, "GBP/MWh");
        }
        if (auto i = root["ic"]) {
            b.ic.capacity_mw = num_field(i, "capacity_kw", b.ic.capacity_mw * 1e3) * 1e-3;
            b.ic.quad_cost_gbp_per_mw2 =
                num_field(i, "quad_cost_gbp_per_mw2",
                          b.ic.capacity_mw > 0 ? 17.65 / b.ic.capacity_mw : 0.0);
            b.ic.lin_cost_gbp_per_mw = num_field(i, "lin_cost_gbp_per_mw", b.ic.lin_cost_gbp_per_mw);
            b.ic.energy_recovery_factor =
                num_field(i, "energy_recovery_factor", b.ic.energy_recovery_factor);
            b.ic.power_recovery_factor =
                num_field(i, "power_recovery_factor", b.ic.power_recovery_factor);
            b.ic.recovery_window = window_field(i, "recovery_window", b.grid, b.ic.recovery_window);
            b.ic.tariff_gbp_per_mwh = profile_field(i, "tariff_gbp_per_mwh", b.grid,
                                                    b.ic.tariff_gbp_per_mwh, "GBP/MWh");
        }

        b.validate();
        return b;
    } catch (const YAML::Exception& e) {
        throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace flexmarket
