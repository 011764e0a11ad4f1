#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flexmarket/offer_curve.hpp"
#include "flexmarket/scenario.hpp"

namespace flexmarket {

// Quadratic objective/constraint terms (comfort and nondelivery penalties,
// battery loss curve, DSR cost curve) are replaced by outer tangent cuts on
// their epigraphs, so every dispatch problem solves as an LP or MILP. Cuts
// come from linearize_quadratic with this many segments by default; offer
// curves are read at whole-pound granularity, which the resulting sub-percent
// cost error cannot move.
inline constexpr int kDefaultSegments = 16;

struct HpDispatch {
    double flexible_mw = 0.0;
    std::vector<double> heating_mw;  // aggregate electrical HP load per interval
    std::vector<std::vector<double>> indoor_c;       // per dwelling type
    std::vector<std::vector<double>> deviation_c;    // per dwelling type, +/- band exits
    double objective_gbp = 0.0;
};

struct EvDispatch {
    double flexible_mw = 0.0;
    std::vector<double> terminal_mw;   // charging drawn from the network
    std::vector<double> battery_mw;    // charging reaching the batteries
    std::vector<double> unmet_mwh;     // charge-by shortfall per interval
    double objective_gbp = 0.0;
};

struct EesDispatch {
    double flexible_mw = 0.0;
    std::vector<double> net_mw;  // charge positive, discharge negative
    double depth_of_discharge = 0.0;
    int segment = 0;  // 0 = idle, 1..10 = DoD decile
    double objective_gbp = 0.0;
};

struct IcDispatch {
    double flexible_mw = 0.0;
    std::vector<double> recovery_mw;  // per interval of the recovery window
    double objective_gbp = 0.0;
};

HpDispatch hp_flexibility(const HpScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments = kDefaultSegments);
EvDispatch ev_flexibility(const EvScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments = kDefaultSegments);
EesDispatch ees_flexibility(const EesScenario& s, const TimeGrid& grid, double fee, const Window& fw);
IcDispatch ic_flexibility(const IcScenario& s, const TimeGrid& grid, double fee, const Window& fw,
                          int segments = kDefaultSegments);

enum class AssetClass { HeatPumps, Evs, Ees, IndustrialDsr };
std::string asset_class_name(AssetClass a);

// One dispatch solve per price level, clamped nondecreasing. Dips beyond
// 1e-6 MW are treated as solver faults and throw; smaller ones are repaired
// and counted.
struct CurveBuildStats {
    int monotone_repairs = 0;
    double largest_dip_mw = 0.0;
};
OfferCurve offer_curve(const ScenarioBundle& bundle, AssetClass asset, int jobs = 1,
                       CurveBuildStats* stats = nullptr);

struct ScenarioCurves {
    OfferCurve hp, ev, ees, ic;
    OfferCurve aggregate;
};
ScenarioCurves build_all_curves(const ScenarioBundle& bundle, int jobs = 1);

}  // namespace flexmarket
