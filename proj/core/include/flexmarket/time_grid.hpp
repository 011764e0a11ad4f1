#pragma once

#include <string>
#include <vector>

namespace flexmarket {

// Half-open daily time grid. The default service day is 48 half-hour
// intervals; interval t covers [t*step_hours, (t+1)*step_hours).
struct TimeGrid {
    double step_hours = 0.5;
    double horizon_hours = 24.0;
    int count = 48;

    static TimeGrid half_hourly_day() { return TimeGrid{0.5, 24.0, 48}; }
    static TimeGrid make(double step_hours, double horizon_hours);

    double interval_start(int t) const { return t * step_hours; }
    // Index of the interval containing clock hour h (h in [0, horizon)).
    int index_of(double hour) const;
    void validate() const;
};

// Inclusive run of interval indices on a TimeGrid.
struct Window {
    int start_index = 0;
    int end_index = 0;
    double duration_hours = 0.0;

    int length() const { return end_index - start_index + 1; }
    bool contains(int t) const { return t >= start_index && t <= end_index; }

    // Window covering wall-clock [from_hour, to_hour) on `grid`.
    static Window from_hours(const TimeGrid& grid, double from_hour, double to_hour);
    void validate(const TimeGrid& grid) const;
};

// One value per grid interval. `unit` is carried for error messages only.
struct Profile {
    std::vector<double> values;
    std::string unit;

    double operator[](int t) const { return values[static_cast<size_t>(t)]; }
    int size() const { return static_cast<int>(values.size()); }

    static Profile constant(const TimeGrid& grid, double value, std::string unit);
    void validate(const TimeGrid& grid, const std::string& name) const;
};

// Availability-fee levels, strictly increasing, topped by the ceiling price.
struct PriceGrid {
    std::vector<double> levels;
    double ceiling = 50.0;

    int size() const { return static_cast<int>(levels.size()); }
    double operator[](int g) const { return levels[static_cast<size_t>(g)]; }

    // {1, 2, ..., ceiling} in whole-pound steps.
    static PriceGrid integer_fees(double ceiling);
    void validate() const;
};

}  // namespace flexmarket
