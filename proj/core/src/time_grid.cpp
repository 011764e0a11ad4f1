#include "flexmarket/time_grid.hpp"

#include <cmath>

#include "flexmarket/errors.hpp"

namespace flexmarket {

TimeGrid TimeGrid::make(double step_hours, double horizon_hours) {
    TimeGrid g;
    g.step_hours = step_hours;
    g.horizon_hours = horizon_hours;
    double n = horizon_hours / step_hours;
    g.count = static_cast<int>(std::lround(n));
    g.validate();
    return g;
}

void TimeGrid::validate() const {
    if (count < 1) throw ConfigError("TimeGrid: count must be >= 1");
    if (step_hours <= 0.0) throw ConfigError("TimeGrid: step_hours must be positive");
    if (std::fabs(count * step_hours - horizon_hours) > 1e-9)
        throw ConfigError("TimeGrid: count * step_hours != horizon_hours");
}

int TimeGrid::index_of(double hour) const {
    if (hour < 0.0 || hour >= horizon_hours)
        throw ConfigError("TimeGrid: hour outside horizon");
    return static_cast<int>(std::floor(hour / step_hours + 1e-9));
}

Window Window::from_hours(const TimeGrid& grid, double from_hour, double to_hour) {
    if (to_hour <= from_hour) throw ConfigError("Window: to_hour must exceed from_hour");
    Window w;
    w.start_index = grid.index_of(from_hour);
    w.end_index = grid.index_of(to_hour - grid.step_hours * 0.5);
    w.duration_hours = (w.end_index - w.start_index + 1) * grid.step_hours;
    w.validate(grid);
    return w;
}

void Window::validate(const TimeGrid& grid) const {
    if (start_index > end_index || end_index >= grid.count || start_index < 0)
        throw ConfigError("Window: indices out of range");
    if (std::fabs(duration_hours - length() * grid.step_hours) > 1e-9)
        throw ConfigError("Window: duration does not match index span");
}

Profile Profile::constant(const TimeGrid& grid, double value, std::string unit) {
    Profile p;
    p.values.assign(static_cast<size_t>(grid.count), value);
    p.unit = std::move(unit);
    return p;
}

void Profile::validate(const TimeGrid& grid, const std::string& name) const {
    if (size() != grid.count)
        throw ConfigError("Profile '" + name + "': expected " + std::to_string(grid.count) +
                          " values, got " + std::to_string(size()));
}

PriceGrid PriceGrid::integer_fees(double ceiling) {
    PriceGrid g;
    g.ceiling = ceiling;
    for (double fee = 1.0; fee <= ceiling + 1e-9; fee += 1.0) g.levels.push_back(fee);
    g.validate();
    return g;
}

void PriceGrid::validate() const {
    if (levels.empty()) throw ConfigError("PriceGrid: no levels");
    if (ceiling <= 0.0) throw ConfigError("PriceGrid: ceiling must be positive");
    for (size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1.0 - 1e-12 || levels[i] > ceiling + 1e-9)
            throw ConfigError("PriceGrid: level outside [1, ceiling]");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw ConfigError("PriceGrid: levels must be strictly increasing");
    }
}

}  // namespace flexmarket
