#pragma once

#include <stdexcept>
#include <string>

namespace flexmarket {

// Bad input: mismatched grids, malformed config files, unknown mechanism tags.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A dispatch model has no feasible schedule. Carries the asset name so the
// caller can point at the offending block of the scenario file.
class ModelInfeasible : public std::runtime_error {
public:
    ModelInfeasible(std::string asset, const std::string& what)
        : std::runtime_error(asset + ": " + what), asset_(std::move(asset)) {}
    const std::string& asset() const { return asset_; }

private:
    std::string asset_;
};

// Numerical failure inside the solver after the iteration budget is spent.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, long iterations)
        : std::runtime_error(what + " (iterations=" + std::to_string(iterations) + ")"),
          iterations_(iterations) {}
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

}  // namespace flexmarket
