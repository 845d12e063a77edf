#pragma once

// JSON readers and writers for graphs and parameter ranges.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "epizoo/model.hpp"

namespace epizoo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {"centers": [{"id", "kappa", "lambda", "xi", "centroid": [x, y]}, ...],
///  "edges": [["a", "b"], {"a": "a", "b": "c", "movement_rate": 0.02}, ...]}
/// Edge endpoints may be center ids or integer indices.
EnvironmentGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const EnvironmentGraph& g);
EnvironmentGraph load_graph(const std::filesystem::path& path);

/// {"beta": 0.15, "rho_s": [0.1, 0.5], "kappa": [20, 150], ...}. A scalar is a
/// point interval. Class aliases "nu", "m", "c" and "rho" set all three classes.
/// "omega_annual" converts an annual waning fraction to the hourly rate.
/// Omitted parameters keep the table defaults.
ParamRanges ranges_from_json(const nlohmann::json& j);
nlohmann::json ranges_to_json(const ParamRanges& r);
ParamRanges load_param_ranges(const std::filesystem::path& path);

nlohmann::json params_to_json(const ModelParams& p);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace epizoo
