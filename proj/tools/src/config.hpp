#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include <tlamm/error.hpp>
#include <tlamm/evaluation.hpp>
#include <tlamm/experiment.hpp>
#include <tlamm/lamm_solver.hpp>
#include <tlamm/penalties.hpp>
#include <tlamm/survival_data.hpp>

namespace tlamm::cli {

using json = nlohmann::json;

/// Invalid or unknown configuration content.
class ConfigError : public ParameterError
{
public:
    using ParameterError::ParameterError;
};

/// File that cannot be read or written.
class IoError : public DataError
{
public:
    using DataError::DataError;
};

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Throws ConfigError unless `node` is an object whose keys all appear in `allowed`.
void check_keys(const json& node, std::initializer_list<std::string_view> allowed, std::string_view where);

/// Config value accessors with type checks; `where` names the enclosing block in errors.
double get_number(const json& node, std::string_view key, std::string_view where, double fallback);
std::int64_t get_integer(const json& node, std::string_view key, std::string_view where, std::int64_t fallback);
std::string get_string(const json& node, std::string_view key, std::string_view where, std::string fallback);
std::uint64_t get_seed(const json& node, std::uint64_t fallback);

Design parse_design(const json& node, std::string_view where);
SimulationConfig parse_simulation(const json& node, std::uint64_t seed);
SolverConfig parse_solver(const json& node);

/// Penalty block: family and shape, plus at most one of lambda or c.
struct PenaltyRequest
{
    PenaltyKind kind = PenaltyKind::Lasso;
    double shape = 0.0;
    std::optional<double> lambda;
    std::optional<double> c;

    /// Resolves lambda for a dataset of size (n, p); exactly one of lambda or c must be set.
    PenaltySpec resolve(Index n, Index p) const;
};

PenaltyRequest parse_penalty(const json& node);

struct LoadedData
{
    SurvivalDataset dataset;
    std::optional<Vector> truth;
};

/**
 * `data` block: either {"csv": path, "truth": path} or {"simulation": {...}}.
 * Relative paths resolve against `base_dir`. A `truth.json` next to the CSV
 * is used when no truth path is given.
 */
LoadedData load_data(const json& node, const std::filesystem::path& base_dir, std::uint64_t seed);

/// Reads the `true_beta` array of a truth sidecar.
Vector read_truth(const std::filesystem::path& path);

CvConfig parse_cv(const json& node, std::uint64_t seed);

} // namespace tlamm::cli
