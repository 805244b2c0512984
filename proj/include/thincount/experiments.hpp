#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace thincount {

enum class ExperimentKind {
    ConvergenceWr,
    ConvergenceWor,
    BiasStudy,
    StirlingCheck,
    LemmaCheck,
    JointMoments,
};

std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(std::string_view name);

//---------------------------------------------------------------------------//
/*!
 * One experiment, read from a JSON document:
 *
 *   {"name": "...", "kind": "ConvergenceWor",
 *    "parameters": {...}, "output_path": "reports/"}
 *
 * Parameters are validated per kind (unknown keys are rejected) before
 * anything runs. Given the seed, the spec fully determines the CSV output.
 */
struct ExperimentSpec
{
    std::string name;
    ExperimentKind kind = ExperimentKind::ConvergenceWor;
    nlohmann::json parameters = nlohmann::json::object();
    std::string output_path;
};

ExperimentSpec parse_experiment_spec(nlohmann::json const& doc);
ExperimentSpec load_experiment_spec(std::filesystem::path const& path);

struct Report
{
    ExperimentSpec spec;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json summary = nlohmann::json::object();
    double wall_clock_seconds = 0.0;

    std::string csv() const;
    //! Spec echo, summary and wall-clock.
    nlohmann::json summary_json() const;
};

/// Validates the spec and dispatches to the module operations. Module errors
/// are rethrown with the experiment name prepended.
Report run(ExperimentSpec const& spec);

/// Writes <output_path>/<name>.csv and <output_path>/<name>.json, creating
/// the directory if needed. Returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> write_report(Report const& report);

}  // namespace thincount
