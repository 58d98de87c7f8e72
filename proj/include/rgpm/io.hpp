#ifndef RGPM_IO_HPP
#define RGPM_IO_HPP

#include "rgpm/model.hpp"
#include "rgpm/simulation.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgpm::io {

/// Raised for malformed configs, snapshots and unknown keys; maps to the
/// CLI's usage/config exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int snapshot_format_version = 1;

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// --- model snapshots -------------------------------------------------------

std::string snapshot_to_string(const RgpModel& model);
RgpModel snapshot_from_string(const std::string& text);
void save_snapshot(const RgpModel& model, const std::string& path);
RgpModel load_snapshot(const std::string& path);

// --- experiment configuration ----------------------------------------------

struct ExperimentConfig {
    std::string scenario_id = "cubic-study";  ///< "cubic-study" | "surface-demo"
    ScenarioConfig scenario;
    std::vector<VariantSpec> variants;
    std::string output_dir = "out";
};

/// Parses an experiment file. Physics-facing values (kernel, noise, steps,
/// constraint parameters) are required; unknown keys are rejected with the
/// offending key named.
ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

// --- CSV export -------------------------------------------------------------

/// Per-checkpoint results: "# rgpm-results v1 ..." comment, then k,rmse,cpmu.
std::string run_csv(const std::string& variant_name, std::uint64_t seed, int runs,
                    const RunStatistics& stats);
void write_run_csv(const std::string& path, const std::string& variant_name, std::uint64_t seed,
                   int runs, const RunStatistics& stats);

/// Per-run archive of an ensemble: run,k,rmse,cpmu.
std::string archive_csv(const std::string& variant_name, std::uint64_t seed_base,
                        const std::vector<RunStatistics>& runs);
void write_archive_csv(const std::string& path, const std::string& variant_name,
                       std::uint64_t seed_base, const std::vector<RunStatistics>& runs);

/// 2-D surface in grid-major layout: header row holds the dimension-0
/// coordinates, each data row starts with its dimension-1 coordinate.
std::string surface_csv(const std::string& field, const ScenarioConfig& scenario,
                        const Eigen::MatrixXd& eval_points, const Eigen::VectorXd& values);
void write_surface_csv(const std::string& path, const std::string& field,
                       const ScenarioConfig& scenario, const Eigen::MatrixXd& eval_points,
                       const Eigen::VectorXd& values);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace rgpm::io

#endif  // RGPM_IO_HPP
