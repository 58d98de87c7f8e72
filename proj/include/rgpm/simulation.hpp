#ifndef RGPM_SIMULATION_HPP
#define RGPM_SIMULATION_HPP

#include "rgpm/constraints.hpp"
#include "rgpm/kernel.hpp"
#include "rgpm/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace rgpm {

/// Hidden benchmark functions, selected by id:
///   "cubic1d"  z = 2 (1 + 0.1 zeta + zeta^3)
///   "plane2d"  z = 2 + a - 0.5 b + 0.2 a b
///   "zero"     z = 0
using HiddenFn = std::function<double(const Eigen::VectorXd&)>;
HiddenFn hidden_function(const std::string& id);

double hidden_cubic(double zeta);
double hidden_plane2d(double a, double b);

/// One algorithm variant of the benchmark study. max_updates < 0 means
/// unlimited, resolved to the grid size when constraints are built.
struct VariantSpec {
    std::string name = "S0";
    bool constrained = false;
    int max_updates = -1;
    double delta_b = 0.0;
    double delta_u = 0.0;

    /// The benchmark family: S0 plain, S1 unlimited, S2/S3 budget 2,
    /// S4/S5 budget 5; S3/S5 add the hysteresis margins 1e-1.
    static VariantSpec named(const std::string& name);
};

/// Per-dimension constraint parameters of a scenario.
struct ConstraintSpec {
    int dim = 0;
    int sign = -1;
    double bound = 0.0;
    double r_ic = 1e-8;
};

/// Pins one input dimension to a constant during training.
struct SlicePin {
    int dim = 0;
    double value = 0.0;
};

struct ScenarioConfig {
    std::string hidden_id = "cubic1d";
    KernelConfig kernel;
    double noise_var = 1e-2;  ///< sigma_y^2, used for generation and the filter
    int steps = 1000;
    std::vector<int> checkpoints = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    int eval_points_per_dim = 201;
    int ensemble_size = 500;
    std::uint64_t seed_base = 0;
    std::vector<ConstraintSpec> constraints;
    std::vector<SlicePin> training_slice;

    void validate() const;
};

/// The 1-D cubic benchmark configuration.
ScenarioConfig default_cubic_scenario();
/// The 2-D monotone-surface demo configuration.
ScenarioConfig default_surface_scenario();
VariantSpec default_surface_variant();

struct RunStatistics {
    std::vector<int> checkpoints;
    std::vector<double> rmse;
    std::vector<double> cpmu;
};

/// Deterministic, portable random stream. Every step of an episode consumes
/// a fixed number of draws, so identically seeded episodes share their
/// measurement streams across variants.
class EpisodeRng {
public:
    explicit EpisodeRng(std::uint64_t seed) : gen_(seed) {}
    /// Uniform on [0, 1).
    double uniform01();
    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double gaussian();

private:
    std::mt19937_64 gen_;
};

/// Cartesian evaluation grid in raw units, dimension 0 varying fastest.
Eigen::MatrixXd make_eval_grid(const std::vector<std::pair<double, double>>& bounds,
                               const std::vector<int>& points_per_dim);

double rmse_against(const RgpModel& model, const HiddenFn& hidden,
                    const Eigen::MatrixXd& eval_grid_raw);

std::vector<MonotonicityConstraint> build_scenario_constraints(const RgpModel& model,
                                                               const ScenarioConfig& scenario,
                                                               const VariantSpec& variant);

using CheckpointObserver = std::function<void(int step, const RgpModel& model)>;

/// One training episode: per step draw a raw input (uniform over the input
/// bounds, except pinned dimensions), measure the hidden function with
/// Gaussian noise, run the measurement update and, for constrained
/// variants, the pseudo-measurement pass. RMSE over the evaluation grid and
/// the cumulative pseudo-measurement update count are recorded at the
/// checkpoints.
RunStatistics run_episode(const VariantSpec& variant, const ScenarioConfig& scenario,
                          std::uint64_t seed, const CheckpointObserver& observer = {});

struct EnsembleResult {
    RunStatistics mean;
    std::vector<RunStatistics> runs;
};

/// Ensemble of independent episodes with seeds seed_base + run index.
/// Workers may run in parallel; the reduction is ordered by run index, so
/// the result does not depend on n_threads.
EnsembleResult run_ensemble(const VariantSpec& variant, const ScenarioConfig& scenario,
                            int n_runs, int n_threads = 1);

struct SurfaceResult {
    Eigen::MatrixXd eval_points;  ///< raw inputs, one row per evaluation point
    Eigen::VectorXd mean_constrained;
    Eigen::VectorXd mean_plain;
    Eigen::VectorXd variance_constrained;
    Eigen::VectorXd variance_plain;
    RunStatistics stats_constrained;
    RunStatistics stats_plain;
    double satisfaction_constrained = 0.0;  ///< fraction of grid points meeting all constraints
    double satisfaction_plain = 0.0;
};

/// Trains a constrained and an unconstrained model on one shared stream of
/// a 2-D scenario and dumps both mean and variance surfaces on the dense
/// evaluation grid.
SurfaceResult run_2d_scenario(const ScenarioConfig& scenario, const VariantSpec& variant);

}  // namespace rgpm

#endif  // RGPM_SIMULATION_HPP
