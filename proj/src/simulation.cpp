#include "rgpm/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace rgpm {

double hidden_cubic(double zeta) { return 2.0 * (1.0 + 0.1 * zeta + zeta * zeta * zeta); }

double hidden_plane2d(double a, double b) { return 2.0 + a - 0.5 * b + 0.2 * a * b; }

HiddenFn hidden_function(const std::string& id) {
    if (id == "cubic1d")
        return [](const Eigen::VectorXd& z) { return hidden_cubic(z(0)); };
    if (id == "plane2d")
        return [](const Eigen::VectorXd& z) { return hidden_plane2d(z(0), z(1)); };
    if (id == "zero")
        return [](const Eigen::VectorXd&) { return 0.0; };
    throw std::invalid_argument("hidden_function: unknown id '" + id + "'");
}

VariantSpec VariantSpec::named(const std::string& name) {
    VariantSpec v;
    v.name = name;
    if (name == "S0") {
        v.constrained = false;
    } else if (name == "S1") {
        v.constrained = true;
        v.max_updates = -1;
    } else if (name == "S2" || name == "S3") {
        v.constrained = true;
        v.max_updates = 2;
    } else if (name == "S4" || name == "S5") {
        v.constrained = true;
        v.max_updates = 5;
    } else {
        throw std::invalid_argument("VariantSpec::named: unknown variant '" + name + "'");
    }
    if (name == "S3" || name == "S5") {
        v.delta_b = 1e-1;
        v.delta_u = 1e-1;
    }
    return v;
}

void ScenarioConfig::validate() const {
    kernel.validate();
    hidden_function(hidden_id);  // throws on unknown id
    if (!(noise_var > 0.0)) throw std::invalid_argument("ScenarioConfig: noise_var must be > 0");
    if (steps < 0) throw std::invalid_argument("ScenarioConfig: steps must be >= 0");
    if (ensemble_size < 1) throw std::invalid_argument("ScenarioConfig: ensemble_size must be >= 1");
    if (eval_points_per_dim < 2)
        throw std::invalid_argument("ScenarioConfig: eval_points_per_dim must be >= 2");
    if (!checkpoints.empty() && checkpoints.front() < 1)
        throw std::invalid_argument("ScenarioConfig: checkpoints must be >= 1");
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("ScenarioConfig: checkpoints must be strictly increasing");
    for (const ConstraintSpec& c : constraints) {
        if (c.dim < 0 || c.dim >= kernel.dims())
            throw std::invalid_argument("ScenarioConfig: constraint dim out of range");
        if (c.sign != 1 && c.sign != -1)
            throw std::invalid_argument("ScenarioConfig: constraint sign must be -1 or +1");
        if (!(c.r_ic > 0.0)) throw std::invalid_argument("ScenarioConfig: constraint r_ic must be > 0");
    }
    for (const SlicePin& pin : training_slice)
        if (pin.dim < 0 || pin.dim >= kernel.dims())
            throw std::invalid_argument("ScenarioConfig: training_slice dim out of range");
}

ScenarioConfig default_cubic_scenario() {
    ScenarioConfig s;
    s.hidden_id = "cubic1d";
    s.kernel.sigma_k = 10.0;
    s.kernel.length_scale = 3.0;
    s.kernel.points_per_dim = {21};
    s.kernel.input_bounds = {{-1.0, 1.0}};
    s.noise_var = 1e-2;
    s.steps = 1000;
    s.checkpoints = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
    s.eval_points_per_dim = 201;
    s.ensemble_size = 500;
    s.constraints = {{.dim = 0, .sign = -1, .bound = 0.0, .r_ic = 1e-8}};
    return s;
}

ScenarioConfig default_surface_scenario() {
    ScenarioConfig s;
    s.hidden_id = "plane2d";
    s.kernel.sigma_k = 10.0;
    s.kernel.length_scale = 1.5;
    s.kernel.points_per_dim = {5, 5};
    s.kernel.input_bounds = {{0.0, 1.0}, {0.0, 1.0}};
    s.noise_var = 1e-2;
    s.steps = 200;
    s.checkpoints = {1, 2, 5, 10, 20, 50, 100, 200};
    s.eval_points_per_dim = 41;
    s.ensemble_size = 1;
    s.constraints = {{.dim = 0, .sign = -1, .bound = 0.0, .r_ic = 1e-8},
                     {.dim = 1, .sign = +1, .bound = 0.0, .r_ic = 1e-8}};
    s.training_slice = {{.dim = 1, .value = 0.25}};
    return s;
}

VariantSpec default_surface_variant() {
    VariantSpec v;
    v.name = "surface";
    v.constrained = true;
    v.max_updates = 5;
    v.delta_b = 2e-6;
    v.delta_u = 0.0;
    return v;
}

double EpisodeRng::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double EpisodeRng::gaussian() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::MatrixXd make_eval_grid(const std::vector<std::pair<double, double>>& bounds,
                               const std::vector<int>& points_per_dim) {
    if (bounds.size() != points_per_dim.size() || bounds.empty())
        throw std::invalid_argument("make_eval_grid: bounds and points_per_dim must match");
    int total = 1;
    for (int n : points_per_dim) {
        if (n < 2) throw std::invalid_argument("make_eval_grid: need >= 2 points per dimension");
        total *= n;
    }
    const int n_dims = static_cast<int>(bounds.size());
    Eigen::MatrixXd grid(total, n_dims);
    for (int row = 0; row < total; ++row) {
        int idx = row;
        for (int d = 0; d < n_dims; ++d) {
            const int i = idx % points_per_dim[d];
            idx /= points_per_dim[d];
            grid(row, d) = bounds[d].first + (bounds[d].second - bounds[d].first) * i /
                                                 (points_per_dim[d] - 1);
        }
    }
    return grid;
}

double rmse_against(const RgpModel& model, const HiddenFn& hidden,
                    const Eigen::MatrixXd& eval_grid_raw) {
    const Eigen::MatrixXd x = normalize_rows(eval_grid_raw, model.config());
    const Eigen::VectorXd mean = model.infer_mean(x);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < eval_grid_raw.rows(); ++i) {
        const double err = mean(i) - hidden(eval_grid_raw.row(i).transpose());
        sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(eval_grid_raw.rows()));
}

std::vector<MonotonicityConstraint> build_scenario_constraints(const RgpModel& model,
                                                               const ScenarioConfig& scenario,
                                                               const VariantSpec& variant) {
    std::vector<MonotonicityConstraint> out;
    if (!variant.constrained) return out;
    const int budget = variant.max_updates < 0 ? model.grid_size() : variant.max_updates;
    for (const ConstraintSpec& spec : scenario.constraints) {
        out.push_back(make_monotonicity_constraint(model, spec.dim, spec.sign, spec.bound,
                                                   variant.delta_b, variant.delta_u, budget,
                                                   spec.r_ic));
    }
    return out;
}

namespace {

std::vector<int> eval_grid_dims(const ScenarioConfig& scenario) {
    return std::vector<int>(static_cast<std::size_t>(scenario.kernel.dims()),
                            scenario.eval_points_per_dim);
}

Eigen::VectorXd draw_input(EpisodeRng& rng, const ScenarioConfig& scenario) {
    const int n_dims = scenario.kernel.dims();
    Eigen::VectorXd zeta(n_dims);
    for (int d = 0; d < n_dims; ++d) {
        const auto& b = scenario.kernel.input_bounds[d];
        zeta(d) = b.first + (b.second - b.first) * rng.uniform01();
    }
    // Pins overwrite after all draws so the stream layout stays fixed.
    for (const SlicePin& pin : scenario.training_slice) zeta(pin.dim) = pin.value;
    return zeta;
}

}  // namespace

RunStatistics run_episode(const VariantSpec& variant, const ScenarioConfig& scenario,
                          std::uint64_t seed, const CheckpointObserver& observer) {
    scenario.validate();
    const HiddenFn hidden = hidden_function(scenario.hidden_id);
    const Eigen::MatrixXd eval_grid =
        make_eval_grid(scenario.kernel.input_bounds, eval_grid_dims(scenario));

    RgpModel model(scenario.kernel);
    const std::vector<MonotonicityConstraint> constraints =
        build_scenario_constraints(model, scenario, variant);

    EpisodeRng rng(seed);
    const double noise_std = std::sqrt(scenario.noise_var);
    RunStatistics stats;
    long cpmu = 0;
    std::size_t next_checkpoint = 0;
    for (int k = 1; k <= scenario.steps; ++k) {
        const Eigen::VectorXd zeta = draw_input(rng, scenario);
        const double y = hidden(zeta) + noise_std * rng.gaussian();
        model.update(normalize(zeta, scenario.kernel), y, scenario.noise_var);
        if (!constraints.empty()) cpmu += apply_constraints(model, constraints).total();

        while (next_checkpoint < scenario.checkpoints.size() &&
               scenario.checkpoints[next_checkpoint] == k) {
            stats.checkpoints.push_back(k);
            stats.rmse.push_back(rmse_against(model, hidden, eval_grid));
            stats.cpmu.push_back(static_cast<double>(cpmu));
            if (observer) observer(k, model);
            ++next_checkpoint;
        }
    }
    return stats;
}

EnsembleResult run_ensemble(const VariantSpec& variant, const ScenarioConfig& scenario,
                            int n_runs, int n_threads) {
    if (n_runs < 1) throw std::invalid_argument("run_ensemble: n_runs must be >= 1");
    scenario.validate();

    EnsembleResult result;
    result.runs.resize(n_runs);
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min(n_threads, n_runs);

    if (n_threads == 1) {
        for (int i = 0; i < n_runs; ++i)
            result.runs[i] = run_episode(variant, scenario, scenario.seed_base + i);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n_runs) break;
                result.runs[i] = run_episode(variant, scenario, scenario.seed_base + i);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Reduce in run-index order so the averages do not depend on n_threads.
    const std::size_t n_cp = result.runs.front().checkpoints.size();
    result.mean.checkpoints = result.runs.front().checkpoints;
    result.mean.rmse.assign(n_cp, 0.0);
    result.mean.cpmu.assign(n_cp, 0.0);
    for (const RunStatistics& run : result.runs) {
        for (std::size_t i = 0; i < n_cp; ++i) {
            result.mean.rmse[i] += run.rmse[i];
            result.mean.cpmu[i] += run.cpmu[i];
        }
    }
    for (std::size_t i = 0; i < n_cp; ++i) {
        result.mean.rmse[i] /= n_runs;
        result.mean.cpmu[i] /= n_runs;
    }
    return result;
}

SurfaceResult run_2d_scenario(const ScenarioConfig& scenario, const VariantSpec& variant) {
    scenario.validate();
    if (scenario.kernel.dims() != 2)
        throw std::invalid_argument("run_2d_scenario: scenario must have two input dimensions");
    if (!variant.constrained)
        throw std::invalid_argument("run_2d_scenario: variant must be constrained");

    const HiddenFn hidden = hidden_function(scenario.hidden_id);
    const Eigen::MatrixXd eval_grid =
        make_eval_grid(scenario.kernel.input_bounds, eval_grid_dims(scenario));

    RgpModel constrained(scenario.kernel);
    RgpModel plain(scenario.kernel);
    const std::vector<MonotonicityConstraint> constraints =
        build_scenario_constraints(constrained, scenario, variant);

    EpisodeRng rng(scenario.seed_base);
    const double noise_std = std::sqrt(scenario.noise_var);
    SurfaceResult out;
    long cpmu = 0;
    std::size_t next_checkpoint = 0;
    for (int k = 1; k <= scenario.steps; ++k) {
        const Eigen::VectorXd zeta = draw_input(rng, scenario);
        const double y = hidden(zeta) + noise_std * rng.gaussian();
        const Eigen::VectorXd x = normalize(zeta, scenario.kernel);
        constrained.update(x, y, scenario.noise_var);
        plain.update(x, y, scenario.noise_var);
        cpmu += apply_constraints(constrained, constraints).total();

        while (next_checkpoint < scenario.checkpoints.size() &&
               scenario.checkpoints[next_checkpoint] == k) {
            out.stats_constrained.checkpoints.push_back(k);
            out.stats_constrained.rmse.push_back(rmse_against(constrained, hidden, eval_grid));
            out.stats_constrained.cpmu.push_back(static_cast<double>(cpmu));
            out.stats_plain.checkpoints.push_back(k);
            out.stats_plain.rmse.push_back(rmse_against(plain, hidden, eval_grid));
            out.stats_plain.cpmu.push_back(0.0);
            ++next_checkpoint;
        }
    }

    const Eigen::MatrixXd x_eval = normalize_rows(eval_grid, scenario.kernel);
    const Prediction pred_constrained = constrained.infer(x_eval);
    const Prediction pred_plain = plain.infer(x_eval);
    out.eval_points = eval_grid;
    out.mean_constrained = pred_constrained.mean;
    out.mean_plain = pred_plain.mean;
    out.variance_constrained = pred_constrained.variance();
    out.variance_plain = pred_plain.variance();
    const double tol = std::max(variant.delta_b, 1e-9);
    out.satisfaction_constrained = constraint_satisfaction(constrained, constraints, tol);
    out.satisfaction_plain = constraint_satisfaction(plain, constraints, tol);
    return out;
}

}  // namespace rgpm
