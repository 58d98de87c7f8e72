#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rgpm/simulation.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace rgpm;

TEST_CASE("hidden cubic evaluates the benchmark function") {
    CHECK(hidden_cubic(0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(hidden_cubic(1.0) == doctest::Approx(4.2).epsilon(1e-15));
    CHECK(hidden_cubic(-1.0) == doctest::Approx(-0.2).epsilon(1e-12));
    // derivative 2 (0.1 + 3 zeta^2) has minimum 0.2 at zero
    for (int i = 0; i <= 400; ++i) {
        const double z = -1.0 + 2.0 * i / 400.0;
        CHECK(2.0 * (0.1 + 3.0 * z * z) >= 0.2);
    }
    for (int i = 1; i <= 400; ++i) {
        const double a = -1.0 + 2.0 * (i - 1) / 400.0;
        const double b = -1.0 + 2.0 * i / 400.0;
        CHECK(hidden_cubic(b) > hidden_cubic(a));
    }
}

TEST_CASE("hidden function registry") {
    const HiddenFn plane = hidden_function("plane2d");
    Eigen::VectorXd p(2);
    p << 0.5, 1.0;
    CHECK(plane(p) == doctest::Approx(2.0 + 0.5 - 0.5 + 0.1).epsilon(1e-14));
    CHECK_THROWS_AS(hidden_function("nope"), std::invalid_argument);
}

TEST_CASE("named variants carry the benchmark parameters") {
    CHECK(!VariantSpec::named("S0").constrained);
    const VariantSpec s1 = VariantSpec::named("S1");
    CHECK(s1.constrained);
    CHECK(s1.max_updates < 0);  // unlimited, resolved to the grid size
    CHECK(VariantSpec::named("S2").max_updates == 2);
    CHECK(VariantSpec::named("S4").max_updates == 5);
    const VariantSpec s3 = VariantSpec::named("S3");
    CHECK(s3.max_updates == 2);
    CHECK(s3.delta_b == doctest::Approx(1e-1));
    CHECK(s3.delta_u == doctest::Approx(1e-1));
    const VariantSpec s5 = VariantSpec::named("S5");
    CHECK(s5.max_updates == 5);
    CHECK(s5.delta_b == doctest::Approx(1e-1));
    CHECK_THROWS_AS(VariantSpec::named("S9"), std::invalid_argument);
}

TEST_CASE("eval grids span the bounds with dimension 0 fastest") {
    const Eigen::MatrixXd grid1 = make_eval_grid({{-1.0, 1.0}}, {201});
    REQUIRE(grid1.rows() == 201);
    CHECK(grid1(0, 0) == -1.0);
    CHECK(grid1(200, 0) == 1.0);
    CHECK(grid1(100, 0) == doctest::Approx(0.0).epsilon(1e-14));

    const Eigen::MatrixXd grid2 = make_eval_grid({{0.0, 1.0}, {0.0, 2.0}}, {3, 2});
    REQUIRE(grid2.rows() == 6);
    CHECK(grid2(0, 0) == 0.0);
    CHECK(grid2(1, 0) == 0.5);
    CHECK(grid2(2, 0) == 1.0);
    CHECK(grid2(0, 1) == 0.0);
    CHECK(grid2(3, 1) == 2.0);
}

TEST_CASE("rmse of a perfect model is zero") {
    RgpModel model(rgpm_test::cubic_kernel());
    const Eigen::MatrixXd grid = make_eval_grid({{-1.0, 1.0}}, {201});
    CHECK(rmse_against(model, hidden_function("zero"), grid) == 0.0);
}

TEST_CASE("rmse of the fresh model against the cubic matches the direct sum") {
    RgpModel model(rgpm_test::cubic_kernel());
    const Eigen::MatrixXd grid = make_eval_grid({{-1.0, 1.0}}, {201});
    const double rmse = rmse_against(model, hidden_function("cubic1d"), grid);
    // brute-force oracle over the same grid
    double sum = 0.0;
    for (int i = 0; i < 201; ++i) {
        const double f = hidden_cubic(grid(i, 0));
        sum += f * f;
    }
    CHECK(rmse == doctest::Approx(std::sqrt(sum / 201.0)).epsilon(1e-13));
    CHECK(rmse == doctest::Approx(2.182971007381149).epsilon(1e-12));

    // doubling the resolution barely moves the value
    const Eigen::MatrixXd fine = make_eval_grid({{-1.0, 1.0}}, {401});
    const double rmse_fine = rmse_against(model, hidden_function("cubic1d"), fine);
    CHECK(std::abs(rmse_fine - rmse) / rmse < 0.01);
}

TEST_CASE("episode rng is deterministic with fixed draw counts") {
    EpisodeRng a(99);
    EpisodeRng b(99);
    for (int i = 0; i < 50; ++i) {
        CHECK(a.uniform01() == b.uniform01());
        CHECK(a.gaussian() == b.gaussian());
    }
    EpisodeRng c(100);
    CHECK(c.uniform01() != EpisodeRng(99).uniform01());
    // rough sanity on the transforms
    EpisodeRng d(7);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) mean += d.gaussian();
    CHECK(std::abs(mean / 10000.0) < 0.05);
}

TEST_CASE("unconstrained episodes never update pseudo-measurements") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 50;
    scenario.checkpoints = {1, 2, 5, 10, 20, 50};
    const RunStatistics stats = run_episode(VariantSpec::named("S0"), scenario, 0);
    REQUIRE(stats.checkpoints.size() == 6);
    for (double c : stats.cpmu) CHECK(c == 0.0);
}

TEST_CASE("identical seeds give identical run statistics") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 60;
    scenario.checkpoints = {1, 5, 20, 60};
    for (const char* name : {"S0", "S3"}) {
        const VariantSpec variant = VariantSpec::named(name);
        const RunStatistics a = run_episode(variant, scenario, 42);
        const RunStatistics b = run_episode(variant, scenario, 42);
        REQUIRE(a.checkpoints == b.checkpoints);
        for (std::size_t i = 0; i < a.rmse.size(); ++i) {
            CHECK(a.rmse[i] == b.rmse[i]);
            CHECK(a.cpmu[i] == b.cpmu[i]);
        }
        const RunStatistics c = run_episode(variant, scenario, 43);
        CHECK(a.rmse != c.rmse);
    }
}

TEST_CASE("near-noiseless constrained learning drives the error down") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.noise_var = 1e-12;
    scenario.steps = 1000;
    scenario.checkpoints = {1000};
    const RunStatistics stats = run_episode(VariantSpec::named("S1"), scenario, 1);
    CHECK(stats.rmse.back() < 0.05);
}

TEST_CASE("constrained and unconstrained episodes share their covariance trajectory") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 20;
    scenario.checkpoints = {1, 5, 20};
    std::vector<Eigen::MatrixXd> cov_plain;
    run_episode(VariantSpec::named("S0"), scenario, 11,
                [&](int, const RgpModel& m) { cov_plain.push_back(m.covariance()); });
    std::size_t idx = 0;
    run_episode(VariantSpec::named("S5"), scenario, 11, [&](int, const RgpModel& m) {
        REQUIRE(idx < cov_plain.size());
        CHECK((m.covariance() - cov_plain[idx]).cwiseAbs().maxCoeff() == 0.0);
        ++idx;
    });
    CHECK(idx == 3);
}

TEST_CASE("cpmu is nondecreasing within every run") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 100;
    scenario.checkpoints = {1, 2, 5, 10, 20, 50, 100};
    for (const char* name : {"S1", "S2", "S3", "S4", "S5"}) {
        const RunStatistics stats = run_episode(VariantSpec::named(name), scenario, 3);
        for (std::size_t i = 1; i < stats.cpmu.size(); ++i)
            CHECK(stats.cpmu[i] >= stats.cpmu[i - 1]);
    }
}

TEST_CASE("the hysteresis heuristic makes the update count plateau") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.checkpoints = {500, 1000};
    const EnsembleResult result = run_ensemble(VariantSpec::named("S5"), scenario, 50, 2);
    const double at500 = result.mean.cpmu[0];
    const double at1000 = result.mean.cpmu[1];
    REQUIRE(at500 > 0.0);
    CHECK((at1000 - at500) / at500 < 0.05);
}

TEST_CASE("a single-run ensemble equals the episode") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 30;
    scenario.checkpoints = {1, 10, 30};
    scenario.seed_base = 5;
    const RunStatistics direct = run_episode(VariantSpec::named("S3"), scenario, 5);
    const EnsembleResult ensemble = run_ensemble(VariantSpec::named("S3"), scenario, 1);
    REQUIRE(ensemble.runs.size() == 1);
    for (std::size_t i = 0; i < direct.rmse.size(); ++i) {
        CHECK(ensemble.mean.rmse[i] == direct.rmse[i]);
        CHECK(ensemble.mean.cpmu[i] == direct.cpmu[i]);
    }
}

TEST_CASE("ensemble results do not depend on the worker count") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.steps = 40;
    scenario.checkpoints = {1, 10, 40};
    const EnsembleResult serial = run_ensemble(VariantSpec::named("S4"), scenario, 6, 1);
    const EnsembleResult parallel = run_ensemble(VariantSpec::named("S4"), scenario, 6, 4);
    for (std::size_t i = 0; i < serial.mean.rmse.size(); ++i) {
        CHECK(serial.mean.rmse[i] == parallel.mean.rmse[i]);
        CHECK(serial.mean.cpmu[i] == parallel.mean.cpmu[i]);
    }
    for (int r = 0; r < 6; ++r)
        for (std::size_t i = 0; i < serial.runs[r].rmse.size(); ++i)
            CHECK(serial.runs[r].rmse[i] == parallel.runs[r].rmse[i]);
}

TEST_CASE("the surface scenario with no measurements stays at the prior") {
    ScenarioConfig scenario = default_surface_scenario();
    scenario.steps = 0;
    scenario.checkpoints = {};
    const SurfaceResult result = run_2d_scenario(scenario, default_surface_variant());
    CHECK(result.mean_constrained.cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.mean_plain.cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.satisfaction_constrained == 1.0);
}

TEST_CASE("slice training keeps the constrained surface monotone where the plain one is not") {
    const ScenarioConfig scenario = default_surface_scenario();
    const SurfaceResult result = run_2d_scenario(scenario, default_surface_variant());
    CHECK(result.satisfaction_constrained >= 0.95);
    CHECK(result.satisfaction_plain < result.satisfaction_constrained);
    CHECK(result.satisfaction_plain < 0.95);
    // the covariance reset makes both variance surfaces identical
    CHECK((result.variance_constrained - result.variance_plain).cwiseAbs().maxCoeff() == 0.0);
    // training only happened on the slice, so the fit is best there
    CHECK(result.stats_constrained.rmse.back() <
          rmse_against(RgpModel(scenario.kernel), hidden_function(scenario.hidden_id),
                       make_eval_grid(scenario.kernel.input_bounds, {41, 41})));
}

TEST_CASE("scenario validation rejects malformed configurations") {
    ScenarioConfig scenario = default_cubic_scenario();
    scenario.noise_var = 0.0;
    CHECK_THROWS_AS(scenario.validate(), std::invalid_argument);
    scenario = default_cubic_scenario();
    scenario.checkpoints = {5, 5};
    CHECK_THROWS_AS(scenario.validate(), std::invalid_argument);
    scenario = default_cubic_scenario();
    scenario.constraints[0].dim = 3;
    CHECK_THROWS_AS(scenario.validate(), std::invalid_argument);
    scenario = default_cubic_scenario();
    scenario.constraints[0].sign = 2;
    CHECK_THROWS_AS(scenario.validate(), std::invalid_argument);
}
