#include "rgpm/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <system_error>

namespace rgpm::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(ctx + ": unknown key '" + it.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(ctx + ": missing required key '" + std::string(key) + "'");
    return *it;
}

double as_number(const json& v, const std::string& ctx) {
    if (!v.is_number()) fail(ctx + ": expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) fail(ctx + ": expected an integer");
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& ctx) {
    if (!v.is_string()) fail(ctx + ": expected a string");
    return v.get<std::string>();
}

json kernel_to_json(const KernelConfig& cfg) {
    json j;
    j["sigma_k"] = cfg.sigma_k;
    j["length_scale"] = cfg.length_scale;
    j["points_per_dim"] = cfg.points_per_dim;
    json bounds = json::array();
    for (const auto& [lo, hi] : cfg.input_bounds) bounds.push_back({lo, hi});
    j["input_bounds"] = bounds;
    j["jitter"] = cfg.jitter;
    return j;
}

KernelConfig kernel_from_json(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx + ": expected an object");
    check_keys(j, {"sigma_k", "length_scale", "points_per_dim", "input_bounds", "jitter"}, ctx);
    KernelConfig cfg;
    cfg.sigma_k = as_number(require(j, "sigma_k", ctx), ctx + ".sigma_k");
    cfg.length_scale = as_number(require(j, "length_scale", ctx), ctx + ".length_scale");
    const json& pts = require(j, "points_per_dim", ctx);
    if (!pts.is_array() || pts.empty()) fail(ctx + ".points_per_dim: expected a nonempty array");
    for (const json& v : pts) cfg.points_per_dim.push_back(as_int(v, ctx + ".points_per_dim"));
    const json& bounds = require(j, "input_bounds", ctx);
    if (!bounds.is_array()) fail(ctx + ".input_bounds: expected an array");
    for (const json& v : bounds) {
        if (!v.is_array() || v.size() != 2) fail(ctx + ".input_bounds: expected [lower, upper] pairs");
        cfg.input_bounds.emplace_back(as_number(v[0], ctx + ".input_bounds"),
                                      as_number(v[1], ctx + ".input_bounds"));
    }
    if (j.contains("jitter")) cfg.jitter = as_number(j["jitter"], ctx + ".jitter");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail(ctx + ": " + e.what());
    }
    return cfg;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string snapshot_to_string(const RgpModel& model) {
    json j;
    j["format_version"] = snapshot_format_version;
    j["kernel"] = kernel_to_json(model.config());
    j["grid_dims"] = model.config().points_per_dim;
    j["step"] = model.step();
    j["mu_g"] = std::vector<double>(model.mean().data(), model.mean().data() + model.mean().size());
    std::vector<double> cov_rows;
    const Eigen::MatrixXd& cov = model.covariance();
    cov_rows.reserve(static_cast<std::size_t>(cov.size()));
    for (Eigen::Index r = 0; r < cov.rows(); ++r)
        for (Eigen::Index c = 0; c < cov.cols(); ++c) cov_rows.push_back(cov(r, c));
    j["c_g"] = cov_rows;
    return j.dump(1) + "\n";
}

RgpModel snapshot_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("snapshot: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("snapshot: expected a JSON object");
    check_keys(j, {"format_version", "kernel", "grid_dims", "step", "mu_g", "c_g"}, "snapshot");
    const int version = as_int(require(j, "format_version", "snapshot"), "snapshot.format_version");
    if (version != snapshot_format_version)
        fail("snapshot: unsupported format_version " + std::to_string(version));
    const KernelConfig cfg = kernel_from_json(require(j, "kernel", "snapshot"), "snapshot.kernel");

    const json& dims = require(j, "grid_dims", "snapshot");
    if (!dims.is_array() || dims.size() != cfg.points_per_dim.size())
        fail("snapshot.grid_dims: does not match kernel.points_per_dim");
    for (std::size_t i = 0; i < dims.size(); ++i)
        if (as_int(dims[i], "snapshot.grid_dims") != cfg.points_per_dim[i])
            fail("snapshot.grid_dims: does not match kernel.points_per_dim");

    const json& step_j = require(j, "step", "snapshot");
    if (!step_j.is_number_integer()) fail("snapshot.step: expected an integer");
    const long step = step_j.get<long>();
    const json& mu_j = require(j, "mu_g", "snapshot");
    const json& cov_j = require(j, "c_g", "snapshot");
    const int p = cfg.grid_size();
    if (!mu_j.is_array() || static_cast<int>(mu_j.size()) != p)
        fail("snapshot.mu_g: expected " + std::to_string(p) + " values");
    if (!cov_j.is_array() || static_cast<int>(cov_j.size()) != p * p)
        fail("snapshot.c_g: expected " + std::to_string(p * p) + " values");

    Eigen::VectorXd mu(p);
    for (int i = 0; i < p; ++i) mu(i) = as_number(mu_j[i], "snapshot.mu_g");
    Eigen::MatrixXd cov(p, p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) cov(r, c) = as_number(cov_j[r * p + c], "snapshot.c_g");

    RgpModel model(cfg);
    try {
        model.restore_state(mu, cov, step);
    } catch (const std::invalid_argument& e) {
        fail(std::string("snapshot: ") + e.what());
    }
    return model;
}

void save_snapshot(const RgpModel& model, const std::string& path) {
    write_text_file(path, snapshot_to_string(model));
}

RgpModel load_snapshot(const std::string& path) {
    return snapshot_from_string(read_text_file(path));
}

ExperimentConfig parse_experiment(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("experiment: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("experiment: expected a JSON object");
    check_keys(j,
               {"schema_version", "scenario", "hidden", "kernel", "noise_var", "steps",
                "checkpoints", "eval_points_per_dim", "ensemble_size", "seed_base", "constraints",
                "training_slice", "variants", "output_dir"},
               "experiment");
    if (j.contains("schema_version") &&
        as_int(j["schema_version"], "experiment.schema_version") != 1)
        fail("experiment.schema_version: unsupported version");

    ExperimentConfig cfg;
    if (j.contains("scenario")) cfg.scenario_id = as_string(j["scenario"], "experiment.scenario");
    if (cfg.scenario_id == "cubic-study") {
        cfg.scenario.hidden_id = "cubic1d";
    } else if (cfg.scenario_id == "surface-demo") {
        cfg.scenario.hidden_id = "plane2d";
    } else {
        fail("experiment.scenario: unknown scenario '" + cfg.scenario_id + "'");
    }
    if (j.contains("hidden")) cfg.scenario.hidden_id = as_string(j["hidden"], "experiment.hidden");

    cfg.scenario.kernel = kernel_from_json(require(j, "kernel", "experiment"), "experiment.kernel");
    cfg.scenario.noise_var = as_number(require(j, "noise_var", "experiment"), "experiment.noise_var");
    cfg.scenario.steps = as_int(require(j, "steps", "experiment"), "experiment.steps");

    if (j.contains("checkpoints")) {
        cfg.scenario.checkpoints.clear();
        if (!j["checkpoints"].is_array()) fail("experiment.checkpoints: expected an array");
        for (const json& v : j["checkpoints"])
            cfg.scenario.checkpoints.push_back(as_int(v, "experiment.checkpoints"));
    } else {
        std::vector<int> filtered;
        for (int k : cfg.scenario.checkpoints)
            if (k <= cfg.scenario.steps) filtered.push_back(k);
        cfg.scenario.checkpoints = filtered;
    }

    cfg.scenario.eval_points_per_dim = cfg.scenario.kernel.dims() == 1 ? 201 : 41;
    if (j.contains("eval_points_per_dim"))
        cfg.scenario.eval_points_per_dim =
            as_int(j["eval_points_per_dim"], "experiment.eval_points_per_dim");
    if (j.contains("ensemble_size"))
        cfg.scenario.ensemble_size = as_int(j["ensemble_size"], "experiment.ensemble_size");
    if (j.contains("seed_base")) {
        if (!j["seed_base"].is_number_integer() ||
            (!j["seed_base"].is_number_unsigned() && j["seed_base"].get<long long>() < 0))
            fail("experiment.seed_base: expected a nonnegative integer");
        cfg.scenario.seed_base = j["seed_base"].get<std::uint64_t>();
    }

    if (j.contains("constraints")) {
        if (!j["constraints"].is_array()) fail("experiment.constraints: expected an array");
        for (const json& c : j["constraints"]) {
            if (!c.is_object()) fail("experiment.constraints: expected objects");
            check_keys(c, {"dim", "sign", "bound", "r_ic"}, "experiment.constraints");
            ConstraintSpec spec;
            spec.dim = as_int(require(c, "dim", "experiment.constraints"), "constraints.dim");
            spec.sign = as_int(require(c, "sign", "experiment.constraints"), "constraints.sign");
            spec.bound = as_number(require(c, "bound", "experiment.constraints"), "constraints.bound");
            spec.r_ic = as_number(require(c, "r_ic", "experiment.constraints"), "constraints.r_ic");
            cfg.scenario.constraints.push_back(spec);
        }
    }

    if (j.contains("training_slice")) {
        if (!j["training_slice"].is_array()) fail("experiment.training_slice: expected an array");
        for (const json& s : j["training_slice"]) {
            if (!s.is_object()) fail("experiment.training_slice: expected objects");
            check_keys(s, {"dim", "value"}, "experiment.training_slice");
            SlicePin pin;
            pin.dim = as_int(require(s, "dim", "experiment.training_slice"), "training_slice.dim");
            pin.value =
                as_number(require(s, "value", "experiment.training_slice"), "training_slice.value");
            cfg.scenario.training_slice.push_back(pin);
        }
    }

    const json& variants = require(j, "variants", "experiment");
    if (!variants.is_array() || variants.empty())
        fail("experiment.variants: expected a nonempty array");
    for (const json& v : variants) {
        if (v.is_string()) {
            try {
                cfg.variants.push_back(VariantSpec::named(v.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                fail(std::string("experiment.variants: ") + e.what());
            }
        } else if (v.is_object()) {
            check_keys(v, {"name", "constrained", "max_updates", "delta_b", "delta_u"},
                       "experiment.variants");
            VariantSpec spec;
            spec.name = as_string(require(v, "name", "experiment.variants"), "variants.name");
            const json& con = require(v, "constrained", "experiment.variants");
            if (!con.is_boolean()) fail("experiment.variants.constrained: expected a boolean");
            spec.constrained = con.get<bool>();
            if (spec.constrained) {
                spec.max_updates =
                    as_int(require(v, "max_updates", "experiment.variants"), "variants.max_updates");
                spec.delta_b =
                    as_number(require(v, "delta_b", "experiment.variants"), "variants.delta_b");
                spec.delta_u =
                    as_number(require(v, "delta_u", "experiment.variants"), "variants.delta_u");
            }
            cfg.variants.push_back(spec);
        } else {
            fail("experiment.variants: entries must be names or objects");
        }
    }

    bool any_constrained = false;
    for (const VariantSpec& v : cfg.variants) any_constrained = any_constrained || v.constrained;
    if (any_constrained && cfg.scenario.constraints.empty())
        fail("experiment: constrained variants require a 'constraints' block");

    if (j.contains("output_dir")) cfg.output_dir = as_string(j["output_dir"], "experiment.output_dir");

    try {
        cfg.scenario.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("experiment: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
    return parse_experiment(read_text_file(path));
}

std::string run_csv(const std::string& variant_name, std::uint64_t seed, int runs,
                    const RunStatistics& stats) {
    std::ostringstream out;
    out << "# rgpm-results v1 variant=" << variant_name << " seed=" << seed << " runs=" << runs
        << "\n";
    out << "k,rmse,cpmu\n";
    for (std::size_t i = 0; i < stats.checkpoints.size(); ++i)
        out << stats.checkpoints[i] << ',' << format_double(stats.rmse[i]) << ','
            << format_double(stats.cpmu[i]) << "\n";
    return out.str();
}

void write_run_csv(const std::string& path, const std::string& variant_name, std::uint64_t seed,
                   int runs, const RunStatistics& stats) {
    write_text_file(path, run_csv(variant_name, seed, runs, stats));
}

std::string archive_csv(const std::string& variant_name, std::uint64_t seed_base,
                        const std::vector<RunStatistics>& runs) {
    std::ostringstream out;
    out << "# rgpm-archive v1 variant=" << variant_name << " seed_base=" << seed_base
        << " runs=" << runs.size() << "\n";
    out << "run,k,rmse,cpmu\n";
    for (std::size_t r = 0; r < runs.size(); ++r)
        for (std::size_t i = 0; i < runs[r].checkpoints.size(); ++i)
            out << r << ',' << runs[r].checkpoints[i] << ',' << format_double(runs[r].rmse[i])
                << ',' << format_double(runs[r].cpmu[i]) << "\n";
    return out.str();
}

void write_archive_csv(const std::string& path, const std::string& variant_name,
                       std::uint64_t seed_base, const std::vector<RunStatistics>& runs) {
    write_text_file(path, archive_csv(variant_name, seed_base, runs));
}

std::string surface_csv(const std::string& field, const ScenarioConfig& scenario,
                        const Eigen::MatrixXd& eval_points, const Eigen::VectorXd& values) {
    if (scenario.kernel.dims() != 2)
        throw std::invalid_argument("surface_csv: only two-dimensional scenarios are supported");
    const int n0 = scenario.eval_points_per_dim;
    const int n1 = scenario.eval_points_per_dim;
    if (eval_points.rows() != static_cast<Eigen::Index>(n0) * n1 ||
        values.size() != eval_points.rows())
        throw std::invalid_argument("surface_csv: grid shape mismatch");

    std::ostringstream out;
    out << "# rgpm-surface v1 field=" << field << " hidden=" << scenario.hidden_id << " grid="
        << scenario.kernel.points_per_dim[0] << "x" << scenario.kernel.points_per_dim[1]
        << " L=" << format_double(scenario.kernel.length_scale)
        << " sigma_k=" << format_double(scenario.kernel.sigma_k);
    if (!scenario.constraints.empty())
        out << " r_ic=" << format_double(scenario.constraints.front().r_ic);
    out << "\n";
    out << "input1\\input0";
    for (int i = 0; i < n0; ++i) out << ',' << format_double(eval_points(i, 0));
    out << "\n";
    for (int row = 0; row < n1; ++row) {
        out << format_double(eval_points(static_cast<Eigen::Index>(row) * n0, 1));
        for (int i = 0; i < n0; ++i)
            out << ',' << format_double(values(static_cast<Eigen::Index>(row) * n0 + i));
        out << "\n";
    }
    return out.str();
}

void write_surface_csv(const std::string& path, const std::string& field,
                       const ScenarioConfig& scenario, const Eigen::MatrixXd& eval_points,
                       const Eigen::VectorXd& values) {
    write_text_file(path, surface_csv(field, scenario, eval_points, values));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open '" + path + "' for writing");
    out << content;
    if (!out) fail("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace rgpm::io
