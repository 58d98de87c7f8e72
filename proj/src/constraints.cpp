#include "rgpm/constraints.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rgpm {

void MonotonicityConstraint::validate(int grid_size) const {
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("MonotonicityConstraint: sign must be -1 or +1");
    if (delta_b < 0.0 || delta_u < 0.0)
        throw std::invalid_argument("MonotonicityConstraint: delta_b and delta_u must be >= 0");
    if (max_updates < 0)
        throw std::invalid_argument("MonotonicityConstraint: max_updates must be >= 0");
    if (!(r_ic > 0.0))
        throw std::invalid_argument("MonotonicityConstraint: r_ic must be > 0");
    if (h.rows() != grid_size || h.cols() != grid_size)
        throw std::invalid_argument("MonotonicityConstraint: H shape does not match the grid");
}

long ConstraintReport::total() const {
    long n = 0;
    for (int c : updates_applied) n += c;
    return n;
}

double relu_pseudo_measurement(double value, int sign, double bound) {
    return std::max(0.0, static_cast<double>(sign) * (value - bound));
}

Eigen::MatrixXd build_monotonicity_matrix(const BasisGrid& grid, const KernelConfig& cfg,
                                          const Eigen::MatrixXd& k_inv, int dim) {
    if (dim < 0 || dim >= cfg.dims())
        throw std::invalid_argument("build_monotonicity_matrix: dim out of range");
    const Eigen::VectorXd col = grid.vertices.col(dim);
    const Eigen::MatrixXd k = se_kernel(grid.vertices, grid.vertices, cfg);
    const Eigen::Index p = grid.vertices.rows();
    // (a, b) entry of the difference term is X_l[a] - X_l[b].
    Eigen::MatrixXd diff =
        col.replicate(1, p) - col.transpose().replicate(p, 1);
    const double scale = -grid.beta(dim) / cfg.length_scale;
    return scale * (diff.cwiseProduct(k) * k_inv);
}

Eigen::MatrixXd build_output_constraint_matrix(const BasisGrid& grid) {
    const Eigen::Index p = grid.vertices.rows();
    return Eigen::MatrixXd::Identity(p, p);
}

MonotonicityConstraint make_monotonicity_constraint(const RgpModel& model, int dim, int sign,
                                                    double bound, double delta_b, double delta_u,
                                                    int max_updates, double r_ic) {
    MonotonicityConstraint c;
    c.dim = dim;
    c.sign = sign;
    c.bound = bound;
    c.delta_b = delta_b;
    c.delta_u = delta_u;
    c.max_updates = max_updates;
    c.r_ic = r_ic;
    c.h = build_monotonicity_matrix(model.grid(), model.config(), model.kernel_inverse(), dim);
    c.validate(model.grid_size());
    return c;
}

MonotonicityConstraint make_output_constraint(const RgpModel& model, int sign, double bound,
                                              double delta_b, double delta_u, int max_updates,
                                              double r_ic) {
    MonotonicityConstraint c;
    c.dim = -1;  // not tied to an input dimension
    c.sign = sign;
    c.bound = bound;
    c.delta_b = delta_b;
    c.delta_u = delta_u;
    c.max_updates = max_updates;
    c.r_ic = r_ic;
    c.h = build_output_constraint_matrix(model.grid());
    return c;
}

ConstraintReport apply_constraints(RgpModel& model,
                                   const std::vector<MonotonicityConstraint>& constraints) {
    const int p = model.grid_size();
    ConstraintReport report;
    report.updates_applied.assign(constraints.size(), 0);
    report.activations.assign(constraints.size(), {});
    report.budget_exhausted.assign(constraints.size(), false);
    if (constraints.empty()) return report;

    Eigen::VectorXd mu = model.mean();
    Eigen::MatrixXd cov = model.covariance();  // working copy; the model keeps the reset target

    for (std::size_t c = 0; c < constraints.size(); ++c) {
        const MonotonicityConstraint& con = constraints[c];
        con.validate(p);
        const double s = static_cast<double>(con.sign);
        const double b_eff = con.effective_bound();
        const Eigen::VectorXd t = con.h * mu;  // decides this pass's activation set
        int applied = 0;
        for (int j = 0; j < p; ++j) {
            if (!(s * (t(j) - b_eff) > con.delta_b)) continue;
            if (applied >= con.max_updates) {
                report.budget_exhausted[c] = true;
                break;
            }
            const Eigen::VectorXd h_j = con.h.row(j).transpose();
            const Eigen::VectorXd cov_h = cov * h_j;
            const double denom = h_j.dot(cov_h) + con.r_ic;
            if (!(denom > 0.0))
                throw std::runtime_error("apply_constraints: nonpositive innovation variance");
            // Scalar EKF update for the linearized row s * h_j^T with
            // pseudo-measurement 0; the residual uses the running mean.
            const double innovation = s * (h_j.dot(mu) - b_eff);
            mu.noalias() += (s / denom) * cov_h * (0.0 - innovation);
            cov.noalias() -= (cov_h / denom) * cov_h.transpose();
            ++applied;
            report.activations[c].push_back(j);
        }
        report.updates_applied[c] = applied;
    }
    model.set_mean(mu);  // covariance reset: the model's covariance was never written
    return report;
}

void batch_constraint_update(RgpModel& model,
                             const std::vector<MonotonicityConstraint>& constraints) {
    const int p = model.grid_size();
    const Eigen::VectorXd& mu = model.mean();
    const Eigen::MatrixXd& cov = model.covariance();

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> innovations;
    std::vector<double> noises;
    for (const MonotonicityConstraint& con : constraints) {
        con.validate(p);
        const double s = static_cast<double>(con.sign);
        const double b_eff = con.effective_bound();
        const Eigen::VectorXd t = con.h * mu;
        for (int j = 0; j < p; ++j) {
            if (!(s * (t(j) - b_eff) > con.delta_b)) continue;
            rows.push_back(s * con.h.row(j));
            innovations.push_back(s * (t(j) - b_eff));
            noises.push_back(con.r_ic);
        }
    }
    if (rows.empty()) return;

    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd h_stack(m, p);
    Eigen::VectorXd y_hat(m);
    for (int i = 0; i < m; ++i) {
        h_stack.row(i) = rows[i];
        y_hat(i) = innovations[i];
    }
    Eigen::MatrixXd innovation_cov = h_stack * cov * h_stack.transpose();
    for (int i = 0; i < m; ++i) innovation_cov(i, i) += noises[i];
    Eigen::LLT<Eigen::MatrixXd> llt(innovation_cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("batch_constraint_update: singular innovation matrix");
    const Eigen::MatrixXd gain = cov * h_stack.transpose() * llt.solve(Eigen::MatrixXd::Identity(m, m));
    model.set_mean(mu - gain * y_hat);  // covariance change discarded, as in the sequential path
}

double constraint_satisfaction(const RgpModel& model,
                               const std::vector<MonotonicityConstraint>& constraints,
                               double tol) {
    const int p = model.grid_size();
    if (constraints.empty() || p == 0) return 1.0;
    int satisfied = 0;
    std::vector<Eigen::VectorXd> values;
    values.reserve(constraints.size());
    for (const MonotonicityConstraint& con : constraints) values.push_back(con.h * model.mean());
    for (int j = 0; j < p; ++j) {
        bool ok = true;
        for (std::size_t c = 0; c < constraints.size(); ++c) {
            const double s = static_cast<double>(constraints[c].sign);
            if (s * (values[c](j) - constraints[c].bound) > tol) {
                ok = false;
                break;
            }
        }
        if (ok) ++satisfied;
    }
    return static_cast<double>(satisfied) / static_cast<double>(p);
}

}  // namespace rgpm
