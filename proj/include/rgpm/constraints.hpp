#ifndef RGPM_CONSTRAINTS_HPP
#define RGPM_CONSTRAINTS_HPP

#include "rgpm/kernel.hpp"
#include "rgpm/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rgpm {

/// One soft inequality constraint enforced through pseudo-measurements.
///
/// sign = +1 encodes "value < bound", sign = -1 encodes "value > bound",
/// where "value" is h_j^T mu for each row j of the measurement matrix H.
/// For monotonicity constraints H maps the grid mean onto the mean partial
/// derivatives w.r.t. raw input dimension `dim`; for output constraints H
/// is the identity.
struct MonotonicityConstraint {
    int dim = 0;             ///< constrained raw-input dimension l
    int sign = +1;           ///< s_l in {-1, +1}
    double bound = 0.0;      ///< B_l
    double delta_b = 0.0;    ///< activation margin, >= 0
    double delta_u = 0.0;    ///< update offset, >= 0
    int max_updates = 0;     ///< per-step budget n~_IC,l, >= 0
    double r_ic = 1e-8;      ///< pseudo-measurement noise, > 0
    Eigen::MatrixXd h;       ///< P x P measurement matrix H_IC,l

    /// Offset bound B~_l = B_l - delta_u * s_l the update drives values to.
    double effective_bound() const { return bound - delta_u * static_cast<double>(sign); }

    void validate(int grid_size) const;
};

/// Per-step accounting of applied pseudo-measurement updates.
struct ConstraintReport {
    std::vector<int> updates_applied;           ///< per constraint
    std::vector<std::vector<int>> activations;  ///< updated grid indices per constraint
    std::vector<bool> budget_exhausted;         ///< violations were skipped after the budget ran out

    long total() const;
};

/// ReLU constraint measurement: max(0, sign * (value - bound)).
double relu_pseudo_measurement(double value, int sign, double bound);

/// H_IC,l = -(beta_l / L) * ((X_l - X_l^T) o k(X, X)) * K_I, the linear map
/// from the grid mean to the mean partial derivatives w.r.t. raw input
/// dimension `dim`, with the test grid equal to the basis grid.
Eigen::MatrixXd build_monotonicity_matrix(const BasisGrid& grid, const KernelConfig& cfg,
                                          const Eigen::MatrixXd& k_inv, int dim);

/// Output constraints on the basis grid reduce to H = I.
Eigen::MatrixXd build_output_constraint_matrix(const BasisGrid& grid);

MonotonicityConstraint make_monotonicity_constraint(const RgpModel& model, int dim, int sign,
                                                    double bound, double delta_b, double delta_u,
                                                    int max_updates, double r_ic);

MonotonicityConstraint make_output_constraint(const RgpModel& model, int sign, double bound,
                                              double delta_b, double delta_u, int max_updates,
                                              double r_ic);

/// Sequential pseudo-measurement pass over all constraints, in order.
///
/// For each constraint the activation set is decided once from
/// t = H * mu at the start of that constraint's pass; active grid rows are
/// then processed in ascending order as scalar EKF updates (at most
/// max_updates of them) with the innovation evaluated at the running mean,
/// which keeps the pass equivalent to the batchwise update within a
/// dimension. The covariance evolves during the pass but is discarded at
/// the end: only the mean correction survives.
ConstraintReport apply_constraints(RgpModel& model,
                                   const std::vector<MonotonicityConstraint>& constraints);

/// Batchwise EKF reference path: one stacked update over all active rows,
/// linearized at the current mean, pseudo-measurements zero, diagonal noise.
/// Budgets are ignored. Covariance changes are discarded as above.
/// Kept as an independent oracle for the sequential implementation.
void batch_constraint_update(RgpModel& model,
                             const std::vector<MonotonicityConstraint>& constraints);

/// Fraction of grid points whose constrained values satisfy every
/// constraint within `tol`: sign * (h_j^T mu - bound) <= tol for all
/// constraints at point j.
double constraint_satisfaction(const RgpModel& model,
                               const std::vector<MonotonicityConstraint>& constraints,
                               double tol);

}  // namespace rgpm

#endif  // RGPM_CONSTRAINTS_HPP
