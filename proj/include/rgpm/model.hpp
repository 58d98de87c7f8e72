#ifndef RGPM_MODEL_HPP
#define RGPM_MODEL_HPP

#include "rgpm/kernel.hpp"

#include <Eigen/Dense>

namespace rgpm {

/// GP prediction at a set of test inputs.
struct Prediction {
    Eigen::VectorXd mean;        ///< mu^p
    Eigen::MatrixXd covariance;  ///< full m x m predictive covariance C^p
    Eigen::MatrixXd gain;        ///< J = k(X_test, X) * K_I

    /// Diagonal of the covariance with tiny negatives clamped to zero.
    Eigen::VectorXd variance() const;
};

/// Recursive GP over a fixed basis-vector grid.
///
/// The state is the posterior mean mu^g and covariance C^g at the grid
/// vertices, updated with one scalar measurement per step. The kernel
/// matrix K and its regularized inverse K_I are precomputed once at
/// construction. All inference inputs are normalized grid coordinates.
class RgpModel {
public:
    explicit RgpModel(KernelConfig cfg);

    const KernelConfig& config() const { return cfg_; }
    const BasisGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& kernel_matrix() const { return k_; }
    const Eigen::MatrixXd& kernel_inverse() const { return k_inv_; }
    const Eigen::VectorXd& mean() const { return mu_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    long step() const { return step_; }
    int grid_size() const { return static_cast<int>(mu_.size()); }

    Prediction infer(const Eigen::MatrixXd& x_test) const;

    /// Mean-only inference, skipping the predictive covariance.
    Eigen::VectorXd infer_mean(const Eigen::MatrixXd& x_test) const;

    /// Measurement update with one observation y at normalized input x.
    void update(const Eigen::VectorXd& x, double y, double sigma_y2);

    /// H * mu^g: mean partial derivatives at the grid for a precomputed
    /// pseudo-measurement matrix H.
    Eigen::VectorXd gradient_means(const Eigen::MatrixXd& h) const;

    /// Replaces the posterior mean, keeping covariance and step. Used by the
    /// constraint engine, whose covariance changes are discarded by contract.
    void set_mean(const Eigen::VectorXd& mu);

    /// Restores a persisted state (snapshot load path).
    void restore_state(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, long step);

private:
    KernelConfig cfg_;
    BasisGrid grid_;
    Eigen::MatrixXd k_;      // K at the grid
    Eigen::MatrixXd k_inv_;  // (K + jitter I)^-1
    Eigen::VectorXd mu_;
    Eigen::MatrixXd cov_;
    long step_ = 0;
};

}  // namespace rgpm

#endif  // RGPM_MODEL_HPP
