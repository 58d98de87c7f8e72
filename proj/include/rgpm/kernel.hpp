#ifndef RGPM_KERNEL_HPP
#define RGPM_KERNEL_HPP

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace rgpm {

/// Squared-exponential kernel hyperparameters together with the basis-grid
/// layout and the raw input ranges it is anchored to.
///
/// The kernel operates on normalized inputs: each raw input dimension is
/// mapped onto an equidistant grid with step size 1, so a single joint
/// length scale covers all dimensions.
struct KernelConfig {
    double sigma_k = 1.0;       ///< signal standard deviation (output units)
    double length_scale = 1.0;  ///< joint length scale L on normalized inputs
    std::vector<int> points_per_dim;                      ///< grid points N_i per dimension, each >= 2
    std::vector<std::pair<double, double>> input_bounds;  ///< raw (lower, upper) per dimension
    double jitter = -1.0;  ///< diagonal regularizer for inverting K; negative selects the default 1e-12 * sigma_k^2

    int dims() const { return static_cast<int>(points_per_dim.size()); }
    int grid_size() const;
    double effective_jitter() const;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Fixed normalized grid of basis vectors. Row ordering is
/// dimension-0-fastest; coordinates in dimension i lie in {0, .., N_i - 1}.
struct BasisGrid {
    Eigen::MatrixXd vertices;  ///< P x n_X
    Eigen::VectorXd beta;      ///< per-dimension factor (N_i - 1) / (upper_i - lower_i)
};

/// k(a, b) = sigma_k^2 * exp(-|a - b|^2 / (2 L)) for every row pair.
/// Inputs are normalized points, one per row.
Eigen::MatrixXd se_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          const KernelConfig& cfg);

BasisGrid build_basis_grid(const KernelConfig& cfg);

/// Raw input -> normalized grid coordinates, X_i = (zeta_i - lower_i) * beta_i.
/// Out-of-range inputs extrapolate linearly.
Eigen::VectorXd normalize(const Eigen::VectorXd& zeta, const KernelConfig& cfg);
Eigen::VectorXd denormalize(const Eigen::VectorXd& x, const KernelConfig& cfg);

/// Row-wise normalization of a matrix of raw input points.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& zeta, const KernelConfig& cfg);

}  // namespace rgpm

#endif  // RGPM_KERNEL_HPP
