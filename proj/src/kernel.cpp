#include "rgpm/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rgpm {

int KernelConfig::grid_size() const {
    int p = 1;
    for (int n : points_per_dim) p *= n;
    return p;
}

double KernelConfig::effective_jitter() const {
    return jitter >= 0.0 ? jitter : 1e-12 * sigma_k * sigma_k;
}

void KernelConfig::validate() const {
    if (!(sigma_k > 0.0)) throw std::invalid_argument("KernelConfig: sigma_k must be > 0");
    if (!(length_scale > 0.0)) throw std::invalid_argument("KernelConfig: length_scale must be > 0");
    if (points_per_dim.empty()) throw std::invalid_argument("KernelConfig: points_per_dim is empty");
    if (input_bounds.size() != points_per_dim.size())
        throw std::invalid_argument("KernelConfig: input_bounds size does not match points_per_dim");
    for (std::size_t i = 0; i < points_per_dim.size(); ++i) {
        if (points_per_dim[i] < 2)
            throw std::invalid_argument("KernelConfig: points_per_dim[" + std::to_string(i) + "] must be >= 2");
        if (!(input_bounds[i].first < input_bounds[i].second))
            throw std::invalid_argument("KernelConfig: input_bounds[" + std::to_string(i) +
                                        "] must satisfy lower < upper");
    }
}

Eigen::MatrixXd se_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                          const KernelConfig& cfg) {
    if (a.cols() != cfg.dims() || b.cols() != cfg.dims())
        throw std::invalid_argument("se_kernel: input column count does not match cfg.dims()");
    const double sigma2 = cfg.sigma_k * cfg.sigma_k;
    const double inv_two_l = 1.0 / (2.0 * cfg.length_scale);
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            const double d2 = (a.row(i) - b.row(j)).squaredNorm();
            k(i, j) = sigma2 * std::exp(-d2 * inv_two_l);
        }
    }
    return k;
}

BasisGrid build_basis_grid(const KernelConfig& cfg) {
    cfg.validate();
    const int n_dims = cfg.dims();
    const int p = cfg.grid_size();
    BasisGrid grid;
    grid.vertices.resize(p, n_dims);
    for (int row = 0; row < p; ++row) {
        int idx = row;
        for (int d = 0; d < n_dims; ++d) {
            grid.vertices(row, d) = static_cast<double>(idx % cfg.points_per_dim[d]);
            idx /= cfg.points_per_dim[d];
        }
    }
    grid.beta.resize(n_dims);
    for (int d = 0; d < n_dims; ++d) {
        grid.beta(d) = (cfg.points_per_dim[d] - 1) /
                       (cfg.input_bounds[d].second - cfg.input_bounds[d].first);
    }
    return grid;
}

Eigen::VectorXd normalize(const Eigen::VectorXd& zeta, const KernelConfig& cfg) {
    if (zeta.size() != cfg.dims())
        throw std::invalid_argument("normalize: input size does not match cfg.dims()");
    Eigen::VectorXd x(zeta.size());
    for (int d = 0; d < cfg.dims(); ++d) {
        const double beta = (cfg.points_per_dim[d] - 1) /
                            (cfg.input_bounds[d].second - cfg.input_bounds[d].first);
        x(d) = (zeta(d) - cfg.input_bounds[d].first) * beta;
    }
    return x;
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& x, const KernelConfig& cfg) {
    if (x.size() != cfg.dims())
        throw std::invalid_argument("denormalize: input size does not match cfg.dims()");
    Eigen::VectorXd zeta(x.size());
    for (int d = 0; d < cfg.dims(); ++d) {
        const double beta = (cfg.points_per_dim[d] - 1) /
                            (cfg.input_bounds[d].second - cfg.input_bounds[d].first);
        zeta(d) = x(d) / beta + cfg.input_bounds[d].first;
    }
    return zeta;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& zeta, const KernelConfig& cfg) {
    if (zeta.cols() != cfg.dims())
        throw std::invalid_argument("normalize_rows: column count does not match cfg.dims()");
    Eigen::MatrixXd x(zeta.rows(), zeta.cols());
    for (Eigen::Index r = 0; r < zeta.rows(); ++r)
        x.row(r) = normalize(zeta.row(r).transpose(), cfg).transpose();
    return x;
}

}  // namespace rgpm
