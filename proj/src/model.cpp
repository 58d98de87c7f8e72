#include "rgpm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rgpm {

namespace {
// Predicted variances this far below zero indicate a broken covariance.
constexpr double kVarianceFloor = -1e-9;
}  // namespace

Eigen::VectorXd Prediction::variance() const {
    Eigen::VectorXd v = covariance.diagonal();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) < 0.0) {
            if (v(i) < kVarianceFloor)
                throw std::runtime_error("Prediction: negative predicted variance beyond tolerance");
            v(i) = 0.0;
        }
    }
    return v;
}

RgpModel::RgpModel(KernelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    grid_ = build_basis_grid(cfg_);
    k_ = se_kernel(grid_.vertices, grid_.vertices, cfg_);
    const int p = static_cast<int>(k_.rows());
    Eigen::MatrixXd regularized = k_;
    regularized.diagonal().array() += cfg_.effective_jitter();
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("RgpModel: kernel matrix is not positive definite despite jitter");
    k_inv_ = llt.solve(Eigen::MatrixXd::Identity(p, p));
    mu_ = Eigen::VectorXd::Zero(p);
    cov_ = k_;
    step_ = 0;
}

Prediction RgpModel::infer(const Eigen::MatrixXd& x_test) const {
    if (x_test.cols() != cfg_.dims())
        throw std::invalid_argument("RgpModel::infer: test input column count mismatch");
    Prediction out;
    out.gain = se_kernel(x_test, grid_.vertices, cfg_) * k_inv_;
    out.mean = out.gain * mu_;
    out.covariance = se_kernel(x_test, x_test, cfg_) + out.gain * (cov_ - k_) * out.gain.transpose();
    return out;
}

Eigen::VectorXd RgpModel::infer_mean(const Eigen::MatrixXd& x_test) const {
    if (x_test.cols() != cfg_.dims())
        throw std::invalid_argument("RgpModel::infer_mean: test input column count mismatch");
    return se_kernel(x_test, grid_.vertices, cfg_) * (k_inv_ * mu_);
}

void RgpModel::update(const Eigen::VectorXd& x, double y, double sigma_y2) {
    if (!(sigma_y2 > 0.0))
        throw std::invalid_argument("RgpModel::update: sigma_y2 must be > 0");
    if (x.size() != cfg_.dims())
        throw std::invalid_argument("RgpModel::update: input size mismatch");

    const Eigen::RowVectorXd kx =
        se_kernel(x.transpose(), grid_.vertices, cfg_).row(0);
    const Eigen::RowVectorXd j = kx * k_inv_;
    const double mu_p = j * mu_;
    const double c_p = cfg_.sigma_k * cfg_.sigma_k + j * (cov_ - k_) * j.transpose();
    if (c_p < kVarianceFloor)
        throw std::runtime_error("RgpModel::update: negative predicted variance beyond tolerance");

    const double innovation_var = std::max(c_p, 0.0) + sigma_y2;
    const Eigen::VectorXd gain = (cov_ * j.transpose()) / innovation_var;
    mu_.noalias() += gain * (y - mu_p);
    cov_.noalias() -= gain * (j * cov_);
    cov_ = 0.5 * (cov_ + cov_.transpose().eval());
    ++step_;
}

Eigen::VectorXd RgpModel::gradient_means(const Eigen::MatrixXd& h) const {
    if (h.cols() != mu_.size())
        throw std::invalid_argument("RgpModel::gradient_means: H column count mismatch");
    return h * mu_;
}

void RgpModel::set_mean(const Eigen::VectorXd& mu) {
    if (mu.size() != mu_.size())
        throw std::invalid_argument("RgpModel::set_mean: size mismatch");
    mu_ = mu;
}

void RgpModel::restore_state(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, long step) {
    const int p = grid_size();
    if (mu.size() != p || cov.rows() != p || cov.cols() != p)
        throw std::invalid_argument("RgpModel::restore_state: shape mismatch");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + cov.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("RgpModel::restore_state: covariance is not symmetric");
    mu_ = mu;
    cov_ = cov;
    step_ = step;
}

}  // namespace rgpm
