#pragma once

#include "pmbm/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace pmbm {

/// Reciprocal condition number below which an innovation covariance is rejected.
inline constexpr double kMinInnovationRcond = 1e-12;

struct Gaussian {
    Vector mean;
    Matrix cov;

    [[nodiscard]] Eigen::Index dim() const { return mean.size(); }
};

struct WeightedGaussian {
    double weight = 0.0;
    Gaussian density;
};

struct GaussianMixture {
    std::vector<WeightedGaussian> components;

    [[nodiscard]] bool empty() const { return components.empty(); }
    [[nodiscard]] std::size_t size() const { return components.size(); }

    [[nodiscard]] double total_weight() const {
        double sum = 0.0;
        for (const auto& c : components) sum += c.weight;
        return sum;
    }
};

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Checks the Gaussian invariants: matching dimensions, finite entries,
/// symmetric and positive semi-definite covariance. Returns an empty string
/// when valid, otherwise a description of the first violation.
inline std::string check_gaussian(const Gaussian& g) {
    if (g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size())
        return "mean and covariance dimensions disagree";
    if (!g.mean.allFinite() || !g.cov.allFinite()) return "non-finite entry";
    const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
    if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        return "covariance is not symmetric";
    if (g.mean.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g.cov, Eigen::EigenvaluesOnly);
        const double trace = std::abs(g.cov.trace());
        if (es.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1.0))
            return "covariance is not positive semi-definite";
    }
    return {};
}

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw InvalidInputError(what);
}

} // namespace detail

/// x' = F x,  P' = F P Fᵀ + Q.
inline Gaussian kalman_predict(const Gaussian& g, const Matrix& F, const Matrix& Q) {
    detail::require(F.cols() == g.mean.size() && F.rows() == F.cols(),
                    "kalman_predict: F does not match the state dimension");
    detail::require(Q.rows() == F.rows() && Q.cols() == F.rows(),
                    "kalman_predict: Q does not match the state dimension");
    detail::require(g.cov.rows() == g.mean.size() && g.cov.cols() == g.mean.size(),
                    "kalman_predict: covariance does not match the mean");
    return {F * g.mean, symmetrize(F * g.cov * F.transpose() + Q)};
}

/// Measurement-independent part of a Kalman update. Computing it once per
/// prior component lets many measurements be processed cheaply, which is how
/// the per-track and per-PPP-component loops use it.
class PreparedUpdate {
public:
    PreparedUpdate(const Gaussian& prior, const Matrix& H, const Matrix& R) : prior_mean_(prior.mean) {
        detail::require(H.cols() == prior.mean.size(), "kalman_update: H does not match the state dimension");
        detail::require(R.rows() == H.rows() && R.cols() == H.rows(),
                        "kalman_update: R does not match the measurement dimension");
        detail::require(prior.cov.rows() == prior.mean.size() && prior.cov.cols() == prior.mean.size(),
                        "kalman_update: covariance does not match the mean");

        predicted_z_ = H * prior.mean;
        const Matrix PHt = prior.cov * H.transpose();
        S_ = symmetrize(H * PHt + R);

        Eigen::SelfAdjointEigenSolver<Matrix> es(S_, Eigen::EigenvaluesOnly);
        const double max_ev = es.eigenvalues().maxCoeff();
        const double min_ev = es.eigenvalues().minCoeff();
        if (!(max_ev > 0.0) || min_ev / max_ev < kMinInnovationRcond)
            throw NumericalError("kalman_update: innovation covariance is singular or ill-conditioned");

        llt_.compute(S_);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("kalman_update: Cholesky factorisation of the innovation covariance failed");

        gain_ = llt_.solve(PHt.transpose()).transpose();
        posterior_cov_ = symmetrize(prior.cov - gain_ * H * prior.cov);

        const double log_det = 2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
        log_norm_ = -0.5 * (static_cast<double>(S_.rows()) * std::log(2.0 * std::numbers::pi) + log_det);
    }

    [[nodiscard]] Vector innovation(const Vector& z) const {
        detail::require(z.size() == predicted_z_.size(), "kalman_update: measurement has the wrong dimension");
        return z - predicted_z_;
    }

    /// Squared Mahalanobis distance of the innovation under S.
    [[nodiscard]] double mahalanobis2(const Vector& z) const {
        const Vector nu = innovation(z);
        return nu.dot(llt_.solve(nu));
    }

    [[nodiscard]] double log_likelihood(const Vector& z) const { return log_norm_ - 0.5 * mahalanobis2(z); }

    /// N{z − H x̄; 0, S}.
    [[nodiscard]] double likelihood(const Vector& z) const { return std::exp(log_likelihood(z)); }

    [[nodiscard]] Gaussian posterior(const Vector& z) const {
        return {prior_mean_ + gain_ * innovation(z), posterior_cov_};
    }

    [[nodiscard]] const Matrix& innovation_cov() const { return S_; }
    [[nodiscard]] const Matrix& gain() const { return gain_; }
    [[nodiscard]] const Matrix& posterior_cov() const { return posterior_cov_; }

private:
    Vector prior_mean_;
    Vector predicted_z_;
    Matrix S_;
    Eigen::LLT<Matrix> llt_;
    Matrix gain_;
    Matrix posterior_cov_;
    double log_norm_ = 0.0;
};

struct KalmanUpdateResult {
    Gaussian posterior;
    double predictive_likelihood = 0.0;
};

inline KalmanUpdateResult kalman_update(const Gaussian& g, const Matrix& H, const Matrix& R, const Vector& z) {
    const PreparedUpdate upd(g, H, R);
    return {upd.posterior(z), upd.likelihood(z)};
}

/// Gaussian density N{x; mean, cov}.
inline double gaussian_pdf(const Vector& x, const Gaussian& g) {
    detail::require(x.size() == g.mean.size(), "gaussian_pdf: dimension mismatch");
    Eigen::LLT<Matrix> llt(g.cov);
    if (llt.info() != Eigen::Success) throw NumericalError("gaussian_pdf: covariance is not positive definite");
    const Vector d = x - g.mean;
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double k = static_cast<double>(x.size());
    return std::exp(-0.5 * (d.dot(llt.solve(d)) + log_det + k * std::log(2.0 * std::numbers::pi)));
}

struct MomentMatch {
    double total_weight = 0.0;
    Gaussian density;
};

/// Collapses a mixture to the single Gaussian with the same first two moments.
/// Zero-weight components are ignored.
inline MomentMatch moment_match(const GaussianMixture& mix) {
    if (mix.empty()) throw InvalidInputError("moment_match: empty mixture");
    const double total = mix.total_weight();
    if (!(total > 0.0) || !std::isfinite(total))
        throw InvalidInputError("moment_match: total weight must be positive and finite");

    const Eigen::Index d = mix.components.front().density.dim();
    Vector mean = Vector::Zero(d);
    const WeightedGaussian* sole = nullptr;
    int positive = 0;
    for (const auto& c : mix.components) {
        detail::require(c.weight >= 0.0, "moment_match: negative component weight");
        detail::require(c.density.dim() == d, "moment_match: component dimensions differ");
        if (c.weight > 0.0) {
            mean += c.weight * c.density.mean;
            sole = &c;
            ++positive;
        }
    }
    if (positive == 1) return {total, sole->density};
    mean /= total;

    Matrix cov = Matrix::Zero(d, d);
    for (const auto& c : mix.components) {
        if (c.weight == 0.0) continue;
        const Vector spread = c.density.mean - mean;
        cov += c.weight * (c.density.cov + spread * spread.transpose());
    }
    cov /= total;
    return {total, {std::move(mean), symmetrize(cov)}};
}

} // namespace pmbm
