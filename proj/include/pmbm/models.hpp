#pragma once

#include "pmbm/gaussian.hpp"
#include "pmbm/types.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <string>

namespace pmbm {

struct MotionModel {
    Matrix F;
    Matrix Q;
    double Ps = 1.0;
};

struct MeasModel {
    Matrix H;
    Matrix R;
    double Pd = 1.0;

    [[nodiscard]] Eigen::Index meas_dim() const { return H.rows(); }
    [[nodiscard]] Eigen::Index state_dim() const { return H.cols(); }
};

/// Poisson false alarms, uniform over an axis-aligned box in measurement space.
struct ClutterModel {
    double rate = 0.0;  ///< expected false alarms per scan
    Vector region_min;
    Vector region_max;

    [[nodiscard]] double volume() const { return (region_max - region_min).prod(); }
};

struct BirthModel {
    GaussianMixture intensity;
};

struct InitialUnknownIntensity {
    GaussianMixture intensity;
};

struct FilterParams {
    double prune_r = 1e-4;
    double prune_ppp_weight = 1e-5;
    double lbp_eps = 1e-6;
    int lbp_max_iter = 1000;
    double gate_prob = 0.999;
    double estimate_threshold = 0.8;
};

/// Everything a filter run needs. Immutable once validated.
struct ModelConfig {
    MotionModel motion;
    MeasModel measurement;
    ClutterModel clutter;
    BirthModel birth;
    InitialUnknownIntensity unknown_init;
    FilterParams filter;
};

/// λ^fa(z): rate / volume inside the region, zero outside.
inline double clutter_density(const ClutterModel& c, const Vector& z) {
    if (z.size() != c.region_min.size() || z.size() != c.region_max.size())
        throw InvalidInputError("clutter_density: measurement dimension does not match the clutter region");
    for (Eigen::Index k = 0; k < z.size(); ++k)
        if (z(k) < c.region_min(k) || z(k) > c.region_max(k)) return 0.0;
    return c.rate / c.volume();
}

namespace detail {

inline bool is_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

inline double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline bool is_psd(const Matrix& m) {
    return is_symmetric(m) && min_eigenvalue(m) >= -1e-10 * std::max(1.0, std::abs(m.trace()));
}

inline bool is_pd(const Matrix& m) { return is_symmetric(m) && m.size() > 0 && min_eigenvalue(m) > 0.0; }

inline bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

inline void check_mixture(const GaussianMixture& mix, Eigen::Index dim, const std::string& path) {
    for (std::size_t k = 0; k < mix.size(); ++k) {
        const auto& c = mix.components[k];
        const std::string at = path + "[" + std::to_string(k) + "]";
        if (!std::isfinite(c.weight) || c.weight < 0.0) throw ConfigError(at + ".weight: must be finite and >= 0");
        if (c.density.dim() != dim) throw ConfigError(at + ".mean: expected dimension " + std::to_string(dim));
        if (auto why = check_gaussian(c.density); !why.empty()) throw ConfigError(at + ".cov: " + why);
    }
}

} // namespace detail

/// Throws ConfigError naming the first field that violates a model invariant.
inline void validate(const ModelConfig& cfg) {
    const auto& mo = cfg.motion;
    const auto n = mo.F.rows();
    if (n == 0 || mo.F.cols() != n) throw ConfigError("motion.F: must be a non-empty square matrix");
    if (mo.Q.rows() != n || mo.Q.cols() != n) throw ConfigError("motion.Q: must match the dimension of F");
    if (!detail::is_psd(mo.Q)) throw ConfigError("motion.Q: must be symmetric positive semi-definite");
    if (!detail::is_probability(mo.Ps)) throw ConfigError("motion.Ps: must lie in [0, 1]");

    const auto& me = cfg.measurement;
    if (me.H.cols() != n || me.H.rows() == 0) throw ConfigError("measurement.H: must have as many columns as the state");
    const auto d = me.H.rows();
    if (me.R.rows() != d || me.R.cols() != d) throw ConfigError("measurement.R: must match the rows of H");
    if (!detail::is_pd(me.R)) throw ConfigError("measurement.R: must be symmetric positive definite");
    if (!detail::is_probability(me.Pd)) throw ConfigError("measurement.Pd: must lie in [0, 1]");

    const auto& cl = cfg.clutter;
    if (!std::isfinite(cl.rate) || cl.rate < 0.0) throw ConfigError("clutter.rate: must be finite and >= 0");
    if (cl.region_min.size() != d || cl.region_max.size() != d)
        throw ConfigError("clutter.region_min: region must have the measurement dimension");
    if (!((cl.region_max - cl.region_min).array() > 0.0).all())
        throw ConfigError("clutter.region_max: region must have positive volume");

    detail::check_mixture(cfg.birth.intensity, n, "birth");
    detail::check_mixture(cfg.unknown_init.intensity, n, "unknown_init");

    const auto& f = cfg.filter;
    if (!(f.prune_r >= 0.0 && f.prune_r < 1.0)) throw ConfigError("filter.prune_r: must lie in [0, 1)");
    if (!(f.prune_ppp_weight >= 0.0)) throw ConfigError("filter.prune_ppp_weight: must be >= 0");
    if (!(f.lbp_eps > 0.0)) throw ConfigError("filter.lbp_eps: must be > 0");
    if (f.lbp_max_iter < 1) throw ConfigError("filter.lbp_max_iter: must be >= 1");
    if (!(f.gate_prob > 0.0 && f.gate_prob <= 1.0)) throw ConfigError("filter.gate_prob: must lie in (0, 1]");
    if (!(f.estimate_threshold > 0.0 && f.estimate_threshold <= 1.0))
        throw ConfigError("filter.estimate_threshold: must lie in (0, 1]");
}

/// Nearly-constant-velocity model in two dimensions, state [x, vx, y, vy].
inline MotionModel constant_velocity_2d(double q, double T, double Ps) {
    Matrix F1(2, 2);
    F1 << 1.0, T, 0.0, 1.0;
    Matrix Q1(2, 2);
    Q1 << T * T * T / 3.0, T * T / 2.0, T * T / 2.0, T;
    Q1 *= q;
    const Matrix I2 = Matrix::Identity(2, 2);
    return {Eigen::kroneckerProduct(I2, F1).eval(), Eigen::kroneckerProduct(I2, Q1).eval(), Ps};
}

/// Position-only sensor for the [x, vx, y, vy] state.
inline MeasModel position_sensor_2d(double noise_var, double Pd) {
    Matrix H1(1, 2);
    H1 << 1.0, 0.0;
    return {Eigen::kroneckerProduct(Matrix::Identity(2, 2), H1).eval(), noise_var * Matrix::Identity(2, 2), Pd};
}

/// The coalescence benchmark parameters: q = 0.01, T = 1, R = I, Pd = 0.7,
/// Ps = 0.999, ten clutter returns per scan on [-100, 100]², birth
/// 0.05·N{0, P}, initial unknown-target intensity 10·N{0, P} with
/// P = diag[100², 1, 100², 1].
inline ModelConfig benchmark_config() {
    ModelConfig cfg;
    cfg.motion = constant_velocity_2d(0.01, 1.0, 0.999);
    cfg.measurement = position_sensor_2d(1.0, 0.7);
    cfg.clutter = {10.0, Vector::Constant(2, -100.0), Vector::Constant(2, 100.0)};
    Vector diag(4);
    diag << 100.0 * 100.0, 1.0, 100.0 * 100.0, 1.0;
    const Gaussian broad{Vector::Zero(4), diag.asDiagonal().toDenseMatrix()};
    cfg.birth.intensity.components = {{0.05, broad}};
    cfg.unknown_init.intensity.components = {{10.0, broad}};
    return cfg;
}

} // namespace pmbm

