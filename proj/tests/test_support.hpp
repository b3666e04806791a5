#pragma once

#include "pmbm/pmbm.hpp"

#include <random>
#include <vector>

namespace pmbm::fixtures {

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

inline Matrix mat1(double x) { return Matrix::Constant(1, 1, x); }

inline Gaussian scalar_gaussian(double mean, double var) { return {vec({mean}), mat1(var)}; }

inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index d, double floor = 0.1) {
    std::normal_distribution<double> nd;
    Matrix A(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) A(i, j) = nd(rng);
    return A * A.transpose() + floor * Matrix::Identity(d, d);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index d, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = nd(rng);
    return v;
}

/// Random association weights: uniform(0,1) entries, some zeroed, new-track
/// weights at least `new_floor`.
inline WeightMatrix random_weights(std::mt19937_64& rng, int n, int m, double zero_prob = 0.2, double new_floor = 0.01) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeightMatrix W{Matrix::Zero(n, m + 1), Vector::Zero(m)};
    for (int i = 0; i < n; ++i) {
        W.w_track(i, 0) = 0.05 + u(rng);
        for (int j = 1; j <= m; ++j) W.w_track(i, j) = u(rng) < zero_prob ? 0.0 : u(rng);
    }
    for (int j = 0; j < m; ++j) W.w_new(j) = new_floor + u(rng);
    return W;
}

/// A scalar-position model with unit noise, handy for hand calculations.
inline MeasModel scalar_sensor(double Pd) { return {mat1(1.0), mat1(1.0), Pd}; }

inline ClutterModel scalar_clutter(double rate, double lo = -100.0, double hi = 100.0) {
    return {rate, vec({lo}), vec({hi})};
}

/// Random single-scan 2-D instance under the benchmark models: a few tracks
/// and measurements scattered near the origin.
struct RandomScan {
    std::vector<BernoulliTrack> tracks;
    PppIntensity ppp;
    std::vector<Vector> z;
};

inline RandomScan random_scan(std::mt19937_64& rng, const ModelConfig& cfg, int n, int m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomScan s;
    for (int i = 0; i < n; ++i) {
        BernoulliTrack t;
        t.label = {0, i + 1};
        t.r = 0.05 + 0.95 * u(rng);
        t.density = {random_vector(rng, 4, 3.0), random_spd(rng, 4, 0.5)};
        s.tracks.push_back(t);
    }
    s.ppp.mixture = cfg.unknown_init.intensity;
    s.ppp.mixture.components.push_back({0.5, {random_vector(rng, 4, 3.0), random_spd(rng, 4, 1.0)}});
    for (int j = 0; j < m; ++j) s.z.push_back(random_vector(rng, 2, 3.0));
    return s;
}

} // namespace pmbm::fixtures
