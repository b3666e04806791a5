#pragma once

#include "pmbm/models.hpp"
#include "pmbm/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pmbm {

inline constexpr int kNumScans = 200;
inline constexpr int kMidScan = 100;

struct TargetTrajectory {
    int birth_scan = 1;
    int death_scan = kNumScans;
    std::vector<Vector> states;         ///< one per scan in [birth_scan, death_scan]
    std::vector<Vector> process_noise;  ///< states[k+1] = F·states[k] + process_noise[k]

    [[nodiscard]] bool alive(int scan) const { return scan >= birth_scan && scan <= death_scan; }
    [[nodiscard]] const Vector& at(int scan) const { return states.at(static_cast<std::size_t>(scan - birth_scan)); }
};

struct GroundTruth {
    int num_scans = kNumScans;
    std::vector<TargetTrajectory> targets;

    /// States of the targets alive at `scan`, in target order.
    [[nodiscard]] std::vector<Vector> states_at(int scan) const {
        std::vector<Vector> out;
        for (const auto& t : targets)
            if (t.alive(scan)) out.push_back(t.at(scan));
        return out;
    }
};

struct Scan {
    int index = 0;
    std::vector<Vector> measurements;
};

/// splitmix64 finalizer; derives independent stream seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

/// Draw from N(mean, cov); cov only needs to be positive semi-definite.
inline Vector sample_gaussian(Rng& rng, const Vector& mean, const Matrix& cov) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector sd = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::normal_distribution<double> normal;
    Vector u(mean.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    return mean + es.eigenvectors() * sd.asDiagonal() * u;
}

/// Birth scan of target k in the staggered scenario: 10·k, never before the
/// first scan and never after the midpoint.
inline int staggered_birth_scan(int k) { return std::clamp(10 * k, 1, kMidScan); }

/// Targets that all pass near the origin at the midpoint scan. Case 1 starts
/// every target at scan 1 with a tight midpoint spread; case 2 staggers births
/// and uses a wider spread. Each trajectory is sampled backward from the
/// midpoint and forward to the last scan, then rebuilt forward from its first
/// state so that replaying the recorded noise reproduces it exactly.
inline GroundTruth gen_scenario(int scenario_case, int n, const MotionModel& motion, std::uint64_t seed) {
    if (scenario_case != 1 && scenario_case != 2) throw InvalidInputError("gen_scenario: case must be 1 or 2");
    if (n < 1) throw InvalidInputError("gen_scenario: need at least one target");
    const auto dim = motion.F.rows();
    const double spread = scenario_case == 1 ? 1e-6 : 0.25;
    const Matrix F_inv = motion.F.inverse();
    const Vector zero = Vector::Zero(dim);

    GroundTruth gt;
    for (int k = 0; k < n; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        TargetTrajectory t;
        t.birth_scan = scenario_case == 1 ? 1 : staggered_birth_scan(k);
        t.death_scan = kNumScans;

        const Vector mid = sample_gaussian(rng, zero, spread * Matrix::Identity(dim, dim));
        // noise[s - birth] drives the transition from scan s to s + 1.
        std::vector<Vector> noise(static_cast<std::size_t>(t.death_scan - t.birth_scan));
        Vector x = mid;
        for (int s = kMidScan - 1; s >= t.birth_scan; --s) {
            Vector w = sample_gaussian(rng, zero, motion.Q);
            x = F_inv * (x - w);
            noise[static_cast<std::size_t>(s - t.birth_scan)] = std::move(w);
        }
        for (int s = kMidScan; s < t.death_scan; ++s)
            noise[static_cast<std::size_t>(s - t.birth_scan)] = sample_gaussian(rng, zero, motion.Q);

        t.states.push_back(x);
        for (const auto& w : noise) t.states.push_back(motion.F * t.states.back() + w);
        t.process_noise = std::move(noise);
        gt.targets.push_back(std::move(t));
    }
    return gt;
}

/// One scan per time step: independent Pd-thinned detections with Gaussian
/// noise, Poisson clutter uniform over the region, order shuffled.
inline std::vector<Scan> gen_measurements(const GroundTruth& gt, const MeasModel& meas, const ClutterModel& clutter,
                                          std::uint64_t seed) {
    const auto mdim = meas.meas_dim();
    const Vector zero = Vector::Zero(mdim);
    std::vector<Scan> scans;
    scans.reserve(static_cast<std::size_t>(gt.num_scans));
    for (int s = 1; s <= gt.num_scans; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        std::bernoulli_distribution detect(meas.Pd);
        Scan scan{s, {}};
        for (const auto& t : gt.targets) {
            if (!t.alive(s) || !detect(rng)) continue;
            scan.measurements.push_back(meas.H * t.at(s) + sample_gaussian(rng, zero, meas.R));
        }
        const int n_clutter = clutter.rate > 0.0 ? std::poisson_distribution<int>(clutter.rate)(rng) : 0;
        for (int c = 0; c < n_clutter; ++c) {
            Vector z(mdim);
            for (Eigen::Index d = 0; d < mdim; ++d)
                z(d) = std::uniform_real_distribution<double>(clutter.region_min(d), clutter.region_max(d))(rng);
            scan.measurements.push_back(std::move(z));
        }
        std::shuffle(scan.measurements.begin(), scan.measurements.end(), rng);
        scans.push_back(std::move(scan));
    }
    return scans;
}

namespace detail {

inline nlohmann::json vectors_to_json(const std::vector<Vector>& vs) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : vs) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return out;
}

inline std::vector<Vector> vectors_from_json(const nlohmann::json& j) {
    std::vector<Vector> out;
    for (const auto& row : j) {
        const auto values = row.get<std::vector<double>>();
        Vector v(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
        if (!v.allFinite()) throw InvalidInputError("non-finite vector entry");
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace detail

inline nlohmann::json truth_to_json(const GroundTruth& gt) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : gt.targets)
        targets.push_back({{"birth", t.birth_scan},
                           {"death", t.death_scan},
                           {"states", detail::vectors_to_json(t.states)},
                           {"process_noise", detail::vectors_to_json(t.process_noise)}});
    return {{"num_scans", gt.num_scans}, {"targets", std::move(targets)}};
}

inline GroundTruth truth_from_json(const nlohmann::json& j) {
    GroundTruth gt;
    gt.num_scans = j.at("num_scans").get<int>();
    for (const auto& jt : j.at("targets")) {
        TargetTrajectory t;
        t.birth_scan = jt.at("birth").get<int>();
        t.death_scan = jt.at("death").get<int>();
        t.states = detail::vectors_from_json(jt.at("states"));
        if (jt.contains("process_noise")) t.process_noise = detail::vectors_from_json(jt.at("process_noise"));
        if (static_cast<int>(t.states.size()) != t.death_scan - t.birth_scan + 1)
            throw InvalidInputError("truth: state count does not match [birth, death]");
        gt.targets.push_back(std::move(t));
    }
    return gt;
}

inline nlohmann::json scans_to_json(const std::vector<Scan>& scans) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : scans) out.push_back({{"scan", s.index}, {"measurements", detail::vectors_to_json(s.measurements)}});
    return {{"scans", std::move(out)}};
}

inline std::vector<Scan> scans_from_json(const nlohmann::json& j) {
    std::vector<Scan> out;
    for (const auto& js : j.at("scans")) out.push_back({js.at("scan").get<int>(), detail::vectors_from_json(js.at("measurements"))});
    return out;
}

} // namespace pmbm
