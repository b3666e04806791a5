#pragma once

#include "pmbm/gaussian.hpp"
#include "pmbm/models.hpp"
#include "pmbm/types.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cstddef>
#include <vector>

namespace pmbm {

/// A potential target: empty with probability 1 − r, otherwise one target
/// distributed by `density`.
struct BernoulliTrack {
    TrackLabel label;
    double r = 0.0;
    Gaussian density;
    /// Set when r is too small for the density to carry information.
    bool degenerate = false;
};

/// Column 0 of a track's hypothesis row is the missed detection; column j >= 1
/// is the update with measurement j.
inline constexpr std::size_t kMissColumn = 0;

/// One single-scan hypothesis of a track.
struct TrackHypothesis {
    double weight = 0.0;
    double r = 0.0;
    Gaussian density;
    std::size_t assoc = kMissColumn;
    bool degenerate = false;
};

/// The m + 1 hypotheses (miss first) generated for one prior track.
struct TrackHypotheses {
    TrackLabel label;
    std::vector<TrackHypothesis> hyps;

    [[nodiscard]] const TrackHypothesis& miss() const { return hyps.front(); }
};

inline BernoulliTrack predict_track(const BernoulliTrack& t, const MotionModel& motion) {
    BernoulliTrack out = t;
    out.r = motion.Ps * t.r;
    out.density = kalman_predict(t.density, motion.F, motion.Q);
    return out;
}

/// weight = 1 − r·Pd, r' = r(1 − Pd) / weight. With constant Pd the density is
/// the prior density.
inline TrackHypothesis miss_hypothesis(const BernoulliTrack& t, double Pd) {
    TrackHypothesis h;
    h.weight = 1.0 - t.r + t.r * (1.0 - Pd);
    h.density = t.density;
    h.assoc = kMissColumn;
    if (h.weight > 0.0) {
        h.r = t.r * (1.0 - Pd) / h.weight;
    } else {
        h.weight = 0.0;
        h.r = 0.0;
        h.degenerate = true;
    }
    return h;
}

/// Update hypothesis using a prepared Kalman update of the track density.
inline TrackHypothesis update_hypothesis(const BernoulliTrack& t, const PreparedUpdate& upd, double Pd,
                                         const Vector& z, std::size_t j) {
    TrackHypothesis h;
    h.weight = t.r * Pd * upd.likelihood(z);
    h.r = 1.0;
    h.density = upd.posterior(z);
    h.assoc = j;
    return h;
}

inline TrackHypothesis update_hypothesis(const BernoulliTrack& t, const MeasModel& meas, const Vector& z,
                                         std::size_t j) {
    return update_hypothesis(t, PreparedUpdate(t.density, meas.H, meas.R), meas.Pd, z, j);
}

/// Chi-square quantile used as a squared-Mahalanobis gate.
inline double gate_threshold(double gate_prob, Eigen::Index meas_dim) {
    if (!(gate_prob > 0.0 && gate_prob <= 1.0)) throw InvalidInputError("gate: gate_prob must lie in (0, 1]");
    if (gate_prob >= 1.0) return std::numeric_limits<double>::infinity();
    boost::math::chi_squared dist(static_cast<double>(meas_dim));
    return boost::math::quantile(dist, gate_prob);
}

inline bool gate(const BernoulliTrack& t, const MeasModel& meas, const Vector& z, double gate_prob) {
    const double threshold = gate_threshold(gate_prob, meas.meas_dim());
    if (std::isinf(threshold)) return true;
    return PreparedUpdate(t.density, meas.H, meas.R).mahalanobis2(z) <= threshold;
}

/// Builds the miss hypothesis plus one update hypothesis per measurement.
/// Pairs outside the gate get a zero-weight placeholder carrying the prior
/// density, so the row layout stays m + 1 wide.
inline TrackHypotheses generate_hypotheses(const BernoulliTrack& t, const MeasModel& meas,
                                           const std::vector<Vector>& scan, double gate_threshold_d2) {
    TrackHypotheses out;
    out.label = t.label;
    out.hyps.reserve(scan.size() + 1);
    out.hyps.push_back(miss_hypothesis(t, meas.Pd));
    if (scan.empty()) return out;

    const PreparedUpdate upd(t.density, meas.H, meas.R);
    for (std::size_t j = 0; j < scan.size(); ++j) {
        if (t.r > 0.0 && upd.mahalanobis2(scan[j]) <= gate_threshold_d2) {
            out.hyps.push_back(update_hypothesis(t, upd, meas.Pd, scan[j], j + 1));
        } else {
            TrackHypothesis h;
            h.weight = 0.0;
            h.r = 1.0;
            h.density = t.density;
            h.assoc = j + 1;
            h.degenerate = true;
            out.hyps.push_back(std::move(h));
        }
    }
    return out;
}

} // namespace pmbm
