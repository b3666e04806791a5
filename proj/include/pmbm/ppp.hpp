#pragma once

#include "pmbm/bernoulli.hpp"
#include "pmbm/gaussian.hpp"
#include "pmbm/models.hpp"

#include <vector>

namespace pmbm {

/// Intensity of targets that exist but have never been detected.
struct PppIntensity {
    GaussianMixture mixture;

    [[nodiscard]] double mass() const { return mixture.total_weight(); }
};

/// Survivors scaled by Ps and predicted; birth components appended unchanged.
inline PppIntensity predict_ppp(const PppIntensity& p, const MotionModel& motion, const BirthModel& birth) {
    PppIntensity out;
    out.mixture.components.reserve(p.mixture.size() + birth.intensity.size());
    if (motion.Ps > 0.0) {
        for (const auto& c : p.mixture.components)
            out.mixture.components.push_back({motion.Ps * c.weight, kalman_predict(c.density, motion.F, motion.Q)});
    }
    for (const auto& c : birth.intensity.components) {
        if (c.density.dim() != motion.F.rows()) throw InvalidInputError("predict_ppp: birth component dimension mismatch");
        out.mixture.components.push_back(c);
    }
    return out;
}

/// Undetected portion of the intensity: every weight times (1 − Pd).
inline PppIntensity thin_undetected(const PppIntensity& p, double Pd) {
    PppIntensity out = p;
    for (auto& c : out.mixture.components) c.weight *= (1.0 - Pd);
    return out;
}

/// Drops components whose weight is below `floor`.
inline PppIntensity prune_ppp(const PppIntensity& p, double floor) {
    PppIntensity out;
    for (const auto& c : p.mixture.components)
        if (c.weight >= floor) out.mixture.components.push_back(c);
    return out;
}

/// A track started on one measurement, together with the weight of the
/// "measurement is not from any prior track" hypothesis.
struct NewTrack {
    double weight = 0.0;         ///< C + λ^fa(z)
    double detection_mass = 0.0; ///< C = Σ_k λ^k Pd N{z − H x̄^k; 0, S^k}
    BernoulliTrack track;
};

/// Measurement-independent Kalman quantities for every PPP component.
class PreparedPppUpdate {
public:
    PreparedPppUpdate(const PppIntensity& p, const MeasModel& meas) : ppp_(&p), meas_(&meas) {
        updates_.reserve(p.mixture.size());
        for (const auto& c : p.mixture.components) updates_.emplace_back(c.density, meas.H, meas.R);
    }

    /// Updates each component with z, sums the detection mass C and
    /// moment-matches the updated components into the new track's density.
    [[nodiscard]] NewTrack spawn(const ClutterModel& clutter, const Vector& z, TrackLabel label) const {
        const double fa = clutter_density(clutter, z);
        GaussianMixture updated;
        updated.components.reserve(updates_.size());
        double C = 0.0;
        for (std::size_t k = 0; k < updates_.size(); ++k) {
            const double ck = ppp_->mixture.components[k].weight * meas_->Pd * updates_[k].likelihood(z);
            C += ck;
            updated.components.push_back({ck, updates_[k].posterior(z)});
        }

        NewTrack out;
        out.detection_mass = C;
        out.weight = C + fa;
        out.track.label = label;
        if (C > 0.0) {
            out.track.r = C / out.weight;
            out.track.density = moment_match(updated).density;
        } else {
            out.track.r = 0.0;
            out.track.degenerate = out.weight == 0.0;
            out.track.density = fallback_density(z);
        }
        return out;
    }

private:
    // Density for a spawn with no detection mass; it has r = 0 so nothing reads
    // it for estimation, but it must still be a valid Gaussian.
    [[nodiscard]] Gaussian fallback_density(const Vector& z) const {
        if (!ppp_->mixture.empty() && ppp_->mass() > 0.0) return moment_match(ppp_->mixture).density;
        const auto n = meas_->state_dim();
        Vector mean = meas_->H.transpose() * z;
        return {mean, Matrix::Identity(n, n)};
    }

    const PppIntensity* ppp_;
    const MeasModel* meas_;
    std::vector<PreparedUpdate> updates_;
};

inline NewTrack spawn_track_from_measurement(const PppIntensity& p, const MeasModel& meas, const ClutterModel& clutter,
                                             const Vector& z, TrackLabel label = {}) {
    return PreparedPppUpdate(p, meas).spawn(clutter, z, label);
}

} // namespace pmbm
