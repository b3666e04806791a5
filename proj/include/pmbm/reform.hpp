#pragma once

#include "pmbm/association.hpp"
#include "pmbm/bernoulli.hpp"
#include "pmbm/gaussian.hpp"
#include "pmbm/ppp.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace pmbm {

/// Existence below which a re-formed track's density is not computed.
inline constexpr double kDegenerateExistence = 1e-12;

struct TrackSet {
    std::vector<BernoulliTrack> tracks;
    /// MOMB/P tracks do not persist between scans; their labels are for
    /// diagnostics only.
    bool labels_diagnostic = false;

    [[nodiscard]] double total_existence() const {
        double s = 0.0;
        for (const auto& t : tracks) s += t.r;
        return s;
    }
};

namespace detail {

inline void check_layout(const std::vector<TrackHypotheses>& hyps, const std::vector<NewTrack>& new_tracks,
                         const MarginalTable& marg) {
    const auto n = static_cast<Eigen::Index>(hyps.size());
    const auto m = static_cast<Eigen::Index>(new_tracks.size());
    if (marg.p_track.rows() != n || marg.p_new.size() != m || (n > 0 && marg.p_track.cols() != m + 1))
        throw InvalidInputError("reform: marginal table does not match the hypothesis layout");
    for (const auto& h : hyps)
        if (static_cast<Eigen::Index>(h.hyps.size()) != m + 1)
            throw InvalidInputError("reform: each prior track needs m + 1 hypotheses");
}

/// Moment-matches weighted components; falls back to `fallback` when the
/// total weight is degenerate.
inline BernoulliTrack collapse(TrackLabel label, const GaussianMixture& mix, double r, const Gaussian& fallback) {
    BernoulliTrack out;
    out.label = label;
    out.r = r;
    if (r < kDegenerateExistence || !(mix.total_weight() > 0.0)) {
        out.density = fallback;
        out.degenerate = true;
    } else {
        out.density = moment_match(mix).density;
    }
    return out;
}

} // namespace detail

/// Track-oriented re-formation: each prior track collects all of its
/// hypotheses weighted by p̃ⁱ(a)·r^{i,a}; each measurement yields a new track
/// with r = p̃_new·r_spawn.
inline TrackSet tomb_reform(const std::vector<TrackHypotheses>& hyps, const std::vector<NewTrack>& new_tracks,
                            const MarginalTable& marg) {
    detail::check_layout(hyps, new_tracks, marg);
    TrackSet out;
    out.tracks.reserve(hyps.size() + new_tracks.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        const auto& row = hyps[i].hyps;
        GaussianMixture mix;
        double r = 0.0;
        for (std::size_t a = 0; a < row.size(); ++a) {
            const double w = marg.p_track(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) * row[a].r;
            r += w;
            if (w > 0.0) mix.components.push_back({w, row[a].density});
        }
        out.tracks.push_back(detail::collapse(hyps[i].label, mix, r, row.front().density));
    }
    for (std::size_t j = 0; j < new_tracks.size(); ++j) {
        BernoulliTrack t = new_tracks[j].track;
        t.r = marg.p_new(static_cast<Eigen::Index>(j)) * t.r;
        t.degenerate = t.degenerate || t.r < kDegenerateExistence;
        out.tracks.push_back(std::move(t));
    }
    return out;
}

/// Measurement-oriented re-formation: a legacy track per prior track holding
/// only its missed-detection hypothesis, and a track per measurement
/// collecting the spawn hypothesis and every prior track's update with it.
inline TrackSet momb_reform(const std::vector<TrackHypotheses>& hyps, const std::vector<NewTrack>& new_tracks,
                            const MarginalTable& marg) {
    detail::check_layout(hyps, new_tracks, marg);
    TrackSet out;
    out.labels_diagnostic = true;
    out.tracks.reserve(hyps.size() + new_tracks.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        const auto& miss = hyps[i].miss();
        BernoulliTrack t;
        t.label = hyps[i].label;
        t.r = marg.p_track(static_cast<Eigen::Index>(i), 0) * miss.r;
        t.density = miss.density;
        t.degenerate = t.r < kDegenerateExistence;
        out.tracks.push_back(std::move(t));
    }
    for (std::size_t j = 0; j < new_tracks.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const auto& spawn = new_tracks[j].track;
        GaussianMixture mix;
        double r = marg.p_new(jj) * spawn.r;
        if (r > 0.0) mix.components.push_back({r, spawn.density});
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            const auto& h = hyps[i].hyps[j + 1];
            const double w = marg.p_track(static_cast<Eigen::Index>(i), jj + 1) * h.r;
            r += w;
            if (w > 0.0) mix.components.push_back({w, h.density});
        }
        out.tracks.push_back(detail::collapse(spawn.label, mix, r, spawn.density));
    }
    return out;
}

/// Pmf of the number of existing targets in a multi-Bernoulli set.
inline std::vector<double> cardinality_pmf(const TrackSet& ts) {
    std::vector<double> pmf{1.0};
    pmf.reserve(ts.tracks.size() + 1);
    for (const auto& t : ts.tracks) {
        pmf.push_back(0.0);
        for (std::size_t k = pmf.size() - 1; k > 0; --k) pmf[k] = pmf[k] * (1.0 - t.r) + pmf[k - 1] * t.r;
        pmf[0] *= (1.0 - t.r);
    }
    return pmf;
}

struct Estimate {
    TrackLabel label;
    Vector state;
};

/// Means of all tracks with r >= threshold, sorted by label.
inline std::vector<Estimate> extract_estimates_tomb(const TrackSet& ts, double threshold) {
    std::vector<Estimate> out;
    for (const auto& t : ts.tracks)
        if (t.r >= threshold) out.push_back({t.label, t.density.mean});
    std::stable_sort(out.begin(), out.end(), [](const Estimate& a, const Estimate& b) { return a.label < b.label; });
    return out;
}

/// MAP cardinality n̂ (smallest on ties), then the n̂ tracks with highest r
/// (label order on ties).
inline std::vector<Estimate> extract_estimates_momb(const TrackSet& ts) {
    const auto pmf = cardinality_pmf(ts);
    const auto n_hat = static_cast<std::size_t>(std::distance(pmf.begin(), std::max_element(pmf.begin(), pmf.end())));
    std::vector<std::size_t> order(ts.tracks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = ts.tracks[a];
        const auto& tb = ts.tracks[b];
        if (ta.r != tb.r) return ta.r > tb.r;
        if (ta.label != tb.label) return ta.label < tb.label;
        return a < b;
    });
    std::vector<Estimate> out;
    out.reserve(n_hat);
    for (std::size_t k = 0; k < n_hat; ++k) out.push_back({ts.tracks[order[k]].label, ts.tracks[order[k]].density.mean});
    return out;
}

/// Keeps tracks with r >= prune_r.
inline TrackSet prune_tracks(const TrackSet& ts, double prune_r) {
    TrackSet out;
    out.labels_diagnostic = ts.labels_diagnostic;
    for (const auto& t : ts.tracks)
        if (t.r >= prune_r) out.tracks.push_back(t);
    return out;
}

} // namespace pmbm
