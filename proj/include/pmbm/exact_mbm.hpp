#pragma once

#include "pmbm/association.hpp"
#include "pmbm/bernoulli.hpp"
#include "pmbm/gaussian.hpp"
#include "pmbm/models.hpp"
#include "pmbm/ppp.hpp"
#include "pmbm/reform.hpp"
#include "pmbm/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pmbm {

/// One measurement history attributed to a potential target. Non-existence
/// hypotheses have r = 0, weight 1 and no density.
struct SingleTargetHypothesis {
    double weight = 1.0;
    double r = 0.0;
    std::optional<Gaussian> density;
    std::vector<MeasurementId> history;
    /// Index of the hypothesis this one was derived from in the previous
    /// update, or npos for hypotheses created by the latest update.
    std::size_t parent = npos;

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

struct TrackTree {
    TrackLabel label;
    std::vector<SingleTargetHypothesis> hyps;
    /// Seeded from a prior track rather than born from a measurement; such
    /// trees have no common first measurement.
    bool seeded = false;
};

struct GlobalHypothesis {
    std::vector<std::size_t> choice;  ///< one hypothesis index per tree
    double weight = 0.0;
};

/// What the latest update saw, kept so the single-scan views (JIPDA weights,
/// scan marginals) can be evaluated afterwards.
struct ScanContext {
    bool valid = false;
    int scan = 0;
    std::vector<Vector> measurements;
    PppIntensity predicted_ppp;
    std::size_t continuing = 0;          ///< trees that existed before the update
    std::size_t prior_global_count = 0;
    /// Predicted hypothesis chosen by the single prior global hypothesis for
    /// each continuing tree; only filled when prior_global_count == 1.
    std::vector<SingleTargetHypothesis> prior_chosen;
};

struct MbmPosterior {
    PppIntensity ppp;
    std::vector<TrackTree> trees;
    std::vector<GlobalHypothesis> globals;
    /// Every measurement incorporated so far.
    std::vector<MeasurementId> measurements;
    ScanContext last_scan;

    /// No tracks, a single empty global hypothesis.
    static MbmPosterior initial(PppIntensity ppp) {
        MbmPosterior p;
        p.ppp = std::move(ppp);
        p.globals.push_back({{}, 1.0});
        return p;
    }

    /// A multi-Bernoulli prior: one single-hypothesis tree per track and one
    /// global hypothesis.
    static MbmPosterior from_multi_bernoulli(PppIntensity ppp, const std::vector<BernoulliTrack>& tracks) {
        MbmPosterior p = initial(std::move(ppp));
        for (const auto& t : tracks) {
            SingleTargetHypothesis h;
            h.weight = 1.0;
            h.r = t.r;
            h.density = t.density;
            p.trees.push_back({t.label, {std::move(h)}, true});
        }
        p.globals.front().choice.assign(tracks.size(), 0);
        return p;
    }
};

struct ExactLimits {
    std::size_t max_globals = 1'000'000;
    std::size_t max_hyps_per_tree = 10'000;
};

inline MbmPosterior exact_predict(const MbmPosterior& p, const MotionModel& motion, const BirthModel& birth) {
    MbmPosterior out = p;
    out.ppp = predict_ppp(p.ppp, motion, birth);
    for (auto& tree : out.trees) {
        for (auto& h : tree.hyps) {
            h.r *= motion.Ps;
            if (h.density) h.density = kalman_predict(*h.density, motion.F, motion.Q);
        }
    }
    return out;
}

namespace detail {

inline SingleTargetHypothesis from_track_hypothesis(const TrackHypothesis& th, double prior_weight,
                                                    std::vector<MeasurementId> history, std::size_t parent) {
    SingleTargetHypothesis h;
    h.weight = prior_weight * th.weight;
    h.r = th.r;
    h.density = th.density;
    h.history = std::move(history);
    h.parent = parent;
    return h;
}

inline double log_or_ninf(double w) { return w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity(); }

/// Normalizes log-domain weights in place and returns them as probabilities.
inline void normalize_log_weights(std::vector<GlobalHypothesis>& globals, const std::vector<double>& logw) {
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) throw NumericalError("exact_update: every global hypothesis has zero weight");
    double total = 0.0;
    for (std::size_t g = 0; g < globals.size(); ++g) {
        globals[g].weight = std::exp(logw[g] - top);
        total += globals[g].weight;
    }
    for (auto& g : globals) g.weight /= total;
}

} // namespace detail

/// Full Bayes update: every hypothesis branches into a miss and one update per
/// measurement (r = 0 hypotheses continue without branching), one new
/// two-hypothesis tree per measurement, and the global hypotheses are
/// re-enumerated over the new scan.
inline MbmPosterior exact_update(const MbmPosterior& p, const MeasModel& meas, const ClutterModel& clutter,
                                 const std::vector<Vector>& scan, int t, const ExactLimits& limits = {}) {
    constexpr auto npos = SingleTargetHypothesis::npos;
    const std::size_t m = scan.size();
    const std::size_t n_old = p.trees.size();

    MbmPosterior out;
    out.measurements = p.measurements;
    for (std::size_t j = 0; j < m; ++j) out.measurements.push_back({t, static_cast<int>(j + 1)});

    auto& ctx = out.last_scan;
    ctx.valid = true;
    ctx.scan = t;
    ctx.measurements = scan;
    ctx.predicted_ppp = p.ppp;
    ctx.continuing = n_old;
    ctx.prior_global_count = p.globals.size();
    if (p.globals.size() == 1)
        for (std::size_t i = 0; i < n_old; ++i) ctx.prior_chosen.push_back(p.trees[i].hyps[p.globals.front().choice[i]]);

    // child[i][a][col]: index of the child of prior hypothesis a of tree i for
    // column col (0 = miss, j = measurement j), npos when not generated.
    std::vector<std::vector<std::vector<std::size_t>>> child(n_old);
    out.trees.reserve(n_old + m);

    for (std::size_t i = 0; i < n_old; ++i) {
        const auto& tree = p.trees[i];
        std::size_t count = 0;
        for (const auto& h : tree.hyps) count += h.r > 0.0 ? 1 + m : 1;
        if (count > limits.max_hyps_per_tree)
            throw CapacityError("exact_update: tree " + to_string(tree.label) + " would hold " + std::to_string(count) +
                                " hypotheses, above the limit of " + std::to_string(limits.max_hyps_per_tree));

        TrackTree next{tree.label, {}, tree.seeded};
        next.hyps.reserve(count);
        child[i].assign(tree.hyps.size(), std::vector<std::size_t>(m + 1, npos));

        for (std::size_t a = 0; a < tree.hyps.size(); ++a) {
            const auto& h = tree.hyps[a];
            child[i][a][0] = next.hyps.size();
            if (!h.density) {
                SingleTargetHypothesis cont = h;
                cont.parent = a;
                next.hyps.push_back(std::move(cont));
                continue;
            }
            const BernoulliTrack view{tree.label, h.r, *h.density};
            next.hyps.push_back(detail::from_track_hypothesis(miss_hypothesis(view, meas.Pd), h.weight, h.history, a));
        }
        std::vector<std::optional<PreparedUpdate>> prepared(tree.hyps.size());
        for (std::size_t a = 0; a < tree.hyps.size(); ++a)
            if (tree.hyps[a].r > 0.0) prepared[a].emplace(*tree.hyps[a].density, meas.H, meas.R);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t a = 0; a < tree.hyps.size(); ++a) {
                const auto& h = tree.hyps[a];
                if (!(h.r > 0.0)) continue;
                const BernoulliTrack view{tree.label, h.r, *h.density};
                auto history = h.history;
                history.push_back({t, static_cast<int>(j + 1)});
                child[i][a][j + 1] = next.hyps.size();
                next.hyps.push_back(detail::from_track_hypothesis(update_hypothesis(view, *prepared[a], meas.Pd, scan[j], j + 1),
                                                                  h.weight, std::move(history), a));
            }
        }
        out.trees.push_back(std::move(next));
    }

    const PreparedPppUpdate ppp_update(p.ppp, meas);
    for (std::size_t j = 0; j < m; ++j) {
        const MeasurementId id{t, static_cast<int>(j + 1)};
        const NewTrack nt = ppp_update.spawn(clutter, scan[j], id);
        SingleTargetHypothesis absent;  // the measurement belongs to some other track
        SingleTargetHypothesis present;
        present.weight = nt.weight;
        present.r = nt.track.r;
        present.density = nt.track.density;
        present.history = {id};
        out.trees.push_back({id, {std::move(absent), std::move(present)}});
    }
    out.ppp = thin_undetected(p.ppp, meas.Pd);

    // Re-enumerate global hypotheses: measurements outer, trees inner.
    std::vector<double> logw;
    std::vector<std::size_t> choice(n_old + m, 0);
    std::vector<bool> used(n_old, false);
    const std::vector<std::size_t>* prior = nullptr;

    auto leaf = [&] {
        if (out.globals.size() >= limits.max_globals)
            throw CapacityError("exact_update: more than " + std::to_string(limits.max_globals) + " global hypotheses");
        std::vector<std::size_t> full = choice;
        double lw = 0.0;
        for (std::size_t i = 0; i < n_old; ++i) {
            if (!used[i]) full[i] = child[i][(*prior)[i]][0];
            lw += detail::log_or_ninf(out.trees[i].hyps[full[i]].weight);
        }
        for (std::size_t j = 0; j < m; ++j) lw += detail::log_or_ninf(out.trees[n_old + j].hyps[full[n_old + j]].weight);
        out.globals.push_back({std::move(full), 0.0});
        logw.push_back(lw);
    };

    auto recurse = [&](auto&& self, std::size_t j) -> void {
        if (j == m) {
            leaf();
            return;
        }
        choice[n_old + j] = 1;
        self(self, j + 1);
        choice[n_old + j] = 0;
        for (std::size_t i = 0; i < n_old; ++i) {
            if (used[i]) continue;
            const std::size_t c = child[i][(*prior)[i]][j + 1];
            if (c == npos) continue;
            used[i] = true;
            choice[i] = c;
            self(self, j + 1);
            used[i] = false;
        }
    };

    // Each prior global extends to every injection of the measurements into
    // its trees that can still be detected; count them before enumerating.
    long double expected = 0.0L;
    for (const auto& g : p.globals) {
        std::uint64_t detectable = 0;
        for (std::size_t i = 0; i < n_old; ++i)
            if (m > 0 && child[i][g.choice[i]][1] != npos) ++detectable;
        expected += static_cast<long double>(count_associations(detectable, m));
    }
    if (expected > static_cast<long double>(limits.max_globals))
        throw CapacityError("exact_update: more than " + std::to_string(limits.max_globals) + " global hypotheses");
    out.globals.reserve(static_cast<std::size_t>(expected));
    logw.reserve(static_cast<std::size_t>(expected));

    for (const auto& g : p.globals) {
        prior = &g.choice;
        std::fill(used.begin(), used.end(), false);
        recurse(recurse, 0);
    }
    detail::normalize_log_weights(out.globals, logw);
    return out;
}

namespace detail {

inline void require_feasible(const MbmPosterior& p, const std::vector<std::size_t>& choice) {
    if (choice.size() != p.trees.size()) throw InvalidInputError("global hypothesis: need one hypothesis per tree");
    std::vector<MeasurementId> covered;
    for (std::size_t i = 0; i < choice.size(); ++i) {
        if (choice[i] >= p.trees[i].hyps.size()) throw InvalidInputError("global hypothesis: hypothesis index out of range");
        const auto& hist = p.trees[i].hyps[choice[i]].history;
        covered.insert(covered.end(), hist.begin(), hist.end());
    }
    std::sort(covered.begin(), covered.end());
    if (std::adjacent_find(covered.begin(), covered.end()) != covered.end())
        throw InvalidInputError("global hypothesis: a measurement is used by more than one track");
    auto all = p.measurements;
    std::sort(all.begin(), all.end());
    if (covered != all) throw InvalidInputError("global hypothesis: not every measurement is explained");
}

} // namespace detail

/// Product of the chosen single-target hypothesis weights.
inline double global_weight_unnormalized(const MbmPosterior& p, const std::vector<std::size_t>& choice) {
    detail::require_feasible(p, choice);
    double w = 1.0;
    for (std::size_t i = 0; i < choice.size(); ++i) w *= p.trees[i].hyps[choice[i]].weight;
    return w;
}

namespace detail {

/// Latest-scan association of a hypothesis: measurement index, or 0 for none.
inline std::size_t latest_assoc(const SingleTargetHypothesis& h, int scan) {
    if (h.history.empty() || h.history.back().scan != scan) return 0;
    return static_cast<std::size_t>(h.history.back().index);
}

inline void require_single_prior_global(const MbmPosterior& p, const char* who) {
    if (!p.last_scan.valid) throw UnsupportedError(std::string(who) + ": posterior has not been updated");
    if (p.last_scan.prior_global_count != 1)
        throw UnsupportedError(std::string(who) + ": prior had more than one global hypothesis");
}

} // namespace detail

/// JIPDA-form association weight for the latest scan: the global weight with
/// the new-track factors of every measurement divided out. Requires a prior
/// with a single global hypothesis and constant Pd.
inline double jipda_weight(const MbmPosterior& p, const std::vector<std::size_t>& choice, const MeasModel& meas,
                           const ClutterModel& clutter) {
    detail::require_feasible(p, choice);
    detail::require_single_prior_global(p, "jipda_weight");
    const auto& ctx = p.last_scan;

    double w = 1.0;
    for (std::size_t i = 0; i < ctx.continuing; ++i) {
        const auto& prior = ctx.prior_chosen[i];
        const std::size_t j = detail::latest_assoc(p.trees[i].hyps[choice[i]], ctx.scan);
        if (j == 0) {
            w *= 1.0 - prior.r * meas.Pd;
            continue;
        }
        const Vector& z = ctx.measurements[j - 1];
        const double lik = kalman_update(*prior.density, meas.H, meas.R, z).predictive_likelihood;
        double unknown = 0.0;
        for (const auto& c : ctx.predicted_ppp.mixture.components)
            unknown += c.weight * kalman_update(c.density, meas.H, meas.R, z).predictive_likelihood;
        w *= prior.r * meas.Pd * lik / (clutter_density(clutter, z) + meas.Pd * unknown);
    }
    return w;
}

/// Marginal association probabilities of the latest scan, summed over the
/// enumerated global hypotheses.
inline MarginalTable exact_scan_marginals(const MbmPosterior& p) {
    detail::require_single_prior_global(p, "exact_scan_marginals");
    const auto& ctx = p.last_scan;
    const auto n = static_cast<Eigen::Index>(ctx.continuing);
    const auto m = static_cast<Eigen::Index>(ctx.measurements.size());
    MarginalTable out{Matrix::Zero(n, m + 1), Vector::Zero(m)};
    for (const auto& g : p.globals) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& h = p.trees[static_cast<std::size_t>(i)].hyps[g.choice[static_cast<std::size_t>(i)]];
            out.p_track(i, static_cast<Eigen::Index>(detail::latest_assoc(h, ctx.scan))) += g.weight;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto tree = static_cast<std::size_t>(n + j);
            if (!p.trees[tree].hyps[g.choice[tree]].history.empty()) out.p_new(j) += g.weight;
        }
    }
    return out;
}

/// Association weights of the latest scan as seen by the tree structure:
/// children of each continuing tree's prior-chosen hypothesis, divided by the
/// prior weight, plus each new tree's spawn weight.
inline WeightMatrix induced_weight_matrix(const MbmPosterior& p) {
    detail::require_single_prior_global(p, "induced_weight_matrix");
    const auto& ctx = p.last_scan;
    const auto n = static_cast<Eigen::Index>(ctx.continuing);
    const auto m = static_cast<Eigen::Index>(ctx.measurements.size());
    WeightMatrix W{Matrix::Zero(n, m + 1), Vector::Zero(m)};
    // The children of the prior-chosen hypothesis are the ones every global uses.
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& tree = p.trees[static_cast<std::size_t>(i)];
        const std::size_t parent = p.globals.front().choice.empty()
                                       ? 0
                                       : tree.hyps[p.globals.front().choice[static_cast<std::size_t>(i)]].parent;
        const double prior_w = ctx.prior_chosen[static_cast<std::size_t>(i)].weight;
        for (const auto& h : tree.hyps) {
            if (h.parent != parent) continue;
            W.w_track(i, static_cast<Eigen::Index>(detail::latest_assoc(h, ctx.scan))) = h.weight / prior_w;
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) W.w_new(j) = p.trees[static_cast<std::size_t>(n + j)].hyps[1].weight;
    return W;
}

struct IntensityMoments {
    double mbm_mass = 0.0;  ///< Σ_i Σ_a P^i(a)·r^{i,a}
    Vector mbm_first_moment; ///< Σ_i Σ_a P^i(a)·r^{i,a}·x̄^{i,a}
    double ppp_mass = 0.0;
};

/// Mass and mean-weighted mass of the first-moment density of the MBM part,
/// with the PPP mass reported separately.
inline IntensityMoments intensity_mass(const MbmPosterior& p) {
    IntensityMoments out;
    out.ppp_mass = p.ppp.mass();
    Eigen::Index dim = p.ppp.mixture.empty() ? 0 : p.ppp.mixture.components.front().density.dim();
    for (const auto& tree : p.trees)
        for (const auto& h : tree.hyps)
            if (h.density) dim = h.density->dim();
    out.mbm_first_moment = Vector::Zero(dim);

    for (std::size_t i = 0; i < p.trees.size(); ++i) {
        std::vector<double> marginal(p.trees[i].hyps.size(), 0.0);
        for (const auto& g : p.globals) marginal[g.choice[i]] += g.weight;
        for (std::size_t a = 0; a < marginal.size(); ++a) {
            const auto& h = p.trees[i].hyps[a];
            const double w = marginal[a] * h.r;
            if (w == 0.0) continue;
            out.mbm_mass += w;
            out.mbm_first_moment += w * h.density->mean;
        }
    }
    return out;
}

inline constexpr std::uint64_t kDefaultDensityBound = 10'000'000;

/// Multi-object set density f(X) of the full posterior: the PPP and the MBM
/// combined by the convolution over subsets, the MBM evaluated by summing
/// over global hypotheses and injective point-to-tree assignments.
inline double mbm_density(const MbmPosterior& p, std::vector<Vector> points, std::uint64_t bound = kDefaultDensityBound) {
    const std::size_t k = points.size();
    if (k > 20) throw CapacityError("mbm_density: too many points");
    // A canonical point order makes the result exactly independent of the input order.
    std::sort(points.begin(), points.end(), [](const Vector& a, const Vector& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });

    const std::size_t N = p.trees.size();
    long double work = 0.0L;
    for (std::size_t sub = 0; sub <= k; ++sub) {
        long double inj = 1.0L;
        for (std::size_t q = 0; q < sub; ++q) inj *= static_cast<long double>(N >= q ? N - q : 0);
        long double binom = 1.0L;
        for (std::size_t q = 0; q < sub; ++q) binom = binom * static_cast<long double>(k - q) / static_cast<long double>(q + 1);
        work += binom * inj * static_cast<long double>(std::max<std::size_t>(p.globals.size(), 1));
    }
    if (work > static_cast<long double>(bound))
        throw CapacityError("mbm_density: evaluation needs more than " + std::to_string(bound) + " terms");

    auto ppp_intensity = [&](const Vector& x) {
        double s = 0.0;
        for (const auto& c : p.ppp.mixture.components) s += c.weight * gaussian_pdf(x, c.density);
        return s;
    };
    const double ppp_void = std::exp(-p.ppp.mass());

    auto bernoulli_point = [](const SingleTargetHypothesis& h, const Vector& x) {
        return h.density && h.r > 0.0 ? h.r * gaussian_pdf(x, *h.density) : 0.0;
    };

    // MBM density of the points selected by `mask`.
    auto mbm = [&](std::uint32_t mask) {
        std::vector<std::size_t> idx;
        for (std::size_t q = 0; q < k; ++q)
            if (mask & (1u << q)) idx.push_back(q);
        if (N == 0) return idx.empty() ? 1.0 : 0.0;
        double total = 0.0;
        std::vector<bool> taken(N, false);
        for (const auto& g : p.globals) {
            double sum = 0.0;
            auto assign = [&](auto&& self, std::size_t q, double prod) -> void {
                if (q == idx.size()) {
                    for (std::size_t i = 0; i < N; ++i)
                        if (!taken[i]) prod *= 1.0 - p.trees[i].hyps[g.choice[i]].r;
                    sum += prod;
                    return;
                }
                for (std::size_t i = 0; i < N; ++i) {
                    if (taken[i]) continue;
                    const double f = bernoulli_point(p.trees[i].hyps[g.choice[i]], points[idx[q]]);
                    if (f == 0.0) continue;
                    taken[i] = true;
                    self(self, q + 1, prod * f);
                    taken[i] = false;
                }
            };
            assign(assign, 0, 1.0);
            total += g.weight * sum;
        }
        return total;
    };

    double f = 0.0;
    const std::uint32_t full = k == 0 ? 0u : ((1u << k) - 1u);
    for (std::uint32_t ppp_mask = 0;; ++ppp_mask) {
        if ((ppp_mask & ~full) == 0) {
            double fp = ppp_void;
            for (std::size_t q = 0; q < k; ++q)
                if (ppp_mask & (1u << q)) fp *= ppp_intensity(points[q]);
            if (fp != 0.0) f += fp * mbm(full & ~ppp_mask);
        }
        if (ppp_mask == full) break;
    }
    return f;
}

/// Drops global hypotheses with weight below `floor`, renormalizes, and
/// removes single-target hypotheses no surviving global references.
inline MbmPosterior prune_globals(const MbmPosterior& p, double floor) {
    if (!(floor >= 0.0 && floor < 1.0)) throw InvalidInputError("prune_globals: floor must lie in [0, 1)");
    if (floor == 0.0) return p;
    double top = 0.0;
    for (const auto& g : p.globals) top = std::max(top, g.weight);
    if (floor > top) throw InvalidInputError("prune_globals: floor would remove every global hypothesis");

    MbmPosterior out = p;
    out.globals.clear();
    double total = 0.0;
    for (const auto& g : p.globals) {
        if (g.weight < floor) continue;
        out.globals.push_back(g);
        total += g.weight;
    }
    for (auto& g : out.globals) g.weight /= total;

    for (std::size_t i = 0; i < out.trees.size(); ++i) {
        auto& hyps = out.trees[i].hyps;
        std::vector<std::size_t> remap(hyps.size(), SingleTargetHypothesis::npos);
        for (const auto& g : out.globals) remap[g.choice[i]] = 0;
        std::vector<SingleTargetHypothesis> kept;
        for (std::size_t a = 0; a < hyps.size(); ++a) {
            if (remap[a] == SingleTargetHypothesis::npos) continue;
            remap[a] = kept.size();
            kept.push_back(std::move(hyps[a]));
        }
        hyps = std::move(kept);
        for (auto& g : out.globals) g.choice[i] = remap[g.choice[i]];
    }
    return out;
}

/// Empty when every structural invariant holds, otherwise the first violation.
inline std::string check_invariants(const MbmPosterior& p) {
    double total = 0.0;
    for (const auto& tree : p.trees) {
        if (tree.hyps.empty()) return "tree " + to_string(tree.label) + " has no hypotheses";
        for (const auto& h : tree.hyps) {
            if (!(h.weight >= 0.0)) return "negative hypothesis weight";
            if (!(h.r >= 0.0 && h.r <= 1.0)) return "existence probability outside [0, 1]";
            if (!tree.seeded && !h.history.empty() && h.history.front() != tree.label)
                return "history in tree " + to_string(tree.label) + " does not start with its first detection";
        }
    }
    for (const auto& g : p.globals) {
        try {
            detail::require_feasible(p, g.choice);
        } catch (const InvalidInputError& e) {
            return e.what();
        }
        total += g.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) return "global hypothesis weights do not sum to one";
    return {};
}

/// Structured dump of trees and globals for fixture diffing.
inline nlohmann::json to_json(const MbmPosterior& p) {
    using nlohmann::json;
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    json trees = json::array();
    for (const auto& tree : p.trees) {
        json hyps = json::array();
        for (const auto& h : tree.hyps) {
            json hist = json::array();
            for (const auto& id : h.history) hist.push_back({id.scan, id.index});
            json jh = {{"weight", h.weight}, {"r", h.r}, {"history", hist}};
            if (h.density) jh["mean"] = vec(h.density->mean);
            hyps.push_back(std::move(jh));
        }
        trees.push_back({{"label", {tree.label.scan, tree.label.index}}, {"hypotheses", std::move(hyps)}});
    }
    json globals = json::array();
    for (const auto& g : p.globals) globals.push_back({{"choice", g.choice}, {"weight", g.weight}});
    return {{"ppp_mass", p.ppp.mass()}, {"trees", std::move(trees)}, {"globals", std::move(globals)}};
}

/// Point estimates from the most probable global hypothesis: the means of its
/// hypotheses with r >= threshold, sorted by label.
inline std::vector<Estimate> exact_estimates(const MbmPosterior& p, double threshold) {
    std::vector<Estimate> out;
    if (p.globals.empty()) return out;
    const auto best = std::max_element(p.globals.begin(), p.globals.end(),
                                       [](const GlobalHypothesis& a, const GlobalHypothesis& b) { return a.weight < b.weight; });
    for (std::size_t i = 0; i < p.trees.size(); ++i) {
        const auto& h = p.trees[i].hyps[best->choice[i]];
        if (h.density && h.r >= threshold) out.push_back({p.trees[i].label, h.density->mean});
    }
    std::stable_sort(out.begin(), out.end(), [](const Estimate& a, const Estimate& b) { return a.label < b.label; });
    return out;
}

} // namespace pmbm
