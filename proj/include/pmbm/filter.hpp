#pragma once

#include "pmbm/association.hpp"
#include "pmbm/bernoulli.hpp"
#include "pmbm/exact_mbm.hpp"
#include "pmbm/metrics.hpp"
#include "pmbm/models.hpp"
#include "pmbm/ppp.hpp"
#include "pmbm/reform.hpp"
#include "pmbm/simulator.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace pmbm {

enum class FilterKind { tomb, momb, exact };

inline FilterKind parse_filter_kind(const std::string& s) {
    if (s == "tomb") return FilterKind::tomb;
    if (s == "momb") return FilterKind::momb;
    if (s == "exact") return FilterKind::exact;
    throw InvalidInputError("unknown filter kind '" + s + "' (expected tomb, momb or exact)");
}

inline std::string to_string(FilterKind k) {
    switch (k) {
    case FilterKind::tomb: return "tomb";
    case FilterKind::momb: return "momb";
    case FilterKind::exact: return "exact";
    }
    return {};
}

/// Where the marginal association probabilities of the approximate filters
/// come from.
enum class MarginalSource { lbp, exact };

/// State carried between scans by TOMB/P and MOMB/P.
struct ApproxState {
    PppIntensity ppp;
    TrackSet tracks;
};

struct ApproxStep {
    ApproxState state;          ///< after pruning
    TrackSet reformed;          ///< before pruning
    MarginalTable marginals;
    int lbp_iterations = 0;
    std::vector<Estimate> estimates;
};

/// One predict/update cycle of TOMB/P or MOMB/P.
inline ApproxStep approx_step(const ApproxState& prior, const Scan& scan, const ModelConfig& cfg, FilterKind kind,
                              MarginalSource source = MarginalSource::lbp) {
    if (kind == FilterKind::exact) throw InvalidInputError("approx_step: exact mode has its own recursion");
    const auto& fp = cfg.filter;
    const auto m = scan.measurements.size();

    const PppIntensity predicted_ppp = predict_ppp(prior.ppp, cfg.motion, cfg.birth);
    const double gate_d2 = gate_threshold(fp.gate_prob, cfg.measurement.meas_dim());

    std::vector<TrackHypotheses> hyps;
    hyps.reserve(prior.tracks.tracks.size());
    for (const auto& t : prior.tracks.tracks)
        hyps.push_back(generate_hypotheses(predict_track(t, cfg.motion), cfg.measurement, scan.measurements, gate_d2));

    std::vector<NewTrack> new_tracks;
    new_tracks.reserve(m);
    const PreparedPppUpdate ppp_update(predicted_ppp, cfg.measurement);
    for (std::size_t j = 0; j < m; ++j)
        new_tracks.push_back(ppp_update.spawn(cfg.clutter, scan.measurements[j], {scan.index, static_cast<int>(j + 1)}));

    ApproxStep out;
    const WeightMatrix W = build_weight_matrix(hyps, new_tracks);
    if (source == MarginalSource::lbp) {
        auto lbp = lbp_marginals(W, fp.lbp_eps, fp.lbp_max_iter);
        out.marginals = std::move(lbp.marginals);
        out.lbp_iterations = lbp.iterations;
    } else {
        out.marginals = exact_marginals(W);
    }

    out.reformed = kind == FilterKind::tomb ? tomb_reform(hyps, new_tracks, out.marginals)
                                            : momb_reform(hyps, new_tracks, out.marginals);
    out.state.tracks = prune_tracks(out.reformed, fp.prune_r);
    out.state.ppp = prune_ppp(thin_undetected(predicted_ppp, cfg.measurement.Pd), fp.prune_ppp_weight);
    out.estimates = kind == FilterKind::tomb ? extract_estimates_tomb(out.state.tracks, fp.estimate_threshold)
                                             : extract_estimates_momb(out.state.tracks);
    return out;
}

struct ScanRecord {
    int scan = 0;
    int truth_n = 0;
    int est_n = 0;
    double ospa = 0.0;
    double ms = 0.0;
    int lbp_iters = 0;
};

struct RunOptions {
    OspaParams ospa;
    /// Record wall-clock time per scan; off by default so output is reproducible.
    bool timing = false;
};

struct RunResult {
    std::vector<ScanRecord> records;
    std::vector<std::vector<Estimate>> estimates;
    bool labels_diagnostic = false;
};

inline std::vector<Vector> estimate_states(const std::vector<Estimate>& est) {
    std::vector<Vector> out;
    out.reserve(est.size());
    for (const auto& e : est) out.push_back(e.state);
    return out;
}

/// Runs a filter over the scans and scores every scan against the truth.
inline RunResult run_filter(FilterKind kind, const std::vector<Scan>& scans, const GroundTruth& truth,
                            const ModelConfig& cfg, const RunOptions& opts = {}) {
    validate(cfg);
    RunResult out;
    out.labels_diagnostic = kind == FilterKind::momb;

    ApproxState approx{PppIntensity{cfg.unknown_init.intensity}, {}};
    MbmPosterior exact = MbmPosterior::initial(PppIntensity{cfg.unknown_init.intensity});

    for (const auto& scan : scans) {
        const auto start = std::chrono::steady_clock::now();
        ScanRecord rec;
        rec.scan = scan.index;
        std::vector<Estimate> est;
        if (kind == FilterKind::exact) {
            try {
                exact = exact_update(exact_predict(exact, cfg.motion, cfg.birth), cfg.measurement, cfg.clutter,
                                     scan.measurements, scan.index);
            } catch (const CapacityError& e) {
                throw CapacityError("scan " + std::to_string(scan.index) + ": " + e.what());
            }
            exact.ppp = prune_ppp(exact.ppp, cfg.filter.prune_ppp_weight);
            est = exact_estimates(exact, cfg.filter.estimate_threshold);
        } else {
            ApproxStep step = approx_step(approx, scan, cfg, kind);
            approx = std::move(step.state);
            rec.lbp_iters = step.lbp_iterations;
            est = std::move(step.estimates);
        }
        if (opts.timing)
            rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        const auto truth_states = truth.states_at(scan.index);
        rec.truth_n = static_cast<int>(truth_states.size());
        rec.est_n = static_cast<int>(est.size());
        rec.ospa = ospa(estimate_states(est), truth_states, opts.ospa);
        out.records.push_back(rec);
        out.estimates.push_back(std::move(est));
    }
    return out;
}

/// A simulated scenario: the models plus the target layout.
struct ScenarioSpec {
    int scenario_case = 1;
    int targets = 6;
    ModelConfig config;
};

/// Truth and scans of one Monte Carlo trial.
struct Trial {
    GroundTruth truth;
    std::vector<Scan> scans;
};

inline Trial make_trial(const ScenarioSpec& spec, std::uint64_t trial_seed) {
    Trial t;
    t.truth = gen_scenario(spec.scenario_case, spec.targets, spec.config.motion, derive_seed(trial_seed, 0));
    t.scans = gen_measurements(t.truth, spec.config.measurement, spec.config.clutter, derive_seed(trial_seed, 1));
    return t;
}

inline std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(trial));
}

struct McRow {
    int scan = 0;
    double truth_n = 0.0;
    double est_n = 0.0;
    double ospa = 0.0;
    double ms = 0.0;
    double lbp_iters = 0.0;
    int trials_ok = 0;
};

struct McResult {
    std::vector<McRow> rows;
    int trials_ok = 0;
    std::vector<std::string> failures;  ///< one message per failed trial
};

/// Mean of per-trial records over the successful trials, scan by scan.
inline McResult aggregate(const std::vector<std::optional<RunResult>>& runs) {
    McResult out;
    for (const auto& r : runs) {
        if (!r) continue;
        ++out.trials_ok;
        if (out.rows.size() < r->records.size()) out.rows.resize(r->records.size());
        for (std::size_t s = 0; s < r->records.size(); ++s) {
            const auto& rec = r->records[s];
            auto& row = out.rows[s];
            row.scan = rec.scan;
            row.truth_n += rec.truth_n;
            row.est_n += rec.est_n;
            row.ospa += rec.ospa;
            row.ms += rec.ms;
            row.lbp_iters += rec.lbp_iters;
            ++row.trials_ok;
        }
    }
    for (auto& row : out.rows) {
        const double k = row.trials_ok;
        row.truth_n /= k;
        row.est_n /= k;
        row.ospa /= k;
        row.ms /= k;
        row.lbp_iters /= k;
    }
    return out;
}

/// Runs `trials` independent trials, each with its own seed derived from the
/// master seed. Failed trials are reported and left out of the averages.
inline McResult monte_carlo(FilterKind kind, const ScenarioSpec& spec, int trials, std::uint64_t master_seed,
                            const RunOptions& opts = {}) {
    if (trials < 1) throw InvalidInputError("monte_carlo: need at least one trial");
    validate(spec.config);
    std::vector<std::optional<RunResult>> runs(static_cast<std::size_t>(trials));
    std::vector<std::string> failures;
    for (int k = 0; k < trials; ++k) {
        try {
            const Trial t = make_trial(spec, trial_seed(master_seed, k));
            runs[static_cast<std::size_t>(k)] = run_filter(kind, t.scans, t.truth, spec.config, opts);
        } catch (const std::exception& e) {
            failures.push_back("trial " + std::to_string(k) + ": " + e.what());
        }
    }
    McResult out = aggregate(runs);
    out.failures = std::move(failures);
    return out;
}

namespace detail {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

inline void write_csv(std::ostream& os, const std::vector<ScanRecord>& records) {
    os << "scan,truth_n,est_n,ospa,ms,lbp_iters\n";
    for (const auto& r : records)
        os << r.scan << ',' << r.truth_n << ',' << r.est_n << ',' << detail::format_number(r.ospa) << ','
           << detail::format_number(r.ms) << ',' << r.lbp_iters << '\n';
}

inline void write_csv(std::ostream& os, const McResult& mc) {
    using detail::format_number;
    os << "scan,truth_n,est_n,ospa,ms,lbp_iters,trials_ok\n";
    for (const auto& r : mc.rows)
        os << r.scan << ',' << format_number(r.truth_n) << ',' << format_number(r.est_n) << ',' << format_number(r.ospa)
           << ',' << format_number(r.ms) << ',' << format_number(r.lbp_iters) << ',' << r.trials_ok << '\n';
}

/// Estimates per scan; MOMB/P labels are marked as diagnostic only.
inline nlohmann::json estimates_to_json(const RunResult& run) {
    nlohmann::json scans = nlohmann::json::array();
    for (std::size_t s = 0; s < run.estimates.size(); ++s) {
        nlohmann::json est = nlohmann::json::array();
        for (const auto& e : run.estimates[s])
            est.push_back({{"label", {e.label.scan, e.label.index}},
                           {"state", std::vector<double>(e.state.data(), e.state.data() + e.state.size())}});
        scans.push_back({{"scan", run.records[s].scan}, {"estimates", std::move(est)}});
    }
    return {{"labels_diagnostic", run.labels_diagnostic}, {"scans", std::move(scans)}};
}

/// Per-scan point sets from an estimates file or a truth file.
inline std::vector<std::pair<int, std::vector<Vector>>> point_sets_from_json(const nlohmann::json& j) {
    std::vector<std::pair<int, std::vector<Vector>>> out;
    if (j.contains("targets")) {
        const GroundTruth gt = truth_from_json(j);
        for (int s = 1; s <= gt.num_scans; ++s) out.emplace_back(s, gt.states_at(s));
        return out;
    }
    for (const auto& js : j.at("scans")) {
        std::vector<Vector> pts;
        for (const auto& e : js.at("estimates")) {
            const auto v = e.at("state").get<std::vector<double>>();
            pts.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        out.emplace_back(js.at("scan").get<int>(), std::move(pts));
    }
    return out;
}

} // namespace pmbm
