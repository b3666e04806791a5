#pragma once

#include "pmbm/bernoulli.hpp"
#include "pmbm/exact_sum.hpp"
#include "pmbm/ppp.hpp"
#include "pmbm/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pmbm {

/// Single-scan association weights. Row i of `w_track` holds track i's miss
/// weight in column 0 and its update weight with measurement j in column j.
/// `w_new[j-1]` is the weight of measurement j starting a new track.
struct WeightMatrix {
    Matrix w_track;
    Vector w_new;

    [[nodiscard]] Eigen::Index n() const { return w_track.rows(); }
    [[nodiscard]] Eigen::Index m() const { return w_new.size(); }
};

/// Marginal association probabilities, laid out like WeightMatrix.
struct MarginalTable {
    Matrix p_track;
    Vector p_new;

    [[nodiscard]] Eigen::Index n() const { return p_track.rows(); }
    [[nodiscard]] Eigen::Index m() const { return p_new.size(); }
};

inline void validate(const WeightMatrix& W) {
    const auto n = W.w_track.rows();
    const auto m = W.w_new.size();
    if (n > 0 && W.w_track.cols() != m + 1)
        throw InvalidInputError("WeightMatrix: w_track must have m + 1 columns");
    if (!W.w_track.allFinite() || !W.w_new.allFinite() || (n > 0 && W.w_track.minCoeff() < 0.0) ||
        (m > 0 && W.w_new.minCoeff() < 0.0))
        throw InvalidInputError("WeightMatrix: weights must be finite and non-negative");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(W.w_track.row(i).sum() > 0.0))
            throw InvalidInputError("WeightMatrix: track " + std::to_string(i) + " has an all-zero row");
    for (Eigen::Index j = 0; j < m; ++j) {
        const double col = W.w_new(j) + (n > 0 ? W.w_track.col(j + 1).sum() : 0.0);
        if (!(col > 0.0))
            throw InvalidInputError("WeightMatrix: measurement " + std::to_string(j + 1) + " has no positive weight");
    }
}

/// Assembles the association weights from per-track hypotheses and new tracks.
inline WeightMatrix build_weight_matrix(const std::vector<TrackHypotheses>& hyps, const std::vector<NewTrack>& new_tracks) {
    const auto n = static_cast<Eigen::Index>(hyps.size());
    const auto m = static_cast<Eigen::Index>(new_tracks.size());
    WeightMatrix W{Matrix::Zero(n, m + 1), Vector::Zero(m)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = hyps[static_cast<std::size_t>(i)].hyps;
        if (static_cast<Eigen::Index>(row.size()) != m + 1)
            throw InvalidInputError("build_weight_matrix: track " + std::to_string(i) + " needs exactly m + 1 hypotheses");
        for (Eigen::Index a = 0; a <= m; ++a) {
            const auto& h = row[static_cast<std::size_t>(a)];
            if (h.assoc != static_cast<std::size_t>(a))
                throw InvalidInputError("build_weight_matrix: hypothesis order does not match measurement order");
            W.w_track(i, a) = h.weight;
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) W.w_new(j) = new_tracks[static_cast<std::size_t>(j)].weight;
    validate(W);
    return W;
}

struct LbpResult {
    MarginalTable marginals;
    int iterations = 0;
    bool converged = false;
};

/// Floor for message denominators s − w·μ.
inline constexpr double kLbpDenominatorFloor = 1e-300;

/// Loopy belief propagation over the bipartite track/measurement model.
/// `initial` seeds the measurement-to-track messages μ_{b^j→a^i} (n × m);
/// the default start is all ones.
inline LbpResult lbp_marginals(const WeightMatrix& W, double eps, int max_iter, const std::optional<Matrix>& initial = {}) {
    validate(W);
    if (!(eps > 0.0)) throw InvalidInputError("lbp_marginals: eps must be positive");
    const auto n = W.n();
    const auto m = W.m();

    // mu_ba(i, j): measurement j -> track i; mu_ab(i, j): track i -> measurement j.
    Matrix mu_ba = initial ? *initial : Matrix::Ones(n, m);
    if (mu_ba.rows() != n || mu_ba.cols() != m) throw InvalidInputError("lbp_marginals: initial messages must be n x m");
    Matrix mu_ab = Matrix::Zero(n, m);
    Matrix mu_prev = Matrix::Zero(n, m);

    // Order-independent sums keep the messages equivariant under relabelling.
    ExactSum acc;
    auto track_sum = [&](Eigen::Index i) {
        acc.clear();
        acc.add(W.w_track(i, 0));
        for (Eigen::Index j = 0; j < m; ++j) acc.add(W.w_track(i, j + 1) * mu_ba(i, j));
        return acc.value();
    };
    auto meas_sum = [&](Eigen::Index j) {
        acc.clear();
        acc.add(W.w_new(j));
        for (Eigen::Index i = 0; i < n; ++i) acc.add(mu_ab(i, j));
        return acc.value();
    };

    LbpResult res;
    auto delta = [&] { return n * m == 0 ? 0.0 : (mu_ba - mu_prev).cwiseAbs().maxCoeff(); };
    while (delta() > eps) {
        if (res.iterations >= max_iter) break;
        ++res.iterations;
        mu_prev = mu_ba;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = track_sum(i);
            for (Eigen::Index j = 0; j < m; ++j) {
                const double w = W.w_track(i, j + 1);
                mu_ab(i, j) = w / std::max(s - w * mu_ba(i, j), kLbpDenominatorFloor);
            }
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const double s = meas_sum(j);
            for (Eigen::Index i = 0; i < n; ++i) mu_ba(i, j) = 1.0 / std::max(s - mu_ab(i, j), kLbpDenominatorFloor);
        }
    }
    res.converged = delta() <= eps;

    auto& out = res.marginals;
    out.p_track = Matrix::Zero(n, m + 1);
    out.p_new = Vector::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = track_sum(i);
        out.p_track(i, 0) = W.w_track(i, 0) / s;
        for (Eigen::Index j = 0; j < m; ++j) out.p_track(i, j + 1) = W.w_track(i, j + 1) * mu_ba(i, j) / s;
    }
    for (Eigen::Index j = 0; j < m; ++j) out.p_new(j) = W.w_new(j) / meas_sum(j);
    return res;
}

/// Number of feasible single-scan associations: Σ_k C(n,k) C(m,k) k!.
/// Saturates at UINT64_MAX.
inline std::uint64_t count_associations(std::uint64_t n, std::uint64_t m) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    long double total = 0.0L;
    long double term = 1.0L;  // C(n,k) C(m,k) k! for k = 0
    for (std::uint64_t k = 0; k <= std::min(n, m); ++k) {
        if (k > 0) term *= static_cast<long double>((n - k + 1) * (m - k + 1)) / static_cast<long double>(k);
        total += term;
        if (total >= static_cast<long double>(kMax)) return kMax;
    }
    return static_cast<std::uint64_t>(total + 0.5L);
}

inline constexpr std::uint64_t kDefaultEnumerationBound = 10'000'000;

/// Exact marginals together with the measurement-side view: `p_meas(j-1, i)`
/// is P(measurement j belongs to track i), accumulated independently of
/// `table.p_track`; column n holds the new-track probability.
struct ExactMarginals {
    MarginalTable table;
    Matrix p_meas;
    std::uint64_t hypotheses = 0;
};

/// Enumerates every feasible association (measurements outer, tracks inner,
/// depth first) and normalizes the products of their weights.
inline ExactMarginals exact_marginals_detailed(const WeightMatrix& W, std::uint64_t bound = kDefaultEnumerationBound) {
    validate(W);
    const auto n = W.n();
    const auto m = W.m();
    const auto count = count_associations(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m));
    if (count > bound)
        throw CapacityError("exact_marginals: " + std::to_string(count) + " association hypotheses exceed the bound of " +
                            std::to_string(bound));

    ExactMarginals out;
    out.table.p_track = Matrix::Zero(n, m + 1);
    out.table.p_new = Vector::Zero(m);
    out.p_meas = Matrix::Zero(m, n + 1);

    // Each leaf's weight is the product of its factors taken in sorted order,
    // and every cell is an exactly rounded sum, so relabelling tracks or
    // measurements permutes the output without changing any bit.
    std::vector<Eigen::Index> track_of(static_cast<std::size_t>(m), -1);  // -1: new
    std::vector<Eigen::Index> meas_of(static_cast<std::size_t>(n), 0);    // 0: miss
    std::vector<double> factors;
    factors.reserve(static_cast<std::size_t>(n + m));
    std::vector<ExactSum> p_track(static_cast<std::size_t>(n * (m + 1)));
    std::vector<ExactSum> p_meas(static_cast<std::size_t>(m * (n + 1)));
    ExactSum total;

    auto leaf = [&] {
        factors.clear();
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto i = track_of[static_cast<std::size_t>(j)];
            factors.push_back(i < 0 ? W.w_new(j) : W.w_track(i, j + 1));
        }
        for (Eigen::Index i = 0; i < n; ++i)
            if (meas_of[static_cast<std::size_t>(i)] == 0) factors.push_back(W.w_track(i, 0));
        std::sort(factors.begin(), factors.end());
        double prod = 1.0;
        for (double f : factors) prod *= f;
        ++out.hypotheses;
        if (prod == 0.0) return;
        total.add(prod);
        for (Eigen::Index i = 0; i < n; ++i)
            p_track[static_cast<std::size_t>(i * (m + 1) + meas_of[static_cast<std::size_t>(i)])].add(prod);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto i = track_of[static_cast<std::size_t>(j)];
            p_meas[static_cast<std::size_t>(j * (n + 1) + (i < 0 ? n : i))].add(prod);
        }
    };

    auto recurse = [&](auto&& self, Eigen::Index j) -> void {
        if (j == m) {
            leaf();
            return;
        }
        track_of[static_cast<std::size_t>(j)] = -1;
        self(self, j + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (meas_of[static_cast<std::size_t>(i)] != 0) continue;
            meas_of[static_cast<std::size_t>(i)] = j + 1;
            track_of[static_cast<std::size_t>(j)] = i;
            self(self, j + 1);
            meas_of[static_cast<std::size_t>(i)] = 0;
        }
        track_of[static_cast<std::size_t>(j)] = -1;
    };
    recurse(recurse, 0);

    const double z = total.value();
    if (!(z > 0.0)) throw NumericalError("exact_marginals: no feasible association has positive weight");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a <= m; ++a) out.table.p_track(i, a) = p_track[static_cast<std::size_t>(i * (m + 1) + a)].value() / z;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i <= n; ++i) out.p_meas(j, i) = p_meas[static_cast<std::size_t>(j * (n + 1) + i)].value() / z;
        out.table.p_new(j) = out.p_meas(j, n);
    }
    return out;
}

inline MarginalTable exact_marginals(const WeightMatrix& W, std::uint64_t bound = kDefaultEnumerationBound) {
    return exact_marginals_detailed(W, bound).table;
}

/// True iff entries lie in [0, 1], each track row sums to one and each
/// measurement's probabilities (new track plus every track) sum to one.
inline bool check_marginal_consistency(const MarginalTable& t, double tol = 1e-9) {
    const auto n = t.p_track.rows();
    const auto m = t.p_new.size();
    if (n > 0 && t.p_track.cols() != m + 1) return false;
    if (!t.p_track.allFinite() || !t.p_new.allFinite()) return false;
    auto in_unit = [tol](double p) { return p >= -tol && p <= 1.0 + tol; };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a <= m; ++a)
            if (!in_unit(t.p_track(i, a))) return false;
        if (std::abs(t.p_track.row(i).sum() - 1.0) > tol) return false;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        if (!in_unit(t.p_new(j))) return false;
        const double col = t.p_new(j) + (n > 0 ? t.p_track.col(j + 1).sum() : 0.0);
        if (std::abs(col - 1.0) > tol) return false;
    }
    return true;
}

namespace detail {

inline void write_table_csv(std::ostream& os, const Matrix& tracks, const Vector& fresh) {
    const auto m = fresh.size();
    os << "row,miss";
    for (Eigen::Index j = 1; j <= m; ++j) os << ",z" << j;
    os << '\n';
    os.precision(17);
    for (Eigen::Index i = 0; i < tracks.rows(); ++i) {
        os << "track" << i + 1;
        for (Eigen::Index a = 0; a <= m; ++a) os << ',' << tracks(i, a);
        os << '\n';
    }
    os << "new,";
    for (Eigen::Index j = 0; j < m; ++j) os << ',' << fresh(j);
    os << '\n';
}

} // namespace detail

/// CSV dump: one row per track then a "new" row; columns miss, z1..zm.
inline void write_csv(std::ostream& os, const WeightMatrix& W) { detail::write_table_csv(os, W.w_track, W.w_new); }
inline void write_csv(std::ostream& os, const MarginalTable& t) { detail::write_table_csv(os, t.p_track, t.p_new); }

} // namespace pmbm
