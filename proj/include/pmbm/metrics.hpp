#pragma once

#include "pmbm/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pmbm {

struct OspaParams {
    double p = 1.0;
    double c = 20.0;
};

struct Assignment {
    /// assignment[i] = column matched to row i, or -1 when row i is unmatched
    /// (only possible when there are more rows than columns).
    std::vector<int> assignment;
    double cost = 0.0;
};

/// Minimum-cost one-to-one assignment of the smaller side of a rectangular
/// cost matrix into the larger (Hungarian method with potentials).
inline Assignment optimal_assignment(const Matrix& cost) {
    const auto rows = cost.rows();
    const auto cols = cost.cols();
    Assignment out;
    out.assignment.assign(static_cast<std::size_t>(rows), -1);
    if (rows == 0 || cols == 0) return out;
    if (!cost.allFinite()) throw InvalidInputError("optimal_assignment: costs must be finite");

    const bool transposed = rows > cols;
    const Matrix a = transposed ? Matrix(cost.transpose()) : cost;
    const auto n = a.rows();  // n <= m
    const auto m = a.cols();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // 1-based arrays; column 0 is a sentinel.
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
    std::vector<Eigen::Index> match(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        match[0] = i;
        Eigen::Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
        std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const Eigen::Index i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= m; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) continue;
                const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
                if (cur < minv[uj]) {
                    minv[uj] = cur;
                    way[uj] = j0;
                }
                if (minv[uj] < delta) {
                    delta = minv[uj];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= m; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) {
                    u[static_cast<std::size_t>(match[uj])] += delta;
                    v[uj] -= delta;
                } else {
                    minv[uj] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const Eigen::Index j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    for (Eigen::Index j = 1; j <= m; ++j) {
        const Eigen::Index i = match[static_cast<std::size_t>(j)];
        if (i == 0) continue;
        if (transposed)
            out.assignment[static_cast<std::size_t>(j - 1)] = static_cast<int>(i - 1);
        else
            out.assignment[static_cast<std::size_t>(i - 1)] = static_cast<int>(j - 1);
    }
    // Summing in sorted order makes the total independent of which side is rows.
    std::vector<double> chosen;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const int j = out.assignment[static_cast<std::size_t>(i)];
        if (j >= 0) chosen.push_back(cost(i, j));
    }
    std::sort(chosen.begin(), chosen.end());
    for (double c : chosen) out.cost += c;
    return out;
}

/// OSPA distance of order p with cutoff c, Euclidean base distance.
inline double ospa(const std::vector<Vector>& X, const std::vector<Vector>& Y, const OspaParams& params = {}) {
    if (!(params.p >= 1.0) || !(params.c > 0.0)) throw InvalidInputError("ospa: need p >= 1 and c > 0");
    const std::vector<Vector>& small = X.size() <= Y.size() ? X : Y;
    const std::vector<Vector>& large = X.size() <= Y.size() ? Y : X;
    const auto m = small.size();
    const auto n = large.size();
    if (n == 0) return 0.0;
    const auto dim = large.front().size();
    for (const auto* set : {&small, &large})
        for (const auto& x : *set)
            if (x.size() != dim) throw InvalidInputError("ospa: points have different dimensions");

    const double cp = std::pow(params.c, params.p);
    double total = cp * static_cast<double>(n - m);
    if (m > 0) {
        Matrix cost(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::pow(std::min((small[i] - large[j]).norm(), params.c), params.p);
        total += optimal_assignment(cost).cost;
    }
    return std::pow(total / static_cast<double>(n), 1.0 / params.p);
}

} // namespace pmbm
