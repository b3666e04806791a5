#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pmbm;
using pmbm::fixtures::vec;

namespace {

// Minimum over all injections of rows into columns (rows <= cols).
double brute_force_cost(const Matrix& cost) {
    std::vector<int> cols(static_cast<std::size_t>(cost.cols()));
    std::iota(cols.begin(), cols.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (Eigen::Index i = 0; i < cost.rows(); ++i) c += cost(i, cols[static_cast<std::size_t>(i)]);
        best = std::min(best, c);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

double assignment_cost(const Matrix& cost, const Assignment& a) {
    double c = 0.0;
    for (std::size_t i = 0; i < a.assignment.size(); ++i)
        if (a.assignment[i] >= 0) c += cost(static_cast<Eigen::Index>(i), a.assignment[i]);
    return c;
}

std::vector<Vector> random_set(std::mt19937_64& rng, int size, double scale) {
    std::vector<Vector> out;
    for (int k = 0; k < size; ++k) out.push_back(fixtures::random_vector(rng, 4, scale));
    return out;
}

// OSPA by enumerating every injection of the smaller set into the larger one.
double brute_force_ospa(const std::vector<Vector>& X, const std::vector<Vector>& Y, double p, double c) {
    const auto& small = X.size() <= Y.size() ? X : Y;
    const auto& large = X.size() <= Y.size() ? Y : X;
    if (large.empty()) return 0.0;
    Matrix D(static_cast<Eigen::Index>(small.size()), static_cast<Eigen::Index>(large.size()));
    for (std::size_t i = 0; i < small.size(); ++i)
        for (std::size_t j = 0; j < large.size(); ++j)
            D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::pow(std::min((small[i] - large[j]).norm(), c), p);
    const double matched = small.empty() ? 0.0 : brute_force_cost(D);
    const double penalty = std::pow(c, p) * static_cast<double>(large.size() - small.size());
    return std::pow((matched + penalty) / static_cast<double>(large.size()), 1.0 / p);
}

} // namespace

TEST(OptimalAssignment, Examples) {
    Matrix one(1, 1);
    one << 7.0;
    EXPECT_EQ(optimal_assignment(one).cost, 7.0);

    Matrix two(2, 2);
    two << 1, 10, 10, 1;
    const auto a = optimal_assignment(two);
    EXPECT_EQ(a.cost, 2.0);
    EXPECT_EQ(a.assignment, (std::vector<int>{0, 1}));

    const auto empty = optimal_assignment(Matrix(0, 0));
    EXPECT_TRUE(empty.assignment.empty());
    EXPECT_EQ(empty.cost, 0.0);
}

TEST(OptimalAssignment, MatchesPermutationOracle) {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix cost(6, 6);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) cost(i, j) = u(rng);
        const auto a = optimal_assignment(cost);
        EXPECT_NEAR(a.cost, brute_force_cost(cost), 1e-9);
        EXPECT_NEAR(assignment_cost(cost, a), a.cost, 1e-9);
        std::vector<int> sorted = a.assignment;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5}));
        EXPECT_LE(a.cost, cost.trace() + 1e-9);
    }
}

TEST(OptimalAssignment, RectangularBothOrientations) {
    std::mt19937_64 rng(82);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = 1 + trial % 4, cols = rows + 1 + trial % 3;
        Matrix cost(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) cost(i, j) = u(rng);
        const auto wide = optimal_assignment(cost);
        EXPECT_NEAR(wide.cost, brute_force_cost(cost), 1e-9);
        const Matrix tall_cost = cost.transpose();
        const auto tall = optimal_assignment(tall_cost);
        EXPECT_EQ(tall.cost, wide.cost);
        EXPECT_EQ(std::count(tall.assignment.begin(), tall.assignment.end(), -1), cols - rows);
        EXPECT_NEAR(assignment_cost(tall_cost, tall), tall.cost, 1e-9);
    }
}

TEST(Ospa, Examples) {
    const std::vector<Vector> X{vec({1, 2, 3, 4}), vec({-5, 0, 2, 1})};
    EXPECT_EQ(ospa(X, X), 0.0);
    EXPECT_EQ(ospa({vec({0, 0, 0, 0})}, {}), 20.0);
    EXPECT_EQ(ospa({}, {}), 0.0);
    EXPECT_DOUBLE_EQ(ospa({vec({0, 0})}, {vec({3, 4})}, {1.0, 20.0}), 5.0);
    EXPECT_DOUBLE_EQ(ospa({vec({0, 0})}, {vec({300, 400})}, {1.0, 20.0}), 20.0);
}

TEST(Ospa, CardinalityPenalty) {
    // one exact match and one unmatched point: (0 + c) / 2
    const std::vector<Vector> X{vec({1, 1, 1, 1})};
    const std::vector<Vector> Y{vec({1, 1, 1, 1}), vec({50, 0, 0, 0})};
    EXPECT_DOUBLE_EQ(ospa(X, Y), 10.0);
    EXPECT_DOUBLE_EQ(ospa(X, Y, {2.0, 20.0}), std::sqrt(200.0));
}

TEST(Ospa, MatchesBruteForce) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 300; ++trial) {
        const auto X = random_set(rng, trial % 5, 15.0);
        const auto Y = random_set(rng, (trial / 5) % 5, 15.0);
        const double p = 1.0 + (trial % 3);
        EXPECT_NEAR(ospa(X, Y, {p, 20.0}), brute_force_ospa(X, Y, p, 20.0), 1e-9);
    }
}

TEST(Ospa, SymmetricAndBounded) {
    std::mt19937_64 rng(84);
    for (int trial = 0; trial < 300; ++trial) {
        const auto X = random_set(rng, trial % 6, 20.0);
        const auto Y = random_set(rng, (trial / 6) % 6, 20.0);
        const double d = ospa(X, Y);
        EXPECT_EQ(d, ospa(Y, X));
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 20.0);
        if (X.empty() != Y.empty()) {
            EXPECT_EQ(d, 20.0);
        }
    }
}

TEST(Ospa, TriangleInequality) {
    std::mt19937_64 rng(85);
    for (int trial = 0; trial < 500; ++trial) {
        const auto X = random_set(rng, trial % 4, 12.0);
        const auto Y = random_set(rng, (trial / 4) % 4, 12.0);
        const auto Z = random_set(rng, (trial / 16) % 4, 12.0);
        for (double p : {1.0, 2.0})
            EXPECT_LE(ospa(X, Z, {p, 20.0}), ospa(X, Y, {p, 20.0}) + ospa(Y, Z, {p, 20.0}) + 1e-9);
    }
}

TEST(Ospa, RejectsBadInput) {
    EXPECT_THROW(ospa({vec({0, 0})}, {vec({0, 0, 0})}), InvalidInputError);
    EXPECT_THROW(ospa({}, {}, {0.5, 20.0}), InvalidInputError);
    EXPECT_THROW(ospa({}, {}, {1.0, 0.0}), InvalidInputError);
}
