#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pmbm;
using pmbm::fixtures::mat1;
using pmbm::fixtures::scalar_gaussian;
using pmbm::fixtures::vec;

TEST(KalmanPredict, IdentityLeavesDensityUnchanged) {
    const auto g = kalman_predict(scalar_gaussian(2.0, 3.0), mat1(1.0), mat1(0.0));
    EXPECT_EQ(g.mean(0), 2.0);
    EXPECT_EQ(g.cov(0, 0), 3.0);
}

TEST(KalmanPredict, ScalarHandComputed) {
    const auto g = kalman_predict(scalar_gaussian(1.0, 1.0), mat1(2.0), mat1(1.0));
    EXPECT_DOUBLE_EQ(g.mean(0), 2.0);
    EXPECT_DOUBLE_EQ(g.cov(0, 0), 5.0);
}

TEST(KalmanPredict, ConstantVelocityFromZeroGivesProcessNoise) {
    const auto motion = constant_velocity_2d(0.01, 1.0, 0.999);
    const Gaussian zero{Vector::Zero(4), Matrix::Zero(4, 4)};
    const auto g = kalman_predict(zero, motion.F, motion.Q);
    Matrix Q(4, 4);
    // state order x, vx, y, vy
    Q << 0.01 / 3, 0.01 / 2, 0, 0,
         0.01 / 2, 0.01, 0, 0,
         0, 0, 0.01 / 3, 0.01 / 2,
         0, 0, 0.01 / 2, 0.01;
    EXPECT_TRUE(g.mean.isZero());
    EXPECT_LT((g.cov - Q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KalmanPredict, DimensionMismatchThrows) {
    EXPECT_THROW(kalman_predict(scalar_gaussian(0, 1), Matrix::Identity(2, 2), Matrix::Identity(2, 2)), InvalidInputError);
    EXPECT_THROW(kalman_predict(scalar_gaussian(0, 1), mat1(1), Matrix::Identity(2, 2)), InvalidInputError);
}

TEST(KalmanPredict, PreservesPositiveSemiDefiniteness) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        Matrix A(d, d - (trial % 2 == 0 && d > 1 ? 1 : 0));  // some rank-deficient covariances
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = nd(rng);
        Matrix F(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) F(i, j) = nd(rng);
        const Gaussian g{fixtures::random_vector(rng, d), A * A.transpose()};
        const auto out = kalman_predict(g, F, Matrix::Zero(d, d));
        EXPECT_EQ(check_gaussian(out), "");
    }
}

TEST(KalmanUpdate, ScalarAtPredictedMeasurement) {
    const auto res = kalman_update(scalar_gaussian(0.0, 1.0), mat1(1.0), mat1(1.0), vec({0.0}));
    EXPECT_DOUBLE_EQ(res.posterior.mean(0), 0.0);
    EXPECT_DOUBLE_EQ(res.posterior.cov(0, 0), 0.5);
    EXPECT_NEAR(res.predictive_likelihood, 1.0 / std::sqrt(2.0 * std::numbers::pi * 2.0), 1e-15);
    EXPECT_NEAR(res.predictive_likelihood, 0.282095, 1e-6);
}

TEST(KalmanUpdate, ScalarOffsetMeasurement) {
    const auto res = kalman_update(scalar_gaussian(0.0, 1.0), mat1(1.0), mat1(1.0), vec({2.0}));
    EXPECT_DOUBLE_EQ(res.posterior.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(res.posterior.cov(0, 0), 0.5);
}

// Information-form posterior and explicit Gaussian density as independent references.
TEST(KalmanUpdate, MatchesInformationFormOnRandomInstances) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 2 + trial % 3;
        const Eigen::Index k = 1 + trial % 2;
        const Gaussian prior{fixtures::random_vector(rng, d), fixtures::random_spd(rng, d)};
        Matrix H(k, d);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < d; ++j) H(i, j) = nd(rng);
        const Matrix R = fixtures::random_spd(rng, k);
        const Vector z = fixtures::random_vector(rng, k);

        const auto res = kalman_update(prior, H, R, z);
        const Matrix info = prior.cov.inverse() + H.transpose() * R.inverse() * H;
        const Matrix P = info.inverse();
        const Vector mean = P * (prior.cov.inverse() * prior.mean + H.transpose() * R.inverse() * z);
        EXPECT_LT((res.posterior.cov - P).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + P.cwiseAbs().maxCoeff()));
        EXPECT_LT((res.posterior.mean - mean).cwiseAbs().maxCoeff(), 1e-8 * (1.0 + mean.cwiseAbs().maxCoeff()));

        const Matrix S = H * prior.cov * H.transpose() + R;
        const Vector nu = z - H * prior.mean;
        const double expected = std::exp(-0.5 * nu.dot(S.inverse() * nu)) /
                                std::sqrt(std::pow(2.0 * std::numbers::pi, static_cast<double>(k)) * S.determinant());
        EXPECT_NEAR(res.predictive_likelihood, expected, 1e-10 * expected);
    }
}

TEST(KalmanUpdate, PosteriorCovarianceShrinks) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const Gaussian prior{fixtures::random_vector(rng, 4), fixtures::random_spd(rng, 4)};
        Matrix H(2, 4);
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 4; ++j) H(i, j) = nd(rng);
        const auto res = kalman_update(prior, H, fixtures::random_spd(rng, 2), fixtures::random_vector(rng, 2));
        Eigen::SelfAdjointEigenSolver<Matrix> es(prior.cov - res.posterior.cov);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(KalmanUpdate, UninformativeMeasurementKeepsPrior) {
    const Gaussian prior{vec({1.0, -2.0}), Matrix::Identity(2, 2)};
    const Matrix H = Matrix::Identity(2, 2);
    const auto res = kalman_update(prior, H, 1e12 * Matrix::Identity(2, 2), vec({50.0, 50.0}));
    EXPECT_LT((res.posterior.mean - prior.mean).norm(), 1e-9);
    EXPECT_LT((res.posterior.cov - prior.cov).norm(), 1e-9);
    EXPECT_NEAR(res.predictive_likelihood, 1.0 / (2.0 * std::numbers::pi * 1e12), 1e-20);
}

TEST(KalmanUpdate, LikelihoodIntegratesToOne) {
    const auto prior = scalar_gaussian(0.3, 1.7);
    const PreparedUpdate upd(prior, mat1(1.0), mat1(0.6));
    // composite Simpson over ±40 standard deviations
    const double lo = -60.0, hi = 60.0;
    const int steps = 20000;
    const double h = (hi - lo) / steps;
    double sum = upd.likelihood(vec({lo})) + upd.likelihood(vec({hi}));
    for (int i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * upd.likelihood(vec({lo + i * h}));
    EXPECT_NEAR(sum * h / 3.0, 1.0, 1e-6);
}

TEST(KalmanUpdate, SingularInnovationThrows) {
    EXPECT_THROW(kalman_update(scalar_gaussian(0, 0), mat1(1), mat1(0), vec({0})), NumericalError);
    const Gaussian prior{Vector::Zero(2), Matrix::Zero(2, 2)};
    Matrix R(2, 2);
    R << 1, 0, 0, 1e-14;
    EXPECT_THROW(kalman_update(prior, Matrix::Identity(2, 2), R, Vector::Zero(2)), NumericalError);
}

TEST(KalmanUpdate, DimensionMismatchThrows) {
    EXPECT_THROW(kalman_update(scalar_gaussian(0, 1), Matrix::Identity(2, 2), mat1(1), vec({0})), InvalidInputError);
    EXPECT_THROW(kalman_update(scalar_gaussian(0, 1), mat1(1), mat1(1), vec({0, 0})), InvalidInputError);
}

TEST(MomentMatch, SingleComponentUnchanged) {
    GaussianMixture mix;
    mix.components.push_back({0.3, {vec({1.0, 2.0}), Matrix::Identity(2, 2) * 4.0}});
    const auto mm = moment_match(mix);
    EXPECT_EQ(mm.total_weight, 0.3);
    EXPECT_EQ(mm.density.mean, mix.components[0].density.mean);
    EXPECT_EQ(mm.density.cov, mix.components[0].density.cov);
}

TEST(MomentMatch, TwoEqualComponents) {
    GaussianMixture mix;
    mix.components.push_back({0.5, scalar_gaussian(0.0, 1.0)});
    mix.components.push_back({0.5, scalar_gaussian(2.0, 1.0)});
    const auto mm = moment_match(mix);
    EXPECT_DOUBLE_EQ(mm.total_weight, 1.0);
    EXPECT_DOUBLE_EQ(mm.density.mean(0), 1.0);
    EXPECT_DOUBLE_EQ(mm.density.cov(0, 0), 2.0);
}

TEST(MomentMatch, ZeroWeightComponentIgnored) {
    GaussianMixture mix;
    mix.components.push_back({1.0, scalar_gaussian(3.0, 2.0)});
    mix.components.push_back({0.0, scalar_gaussian(-7.0, 9.0)});
    const auto mm = moment_match(mix);
    EXPECT_EQ(mm.density.mean(0), 3.0);
    EXPECT_EQ(mm.density.cov(0, 0), 2.0);
}

TEST(MomentMatch, NonPositiveTotalThrows) {
    EXPECT_THROW(moment_match(GaussianMixture{}), InvalidInputError);
    GaussianMixture mix;
    mix.components.push_back({0.0, scalar_gaussian(0, 1)});
    EXPECT_THROW(moment_match(mix), InvalidInputError);
}

// Second moments via E[x xᵀ] − mean meanᵀ rather than the spread-of-means form.
TEST(MomentMatch, PreservesFirstAndSecondMoments) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        GaussianMixture mix;
        const int k = 1 + trial % 5;
        for (int c = 0; c < k; ++c) mix.components.push_back({u(rng), {fixtures::random_vector(rng, 3, 5.0), fixtures::random_spd(rng, 3)}});
        const auto mm = moment_match(mix);
        Vector m1 = Vector::Zero(3);
        Matrix m2 = Matrix::Zero(3, 3);
        double W = 0.0;
        for (const auto& c : mix.components) {
            W += c.weight;
            m1 += c.weight * c.density.mean;
            m2 += c.weight * (c.density.cov + c.density.mean * c.density.mean.transpose());
        }
        m1 /= W;
        const Matrix cov = m2 / W - m1 * m1.transpose();
        EXPECT_LT((mm.density.mean - m1).norm(), 1e-10 * (1.0 + m1.norm()));
        EXPECT_LT((mm.density.cov - cov).norm(), 1e-10 * (1.0 + cov.norm()));
    }
}

TEST(CheckGaussian, FlagsInvalidDensities) {
    EXPECT_EQ(check_gaussian(scalar_gaussian(0, 1)), "");
    Matrix asym(2, 2);
    asym << 1, 0.5, 0, 1;
    EXPECT_NE(check_gaussian({Vector::Zero(2), asym}), "");
    EXPECT_NE(check_gaussian(scalar_gaussian(0, -1)), "");
    EXPECT_NE(check_gaussian({Vector::Zero(2), Matrix::Identity(3, 3)}), "");
}

TEST(GaussianPdf, StandardNormalAtZero) {
    EXPECT_NEAR(gaussian_pdf(vec({0.0}), scalar_gaussian(0, 1)), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}
