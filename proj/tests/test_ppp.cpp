#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pmbm;
using pmbm::fixtures::mat1;
using pmbm::fixtures::scalar_clutter;
using pmbm::fixtures::scalar_gaussian;
using pmbm::fixtures::scalar_sensor;
using pmbm::fixtures::vec;

namespace {

PppIntensity scalar_ppp(std::initializer_list<WeightedGaussian> comps) {
    PppIntensity p;
    p.mixture.components = comps;
    return p;
}

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

MotionModel scalar_motion(double Ps) { return {mat1(1.0), mat1(0.5), Ps}; }

} // namespace

TEST(PredictPpp, EmptyPriorGivesBirth) {
    BirthModel birth{{{{0.05, scalar_gaussian(1.0, 2.0)}}}};
    const auto out = predict_ppp(PppIntensity{}, scalar_motion(0.9), birth);
    ASSERT_EQ(out.mixture.size(), 1u);
    EXPECT_EQ(out.mixture.components[0].weight, 0.05);
    EXPECT_EQ(out.mixture.components[0].density.mean(0), 1.0);
}

TEST(PredictPpp, NoSurvivorsGivesBirth) {
    BirthModel birth{{{{0.05, scalar_gaussian(1.0, 2.0)}}}};
    const auto out = predict_ppp(scalar_ppp({{3.0, scalar_gaussian(0, 1)}}), scalar_motion(0.0), birth);
    ASSERT_EQ(out.mixture.size(), 1u);
    EXPECT_EQ(out.mixture.components[0].weight, 0.05);
}

TEST(PredictPpp, SurvivorWeightScaledBySurvival) {
    BirthModel birth{{{{0.05, scalar_gaussian(0, 1)}}}};
    const auto out = predict_ppp(scalar_ppp({{10.0, scalar_gaussian(0, 1)}}), scalar_motion(0.999), birth);
    ASSERT_EQ(out.mixture.size(), 2u);
    EXPECT_DOUBLE_EQ(out.mixture.components[0].weight, 9.99);
    EXPECT_DOUBLE_EQ(out.mixture.components[0].density.cov(0, 0), 1.5);
    EXPECT_EQ(out.mixture.components[1].weight, 0.05);
}

TEST(PredictPpp, MassBalance) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const auto cfg = benchmark_config();
    for (int trial = 0; trial < 100; ++trial) {
        PppIntensity p;
        for (int k = 0; k < 1 + trial % 6; ++k) p.mixture.components.push_back({u(rng), {fixtures::random_vector(rng, 4), fixtures::random_spd(rng, 4)}});
        const auto out = predict_ppp(p, cfg.motion, cfg.birth);
        const double expected = cfg.motion.Ps * p.mass() + cfg.birth.intensity.total_weight();
        EXPECT_NEAR(out.mass(), expected, 1e-12 * expected);
    }
}

TEST(ThinUndetected, Examples) {
    const auto p = scalar_ppp({{10.0, scalar_gaussian(0, 1)}});
    EXPECT_EQ(thin_undetected(p, 1.0).mixture.components[0].weight, 0.0);
    EXPECT_EQ(thin_undetected(p, 0.0).mixture.components[0].weight, 10.0);
    EXPECT_NEAR(thin_undetected(p, 0.7).mixture.components[0].weight, 3.0, 1e-14);
}

TEST(PrunePpp, DropsLowWeights) {
    const auto p = scalar_ppp({{1e-6, scalar_gaussian(0, 1)}, {1e-5, scalar_gaussian(1, 1)}, {2.0, scalar_gaussian(2, 1)}});
    const auto out = prune_ppp(p, 1e-5);
    ASSERT_EQ(out.mixture.size(), 2u);
    EXPECT_EQ(out.mixture.components[0].weight, 1e-5);
}

TEST(SpawnTrack, NoClutterGivesCertainExistence) {
    const auto nt = spawn_track_from_measurement(scalar_ppp({{2.0, scalar_gaussian(0, 1)}}), scalar_sensor(0.7),
                                                 scalar_clutter(0.0), vec({0.3}));
    EXPECT_GT(nt.detection_mass, 0.0);
    EXPECT_EQ(nt.track.r, 1.0);
}

TEST(SpawnTrack, EmptyIntensityIsPureFalseAlarm) {
    // rate 0.1 on a unit interval: λ^fa = 0.1
    const auto nt = spawn_track_from_measurement(PppIntensity{}, scalar_sensor(0.7), scalar_clutter(0.1, 0.0, 1.0), vec({0.5}));
    EXPECT_DOUBLE_EQ(nt.weight, 0.1);
    EXPECT_EQ(nt.track.r, 0.0);
    EXPECT_FALSE(nt.track.degenerate);
    EXPECT_EQ(check_gaussian(nt.track.density), "");
}

TEST(SpawnTrack, HandComputedExistence) {
    // choose the intensity weight so that C = λ·Pd·N{z; 0, 2} = 0.3
    const double Pd = 0.7;
    const double z = 0.4;
    const double lambda = 0.3 / (Pd * normal_pdf(z, 0.0, 2.0));
    const auto nt = spawn_track_from_measurement(scalar_ppp({{lambda, scalar_gaussian(0, 1)}}), scalar_sensor(Pd),
                                                 scalar_clutter(0.1, 0.0, 1.0), vec({z}));
    EXPECT_NEAR(nt.detection_mass, 0.3, 1e-14);
    EXPECT_NEAR(nt.weight, 0.4, 1e-14);
    EXPECT_NEAR(nt.track.r, 0.75, 1e-14);
    EXPECT_NEAR(nt.track.density.mean(0), z / 2.0, 1e-14);
    EXPECT_NEAR(nt.track.density.cov(0, 0), 0.5, 1e-14);
}

TEST(SpawnTrack, DegenerateWhenNothingExplainsTheMeasurement) {
    const auto nt = spawn_track_from_measurement(PppIntensity{}, scalar_sensor(0.7), scalar_clutter(10.0), vec({500.0}));
    EXPECT_EQ(nt.weight, 0.0);
    EXPECT_EQ(nt.track.r, 0.0);
    EXPECT_TRUE(nt.track.degenerate);
    EXPECT_EQ(check_gaussian(nt.track.density), "");
}

// Per-component posteriors from the scalar conjugate formulas, weights from
// explicit densities, collapse through raw second moments.
TEST(SpawnTrack, DensityIsMomentMatchedComponentPosteriors) {
    const double Pd = 0.6, R = 0.5, z = 1.3;
    const double w[] = {2.0, 0.7, 1.1};
    const double m[] = {0.0, 2.0, -1.0};
    const double P[] = {1.0, 0.3, 4.0};
    PppIntensity p;
    for (int k = 0; k < 3; ++k) p.mixture.components.push_back({w[k], scalar_gaussian(m[k], P[k])});
    const MeasModel meas{mat1(1.0), mat1(R), Pd};
    const auto nt = spawn_track_from_measurement(p, meas, scalar_clutter(3.0, -10.0, 10.0), vec({z}));

    double C = 0.0, s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double ck = w[k] * Pd * normal_pdf(z, m[k], P[k] + R);
        const double post_var = 1.0 / (1.0 / P[k] + 1.0 / R);
        const double post_mean = post_var * (m[k] / P[k] + z / R);
        C += ck;
        s1 += ck * post_mean;
        s2 += ck * (post_var + post_mean * post_mean);
    }
    const double mean = s1 / C;
    const double var = s2 / C - mean * mean;
    const double fa = 3.0 / 20.0;
    EXPECT_NEAR(nt.detection_mass, C, 1e-14);
    EXPECT_NEAR(nt.weight, C + fa, 1e-14);
    EXPECT_NEAR(nt.track.r, C / (C + fa), 1e-14);
    EXPECT_NEAR(nt.track.density.mean(0), mean, 1e-12);
    EXPECT_NEAR(nt.track.density.cov(0, 0), var, 1e-12);
}

TEST(SpawnTrack, WeightDecomposesIntoDetectionAndClutter) {
    std::mt19937_64 rng(4);
    const auto cfg = benchmark_config();
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = fixtures::random_scan(rng, cfg, 0, 3);
        const PreparedPppUpdate upd(s.ppp, cfg.measurement);
        for (std::size_t j = 0; j < s.z.size(); ++j) {
            const auto nt = upd.spawn(cfg.clutter, s.z[j], {1, static_cast<int>(j + 1)});
            const double fa = clutter_density(cfg.clutter, s.z[j]);
            EXPECT_NEAR(nt.track.r * nt.weight, nt.detection_mass, 1e-12 * nt.weight);
            EXPECT_NEAR((1.0 - nt.track.r) * nt.weight, fa, 1e-12 * nt.weight);
        }
    }
}

TEST(SpawnTrack, ExistenceIncreasesWithDetectionMass) {
    const auto meas = scalar_sensor(0.7);
    const auto clutter = scalar_clutter(0.5, -10.0, 10.0);
    double previous = -1.0;
    for (double lambda = 0.01; lambda < 100.0; lambda *= 1.7) {
        const auto nt = spawn_track_from_measurement(scalar_ppp({{lambda, scalar_gaussian(0, 1)}}), meas, clutter, vec({0.2}));
        EXPECT_GT(nt.track.r, previous);
        previous = nt.track.r;
    }
}
