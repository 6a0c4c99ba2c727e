#include "memqkf/batch.hpp"
#include "memqkf/errors.hpp"
#include "memqkf/sequential.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace memqkf {
namespace {

constexpr double kPi = std::numbers::pi;

using testing::identical;

MeasurementSet random_points(testing::Gen& g, const DecoupledEstimate& around, int n)
{
    MeasurementSet z;
    for (int i = 0; i < n; ++i) {
        const Vector2 local(testing::uniform(g, -1, 1) * around.axis.mean(0),
                            testing::uniform(g, -1, 1) * around.axis.mean(1));
        z.points.push_back(around.kin.center() + rot(around.orient.mean) * local +
                           Vector2(testing::normal(g), testing::normal(g)));
    }
    return z;
}

TEST(Predict, IdentityDynamicsOnlyWraps)
{
    testing::Gen g(1);
    DecoupledEstimate est = testing::random_estimate(g);
    est.orient.mean = 3 * kPi;
    MotionModel m;
    const DecoupledEstimate out = predict(est, m);
    EXPECT_EQ(out.kin.mean, est.kin.mean);
    EXPECT_LT((out.kin.cov - est.kin.cov).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(out.axis.mean, est.axis.mean);
    EXPECT_NEAR(out.orient.mean, kPi, 1e-12);
    EXPECT_EQ(out.orient.var, est.orient.var);
}

TEST(Predict, ConstantVelocityAndAdditiveNoise)
{
    DecoupledEstimate est;
    est.kin.mean << 0, 0, 1, 2;
    est.orient.var = 0.04;
    const MotionModel m = MotionModel::constant_velocity(1.0, Vector4::Zero(), Vector2::Zero(), 0.01);
    const DecoupledEstimate out = predict(est, m);
    EXPECT_EQ(out.kin.center(), Vector2(1, 2));
    EXPECT_NEAR(out.orient.var, 0.05, 1e-15);
}

TEST(UpdateKinematics, PerfectPriorHasZeroGain)
{
    KinematicState kin;
    kin.mean << 1, 2, 3, 4;
    FilterConfig cfg;
    const KinematicState out = update_kinematics(kin, Vector2(10, -10), shape_matrix(0.2, Vector2(5, 2)), cfg);
    EXPECT_EQ(out.mean, kin.mean);
    EXPECT_EQ(out.cov, kin.cov);
}

TEST(UpdateKinematics, HalfGainInSymmetricCase)
{
    KinematicState kin;
    kin.mean << 0, 0, 0, 0;
    kin.cov.topLeftCorner<2, 2>() = Matrix2::Identity();
    FilterConfig cfg;
    cfg.R = Matrix2::Identity();
    const KinematicState out = update_kinematics(kin, Vector2(2, 0), Matrix2::Zero(), cfg);
    EXPECT_NEAR(out.mean(0), 1.0, 1e-15);
    EXPECT_NEAR(out.mean(1), 0.0, 1e-15);
}

TEST(UpdateKinematics, EffectiveNoiseAddsScaledShape)
{
    // with unit position prior, posterior variance is r/(1+r) per axis of the effective noise
    KinematicState kin;
    kin.cov.topLeftCorner<2, 2>() = Matrix2::Identity();
    FilterConfig cfg;
    cfg.R = Matrix2::Identity();
    cfg.c = 0.25;
    const KinematicState out = update_kinematics(kin, Vector2::Zero(), Vector2(4, 1).asDiagonal(), cfg);
    EXPECT_NEAR(out.cov(0, 0), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(out.cov(1, 1), 1.25 / 2.25, 1e-14);
}

TEST(UpdateKinematics, SingularInnovationThrows)
{
    KinematicState kin;
    FilterConfig cfg;
    cfg.R = Matrix2::Zero();
    EXPECT_THROW(update_kinematics(kin, Vector2::Zero(), Matrix2::Zero(), cfg), SingularInnovation);
}

TEST(UpdateKinematics, PosteriorBelowPriorInLoewnerOrder)
{
    testing::Gen g(21);
    for (int i = 0; i < 500; ++i) {
        const DecoupledEstimate e = testing::random_estimate(g);
        const FilterConfig cfg = testing::random_config(g);
        const KinematicState out =
            update_kinematics(e.kin, Vector2(testing::normal(g), testing::normal(g)),
                              shape_matrix(e.orient.mean, e.axis.mean), cfg);
        EXPECT_TRUE(is_symmetric_psd<4>(out.cov));
        EXPECT_TRUE(is_symmetric_psd<4>(Matrix4(0.5 * ((e.kin.cov - out.cov) + (e.kin.cov - out.cov).transpose())),
                                        1e-12, -1e-9));
    }
}

TEST(AxisMoments, WorkedExample)
{
    DecoupledEstimate snap;
    snap.axis.mean = Vector2(2, 1);
    snap.axis.cov = 0.25 * Matrix2::Identity();
    snap.orient.mean = 0.0;
    FilterConfig cfg;
    cfg.c = 0.25;
    const AxisMoments m = axis_moments(snap, Matrix2::Identity(), cfg);
    // 1 + 0.25 (0.25 + 4) and 1 + 0.25 (0.25 + 1)
    EXPECT_NEAR(m.expected_a(0), 2.0625, 1e-15);
    EXPECT_NEAR(m.expected_a(1), 1.3125, 1e-15);
    EXPECT_NEAR(m.cross_ap(0, 0), 0.25, 1e-15);
    EXPECT_NEAR(m.cross_ap(1, 1), 0.125, 1e-15);
    EXPECT_EQ(m.cross_ap(0, 1), 0.0);
    EXPECT_EQ(m.cross_ap(1, 0), 0.0);
    EXPECT_EQ(m.cov_aa(0, 1), 0.0);
    EXPECT_EQ(m.cov_aa(1, 0), 0.0);
    EXPECT_NEAR(m.cov_aa(0, 0), 2 * 2.0625 * 2.0625, 1e-14);
}

TEST(AxisMoments, ExpectationMatchesMonteCarlo)
{
    testing::Gen g(22);
    for (int trial = 0; trial < 3; ++trial) {
        DecoupledEstimate snap = testing::random_estimate(g);
        const Matrix2 W = testing::random_spd<2>(g, 1.0, 0.1);
        FilterConfig cfg;
        cfg.c = 0.25;
        const AxisMoments mom = axis_moments(snap, W, cfg);

        const Matrix2 r = rot(snap.orient.mean);
        const Matrix2 back = rot(-snap.orient.mean);
        const Matrix2 lp = snap.axis.cov.llt().matrixL();
        const Matrix2 lw = W.llt().matrixL();
        const double sh = std::sqrt(cfg.c);
        const int n = 1000000;
        Vector2 sum = Vector2::Zero();
        Vector2 sum_sq = Vector2::Zero();
        for (int i = 0; i < n; ++i) {
            const Vector2 p = snap.axis.mean + lp * Vector2(testing::normal(g), testing::normal(g));
            const Vector2 h = sh * Vector2(testing::normal(g), testing::normal(g));
            const Vector2 w = lw * Vector2(testing::normal(g), testing::normal(g));
            const Vector2 s = r * p.cwiseProduct(h) + w;
            const Vector2 a = (back * s).cwiseAbs2();
            sum += a;
            sum_sq += a.cwiseAbs2();
        }
        const Vector2 mean = sum / n;
        const Vector2 var = sum_sq / n - mean.cwiseAbs2();
        for (int j = 0; j < 2; ++j) {
            const double se = std::sqrt(var(j) / n);
            EXPECT_NEAR(mom.expected_a(j), mean(j), 3.0 * se) << "component " << j << " trial " << trial;
        }
    }
}

TEST(UpdateAxis, WorkedExampleScalarByScalar)
{
    DecoupledEstimate snap;
    snap.axis.mean = Vector2(2, 1);
    snap.axis.cov = 0.25 * Matrix2::Identity();
    FilterConfig cfg;
    const AxisMoments m = axis_moments(snap, Matrix2::Identity(), cfg);
    const AxisState out = update_axis(snap.axis, Vector2(3, 1), m);
    // diagonal pseudo-covariance: each axis updates independently
    const double e1 = 2.0625;
    const double e2 = 1.3125;
    EXPECT_NEAR(out.mean(0), 2.0 + 0.25 * 0.9375 / (2 * e1 * e1), 1e-14);
    EXPECT_NEAR(out.mean(1), 1.0 + 0.125 * -0.3125 / (2 * e2 * e2), 1e-14);
    EXPECT_NEAR(out.cov(0, 0), 0.25 - 0.25 * 0.25 / (2 * e1 * e1), 1e-14);
    EXPECT_NEAR(out.cov(1, 1), 0.25 - 0.125 * 0.125 / (2 * e2 * e2), 1e-14);
}

TEST(UpdateAxis, ZeroInnovationAndZeroPrior)
{
    testing::Gen g(23);
    const DecoupledEstimate snap = testing::random_estimate(g);
    FilterConfig cfg;
    const AxisMoments m = axis_moments(snap, Matrix2::Identity(), cfg);
    const AxisState same = update_axis(snap.axis, m.expected_a, m);
    EXPECT_EQ(same.mean, snap.axis.mean);
    EXPECT_LT(same.cov.trace(), snap.axis.cov.trace());

    DecoupledEstimate certain = snap;
    certain.axis.cov.setZero();
    const AxisMoments mz = axis_moments(certain, Matrix2::Identity(), cfg);
    const AxisState out = update_axis(certain.axis, Vector2(100, 0), mz);
    EXPECT_EQ(out.mean, certain.axis.mean);
    EXPECT_EQ(out.cov, certain.axis.cov);
}

TEST(UpdateAxis, SingularPseudoCovarianceThrows)
{
    AxisMoments m;
    m.cov_aa << 1, 1, 1, 1;
    EXPECT_THROW(update_axis(AxisState{}, Vector2::Ones(), m), SingularPseudoCov);
}

TEST(OrientationMoments, CertainOrientationHasNoSecondOrderTerm)
{
    testing::Gen g(24);
    DecoupledEstimate snap = testing::random_estimate(g);
    snap.orient.var = 0.0;
    const OrientationMoments m = orientation_moments(snap, Matrix2::Identity(), FilterConfig{});
    EXPECT_EQ(m.C_II, Matrix2::Zero());
    EXPECT_EQ(m.cross_btheta, Eigen::RowVector3d::Zero());
}

TEST(OrientationMoments, AxisAlignedExample)
{
    DecoupledEstimate snap;
    snap.axis.mean = Vector2(2, 1);
    snap.orient = {0.0, 0.0};
    FilterConfig cfg;
    cfg.c = 0.25;
    const OrientationMoments m = orientation_moments(snap, Matrix2::Zero(), cfg);
    EXPECT_LT((m.S - Matrix2(Vector2(2, 1).asDiagonal())).norm(), 1e-15);
    EXPECT_LT((m.C_s - Matrix2(Vector2(1, 0.25).asDiagonal())).norm(), 1e-15);
    EXPECT_LT((m.expected_b - Vector3(1, 0.25, 0)).norm(), 1e-15);
    // source covariance c R diag(l^2) R^T
    EXPECT_LT((m.C_I - cfg.c * shape_matrix(0.0, snap.axis.mean)).norm(), 1e-15);
}

TEST(OrientationMoments, SourceCovarianceMatchesShapeMatrix)
{
    testing::Gen g(25);
    for (int i = 0; i < 200; ++i) {
        const DecoupledEstimate snap = testing::random_estimate(g);
        const OrientationMoments m = orientation_moments(snap, Matrix2::Zero(), FilterConfig{});
        EXPECT_LT((m.C_I - 0.25 * shape_matrix(snap.orient.mean, snap.axis.mean)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(OrientationMoments, JacobiansAreDerivativesOfS)
{
    testing::Gen g(26);
    for (int i = 0; i < 100; ++i) {
        const DecoupledEstimate snap = testing::random_estimate(g);
        const OrientationMoments m = orientation_moments(snap, Matrix2::Zero(), FilterConfig{});
        const double h = 1e-6;
        const Matrix2 dS = (rot(snap.orient.mean + h) - rot(snap.orient.mean - h)) / (2 * h) *
                           Matrix2(snap.axis.mean.asDiagonal());
        EXPECT_LT((dS.row(0).transpose() - m.J1).norm(), 1e-8);
        EXPECT_LT((dS.row(1).transpose() - m.J2).norm(), 1e-8);
    }
}

TEST(OrientationMoments, PseudoCovarianceIsSymmetric)
{
    testing::Gen g(27);
    for (int i = 0; i < 1000; ++i) {
        const DecoupledEstimate snap = testing::random_estimate(g);
        const FilterConfig cfg = testing::random_config(g);
        const OrientationMoments m = orientation_moments(snap, cfg.R, cfg);
        EXPECT_LT((m.cov_bb - m.cov_bb.transpose()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_TRUE(is_symmetric_psd<2>(Matrix2(0.5 * (m.C_s + m.C_s.transpose())), 1e-12, -1e-10));
    }
}

TEST(OrientationMoments, SecondMomentsMatchGaussianFormula)
{
    // for s ~ N(0, C): E[s1^2] = C11, Var[s1^2] = 2 C11^2, Cov[s1^2, s1 s2] = 2 C11 C12, Var[s1 s2] = C11 C22 + C12^2
    testing::Gen g(28);
    const DecoupledEstimate snap = testing::random_estimate(g);
    const FilterConfig cfg = testing::random_config(g);
    const OrientationMoments m = orientation_moments(snap, cfg.R, cfg);
    const Matrix2& c = m.C_s;
    Matrix3 expected;
    expected << 2 * c(0, 0) * c(0, 0), 2 * c(0, 1) * c(0, 1), 2 * c(0, 0) * c(0, 1),
        2 * c(0, 1) * c(0, 1), 2 * c(1, 1) * c(1, 1), 2 * c(1, 1) * c(0, 1),
        2 * c(0, 0) * c(0, 1), 2 * c(1, 1) * c(0, 1), c(0, 0) * c(1, 1) + c(0, 1) * c(0, 1);
    EXPECT_LT((m.cov_bb - expected).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((m.expected_b - Vector3(c(0, 0), c(1, 1), c(0, 1))).norm(), 1e-12);
}

TEST(UpdateOrientation, ZeroInnovationAndCertainPrior)
{
    testing::Gen g(29);
    const DecoupledEstimate snap = testing::random_estimate(g);
    const FilterConfig cfg = testing::random_config(g);
    const OrientationMoments m = orientation_moments(snap, cfg.R, cfg);
    const OrientationState same = update_orientation(snap.orient, m.expected_b, m);
    EXPECT_NEAR(same.mean, snap.orient.mean, 1e-15);

    DecoupledEstimate certain = snap;
    certain.orient.var = 0.0;
    const OrientationMoments mc = orientation_moments(certain, cfg.R, cfg);
    const OrientationState out = update_orientation(certain.orient, Vector3(5, -3, 2), mc);
    EXPECT_EQ(out.mean, certain.orient.mean);
    EXPECT_EQ(out.var, 0.0);
}

TEST(UpdateOrientation, VarianceStaysWithinPrior)
{
    testing::Gen g(30);
    for (int i = 0; i < 1000; ++i) {
        const DecoupledEstimate snap = testing::random_estimate(g);
        const FilterConfig cfg = testing::random_config(g);
        const OrientationMoments m = orientation_moments(snap, cfg.R, cfg);
        const Vector2 s(testing::normal(g) * 3, testing::normal(g) * 3);
        const OrientationState out = update_orientation(snap.orient, orientation_pseudo(s), m);
        EXPECT_GE(out.var, 0.0);
        EXPECT_LE(out.var, snap.orient.var);
        EXPECT_GT(out.mean, -kPi);
        EXPECT_LE(out.mean, kPi);
    }
}

TEST(StepSequential, EmptySetIsPredictOnly)
{
    testing::Gen g(31);
    const DecoupledEstimate est = testing::random_estimate(g);
    const MotionModel m = MotionModel::constant_velocity(1.0, Vector4::Constant(0.5), Vector2::Zero(), 0.1);
    Diagnostics diag;
    EXPECT_TRUE(identical(step_sequential(est, MeasurementSet{}, m, FilterConfig{}, &diag), predict(est, m)));
    EXPECT_EQ(diag.predict_only_steps, 1u);
}

TEST(StepSequential, UpdateOrderDoesNotMatter)
{
    testing::Gen g(32);
    for (int trial = 0; trial < 50; ++trial) {
        const DecoupledEstimate pred = testing::random_estimate(g);
        const FilterConfig cfg = testing::random_config(g);
        const MeasurementSet z = random_points(g, pred, 1 + static_cast<int>(g() % 15));
        UpdateOrder order = kDefaultOrder;
        std::sort(order.begin(), order.end());
        const DecoupledEstimate reference = update_sequential(pred, z, cfg, nullptr, order);
        int permutations = 0;
        do {
            EXPECT_TRUE(identical(update_sequential(pred, z, cfg, nullptr, order), reference));
            ++permutations;
        } while (std::next_permutation(order.begin(), order.end()));
        EXPECT_EQ(permutations, 6);
    }
}

TEST(StepSequential, SingleMeasurementMatchesBatchDelegation)
{
    testing::Gen g(33);
    const MotionModel m = MotionModel::constant_velocity(1.0, Vector4(1, 1, 2, 2), Vector2::Zero(), 0.1);
    for (int trial = 0; trial < 100; ++trial) {
        const DecoupledEstimate est = testing::random_estimate(g);
        FilterConfig cfg = testing::random_config(g);
        cfg.psi = 0.4;
        const MeasurementSet z = random_points(g, est, 1);
        EXPECT_TRUE(identical(step_sequential(est, z, m, cfg), step_batch(est, z, m, cfg)));
    }
}

TEST(StepSequential, CovarianceTracesNeverGrowAcrossUpdate)
{
    testing::Gen g(34);
    for (int trial = 0; trial < 200; ++trial) {
        const DecoupledEstimate pred = testing::random_estimate(g);
        const FilterConfig cfg = testing::random_config(g);
        const MeasurementSet z = random_points(g, pred, 1 + static_cast<int>(g() % 20));
        const DecoupledEstimate out = update_sequential(pred, z, cfg);
        EXPECT_LE(out.kin.cov.trace(), pred.kin.cov.trace() + 1e-12);
        EXPECT_LE(out.axis.cov.trace(), pred.axis.cov.trace() + 1e-12);
        EXPECT_LE(out.orient.var, pred.orient.var);
        EXPECT_TRUE(is_symmetric_psd<4>(out.kin.cov));
        EXPECT_TRUE(is_symmetric_psd<2>(out.axis.cov));
    }
}

TEST(StepSequential, OrientationVarianceMonotoneForStaticOrientation)
{
    testing::Gen g(35);
    Rng rng(35);
    const ExtentTruth truth{Vector2(0, 0), 0.6, Vector2(5, 2)};
    Matrix2 R;
    R = rot(kPi / 4) * Vector2(1.5, 2.0 / 3.0).asDiagonal() * rot(kPi / 4).transpose();
    FilterConfig cfg;
    cfg.R = R;
    const MotionModel m = MotionModel::constant_velocity(1.0, Vector4(0.01, 0.01, 0, 0), Vector2::Zero(), 0.0);
    DecoupledEstimate est;
    est.kin.cov = Vector4(2, 2, 0.01, 0.01).asDiagonal();
    est.axis.mean = Vector2(5, 2);
    est.axis.cov = Matrix2::Identity();
    est.orient = {0.4, 0.1};
    double previous = est.orient.var;
    for (int k = 0; k < 200; ++k) {
        const MeasurementSet z = sample_measurements(truth, 12.0, R, SourceDistribution::UniformEllipse, rng);
        est = step_sequential(est, z, m, cfg);
        EXPECT_LE(est.orient.var, previous) << "step " << k;
        previous = est.orient.var;
    }
    EXPECT_LT(std::abs(wrap_angle(est.orient.mean - truth.theta)), 0.15);
}

}  // namespace
}  // namespace memqkf
