#include "memqkf/measurement_model.hpp"

#include "memqkf/errors.hpp"

#include <cmath>
#include <numbers>

namespace memqkf {

namespace {

/// Square-root factor L with L L^T = cov, tolerant of singular covariances.
Matrix2 gaussian_factor(const Matrix2& cov)
{
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(0.5 * (cov + cov.transpose()));
    const Vector2 root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Vector2 standard_normal_pair(Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = normal(rng);
    const double y = normal(rng);
    return {x, y};
}

}  // namespace

double scaling_factor(SourceDistribution dist)
{
    switch (dist) {
    case SourceDistribution::UniformEllipse:
        return 0.25;
    case SourceDistribution::UniformRectangle:
        return 1.0 / 3.0;
    }
    return 0.25;
}

Vector2 sample_gaussian(const Matrix2& cov, Rng& rng)
{
    return gaussian_factor(cov) * standard_normal_pair(rng);
}

Vector2 sample_source(const ExtentTruth& truth, SourceDistribution dist, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector2 local;
    if (dist == SourceDistribution::UniformEllipse) {
        // area-correct sampling of the unit disc
        const double radius = std::sqrt(unit(rng));
        const double angle = 2.0 * std::numbers::pi * unit(rng);
        local = {radius * std::cos(angle), radius * std::sin(angle)};
    } else {
        const double u = unit(rng);
        const double v = unit(rng);
        local = {2.0 * u - 1.0, 2.0 * v - 1.0};
    }
    return truth.center + rot(truth.theta) * truth.axes.cwiseProduct(local);
}

MeasurementSet sample_measurements(const ExtentTruth& truth, double lambda, const Matrix2& R, SourceDistribution dist,
                                   Rng& rng)
{
    std::poisson_distribution<int> count_dist(lambda);
    const int count = count_dist(rng);
    return sample_points(truth, static_cast<std::size_t>(count), R, dist, rng);
}

MeasurementSet sample_points(const ExtentTruth& truth, std::size_t count, const Matrix2& R, SourceDistribution dist,
                             Rng& rng)
{
    const Matrix2 noise_factor = gaussian_factor(R);
    MeasurementSet out;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Vector2 source = sample_source(truth, dist, rng);
        out.points.push_back(source + noise_factor * standard_normal_pair(rng));
    }
    return out;
}

CenteredMeasurements center_measurements(const MeasurementSet& z, const KinematicState& predicted_kin,
                                         const Matrix2& R)
{
    if (z.empty()) {
        throw EmptyMeasurementSet();
    }
    CenteredMeasurements out;
    out.s.reserve(z.size());
    if (z.size() > 1) {
        Vector2 mean = Vector2::Zero();
        for (const auto& p : z.points) {
            mean += p;
        }
        mean /= static_cast<double>(z.size());
        for (const auto& p : z.points) {
            out.s.push_back(p - mean);
        }
        out.W = R;
        out.mode = CenteringMode::Batch;
        out.mean = mean;
        return out;
    }

    const Matrix24 h = center_selection();
    const Vector2 predicted_center = h * predicted_kin.mean;
    out.s.push_back(z.points.front() - predicted_center);
    out.W = R + h * predicted_kin.cov * h.transpose();
    out.W = 0.5 * (out.W + out.W.transpose());
    out.mode = CenteringMode::Stream;
    out.mean = predicted_center;
    return out;
}

Vector2 axis_pseudo(const Vector2& s)
{
    return {s(0) * s(0), s(1) * s(1)};
}

Vector3 orientation_pseudo(const Vector2& s)
{
    return {s(0) * s(0), s(1) * s(1), s(0) * s(1)};
}

PseudoMeasurements build_pseudo(const CenteredMeasurements& centered)
{
    PseudoMeasurements out;
    out.a.reserve(centered.s.size());
    out.b.reserve(centered.s.size());
    for (const auto& s : centered.s) {
        out.a.push_back(axis_pseudo(s));
        out.b.push_back(orientation_pseudo(s));
    }
    return out;
}

}  // namespace memqkf
