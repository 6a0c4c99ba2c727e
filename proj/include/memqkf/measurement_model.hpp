#pragma once

#include "memqkf/state.hpp"

#include <random>
#include <vector>

namespace memqkf {

/// The point cloud observed at one time step. May be empty.
struct MeasurementSet {
    std::vector<Vector2> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

enum class SourceDistribution { UniformEllipse, UniformRectangle };

/// Variance of the multiplicative factor that moment-matches the source distribution.
double scaling_factor(SourceDistribution dist);

/// True object used by the generator: center, orientation and semi-axes.
struct ExtentTruth {
    Vector2 center = Vector2::Zero();
    double theta = 0.0;
    Vector2 axes = Vector2::Ones();
};

/// Random stream shared by all samplers in one Monte-Carlo run.
using Rng = std::mt19937_64;

/// Draws a Poisson(lambda) number of noisy points uniformly distributed on the true extent.
MeasurementSet sample_measurements(const ExtentTruth& truth, double lambda, const Matrix2& R, SourceDistribution dist,
                                   Rng& rng);

/// Draws exactly `count` noisy points uniformly distributed on the true extent.
MeasurementSet sample_points(const ExtentTruth& truth, std::size_t count, const Matrix2& R, SourceDistribution dist,
                             Rng& rng);

/// Draws a single noise-free source uniformly on the extent.
Vector2 sample_source(const ExtentTruth& truth, SourceDistribution dist, Rng& rng);

/// Draws from N(0, cov) for a 2x2 PSD covariance.
Vector2 sample_gaussian(const Matrix2& cov, Rng& rng);

enum class CenteringMode {
    Batch,   // relative to the measurement mean
    Stream,  // single point, relative to the predicted center
};

struct CenteredMeasurements {
    std::vector<Vector2> s;
    Matrix2 W = Matrix2::Zero();
    CenteringMode mode = CenteringMode::Batch;
    Vector2 mean = Vector2::Zero();  // z-bar for Batch, predicted center for Stream
};

/// Zero-centers the measurements. With more than one point the predicted state is never read.
CenteredMeasurements center_measurements(const MeasurementSet& z, const KinematicState& predicted_kin,
                                         const Matrix2& R);

struct PseudoMeasurements {
    std::vector<Vector2> a;  // (s1^2, s2^2)
    std::vector<Vector3> b;  // (s1^2, s2^2, s1*s2)
};

Vector2 axis_pseudo(const Vector2& s);
Vector3 orientation_pseudo(const Vector2& s);

PseudoMeasurements build_pseudo(const CenteredMeasurements& centered);

}  // namespace memqkf
