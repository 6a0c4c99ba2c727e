#pragma once

#include "memqkf/state.hpp"

namespace memqkf {

struct EllipseParams {
    Vector2 center = Vector2::Zero();
    double theta = 0.0;
    Vector2 semi_axes = Vector2::Ones();
};

EllipseParams ellipse_from_estimate(const DecoupledEstimate& est);

struct ErrorRecord {
    double gwd_sq = 0.0;     // m^2
    double orient_err = 0.0;  // rad, in [0, pi/2]
};

/// Principal square root of a symmetric PSD 2x2 matrix.
Matrix2 matrix_sqrt_2x2(const Matrix2& m);

/// Squared Gaussian Wasserstein distance between two ellipses viewed as Gaussians.
double gwd_squared(const EllipseParams& a, const EllipseParams& b);

/// Absolute orientation difference modulo pi.
double orientation_error(double theta_est, double theta_true);

ErrorRecord evaluate(const EllipseParams& estimate, const EllipseParams& truth);

}  // namespace memqkf
