#include "memqkf/metrics.hpp"

#include "memqkf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace memqkf {

EllipseParams ellipse_from_estimate(const DecoupledEstimate& est)
{
    return {est.kin.center(), est.orient.mean, est.axis.mean};
}

Matrix2 matrix_sqrt_2x2(const Matrix2& m)
{
    const Matrix2 sym = 0.5 * (m + m.transpose());
    const double trace = sym.trace();
    const double det = sym.determinant();
    const double disc = std::sqrt(std::max(0.0, 0.25 * trace * trace - det));
    if (0.5 * trace - disc < -1e-9) {
        throw NotPSD("matrix_sqrt_2x2: negative eigenvalue");
    }

    // closed form: sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
    const double root_det = std::sqrt(std::max(0.0, det));
    const double denom_sq = trace + 2.0 * root_det;
    if (denom_sq > 1e-12 * std::max(1.0, std::abs(trace))) {
        return (sym + root_det * Matrix2::Identity()) / std::sqrt(denom_sq);
    }

    Eigen::SelfAdjointEigenSolver<Matrix2> eig(sym);
    if (eig.eigenvalues().minCoeff() < -1e-9) {
        throw NotPSD("matrix_sqrt_2x2: negative eigenvalue");
    }
    const Vector2 roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double gwd_squared(const EllipseParams& a, const EllipseParams& b)
{
    const Matrix2 xa = shape_matrix(a.theta, a.semi_axes);
    const Matrix2 xb = shape_matrix(b.theta, b.semi_axes);
    const Matrix2 root_a = matrix_sqrt_2x2(xa);
    const Matrix2 cross = matrix_sqrt_2x2(root_a * xb * root_a);
    const double shape_term = (xa + xb - 2.0 * cross).trace();
    return (a.center - b.center).squaredNorm() + std::max(0.0, shape_term);
}

double orientation_error(double theta_est, double theta_true)
{
    const double d = std::remainder(theta_est - theta_true, std::numbers::pi);  // [-pi/2, pi/2]
    return std::abs(d);
}

ErrorRecord evaluate(const EllipseParams& estimate, const EllipseParams& truth)
{
    return {gwd_squared(estimate, truth), orientation_error(estimate.theta, truth.theta)};
}

}  // namespace memqkf
