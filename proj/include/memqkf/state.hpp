#pragma once

#include <Eigen/Dense>

#include <optional>

namespace memqkf {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Matrix2 = Eigen::Matrix2d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Matrix24 = Eigen::Matrix<double, 2, 4>;

/// Center position and velocity: (m1, m2, dm1, dm2).
struct KinematicState {
    Vector4 mean = Vector4::Zero();
    Matrix4 cov = Matrix4::Zero();

    Vector2 center() const { return mean.head<2>(); }
};

/// Semi-axis lengths (l1, l2).
struct AxisState {
    Vector2 mean = Vector2::Ones();
    Matrix2 cov = Matrix2::Zero();
};

struct OrientationState {
    double mean = 0.0;  // wrapped to (-pi, pi]
    double var = 0.0;
};

/// Kinematics, semi-axes and orientation as three independent Gaussians.
/// No cross-covariance between the components is ever stored.
struct DecoupledEstimate {
    KinematicState kin;
    AxisState axis;
    OrientationState orient;
};

/// Linear motion model for all three components. The axis transition is fixed to identity.
struct MotionModel {
    Matrix4 F_kin = Matrix4::Identity();
    Matrix4 Q_kin = Matrix4::Zero();
    Matrix2 Q_axis = Matrix2::Zero();
    double Q_theta = 0.0;

    /// Constant-velocity model with sampling period `dt` and diagonal noise variances.
    static MotionModel constant_velocity(double dt, const Vector4& kin_noise_var, const Vector2& axis_noise_var,
                                         double theta_noise_var);
};

struct FilterConfig {
    Matrix2 R = Matrix2::Identity();
    double c = 0.25;
    std::optional<double> psi;
};

/// Selects the object center from the kinematic state.
Matrix24 center_selection();

Matrix2 rot(double theta);

/// R(theta) * diag(l1^2, l2^2) * R(theta)^T.
Matrix2 shape_matrix(double theta, const Vector2& axes);

AxisState clamp_axis_variance(const AxisState& axis, double psi);

double wrap_angle(double theta);

/// Symmetrizes and floors negative eigenvalues at zero.
template <int N>
Eigen::Matrix<double, N, N> symmetrize_psd(const Eigen::Matrix<double, N, N>& m)
{
    using Mat = Eigen::Matrix<double, N, N>;
    Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.eigenvalues().minCoeff() >= 0.0) {
        return sym;
    }
    const Eigen::Matrix<double, N, 1> values = eig.eigenvalues().cwiseMax(0.0);
    Mat repaired = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (repaired + repaired.transpose());
}

/// Checks the covariance invariant shared by all state types.
template <int N>
bool is_symmetric_psd(const Eigen::Matrix<double, N, N>& m, double sym_tol = 1e-12, double eig_tol = -1e-10)
{
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(m);
    return eig.eigenvalues().minCoeff() >= eig_tol;
}

/// Smallest semi-axis length any update may return.
inline constexpr double kMinAxisLength = 1e-3;

/// Condition number above which a covariance is treated as singular.
inline constexpr double kMaxConditionNumber = 1e12;

}  // namespace memqkf
