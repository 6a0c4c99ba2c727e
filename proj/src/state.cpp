#include "memqkf/state.hpp"

#include <cmath>
#include <numbers>

namespace memqkf {

MotionModel MotionModel::constant_velocity(double dt, const Vector4& kin_noise_var, const Vector2& axis_noise_var,
                                           double theta_noise_var)
{
    MotionModel model;
    model.F_kin = Matrix4::Identity();
    model.F_kin(0, 2) = dt;
    model.F_kin(1, 3) = dt;
    model.Q_kin = kin_noise_var.asDiagonal();
    model.Q_axis = axis_noise_var.asDiagonal();
    model.Q_theta = theta_noise_var;
    return model;
}

Matrix24 center_selection()
{
    Matrix24 h = Matrix24::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

Matrix2 rot(double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Matrix2 r;
    r << c, -s, s, c;
    return r;
}

Matrix2 shape_matrix(double theta, const Vector2& axes)
{
    const Matrix2 r = rot(theta);
    const Vector2 squared = axes.cwiseAbs2();
    Matrix2 x = r * squared.asDiagonal() * r.transpose();
    return 0.5 * (x + x.transpose());
}

AxisState clamp_axis_variance(const AxisState& axis, double psi)
{
    AxisState out = axis;
    Vector2 scale = Vector2::Ones();
    for (int j = 0; j < 2; ++j) {
        const double bound = (psi * axis.mean(j)) * (psi * axis.mean(j));
        if (axis.cov(j, j) > bound) {
            out.cov(j, j) = bound;
            scale(j) = std::sqrt(bound / axis.cov(j, j));
        }
    }
    // keeps the correlation coefficient
    out.cov(0, 1) = axis.cov(0, 1) * scale(0) * scale(1);
    out.cov(1, 0) = out.cov(0, 1);
    return out;
}

double wrap_angle(double theta)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::remainder(theta, two_pi);  // [-pi, pi]
    if (wrapped <= -std::numbers::pi) {
        wrapped += two_pi;
    }
    return wrapped;
}

}  // namespace memqkf
