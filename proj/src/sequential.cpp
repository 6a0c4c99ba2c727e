#include "memqkf/sequential.hpp"

#include "memqkf/errors.hpp"
#include "memqkf/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace memqkf {

Eigen::Matrix<double, 3, 4> pseudo_selection()
{
    Eigen::Matrix<double, 3, 4> v = Eigen::Matrix<double, 3, 4>::Zero();
    v(0, 0) = 1.0;
    v(1, 3) = 1.0;
    v(2, 1) = 1.0;
    return v;
}

Eigen::Matrix<double, 3, 4> pseudo_selection_transposed()
{
    Eigen::Matrix<double, 3, 4> v = Eigen::Matrix<double, 3, 4>::Zero();
    v(0, 0) = 1.0;
    v(1, 3) = 1.0;
    v(2, 2) = 1.0;
    return v;
}

Vector4 vec(const Matrix2& m)
{
    return {m(0, 0), m(1, 0), m(0, 1), m(1, 1)};
}

Diagnostics& Diagnostics::operator+=(const Diagnostics& other)
{
    skipped_kinematic += other.skipped_kinematic;
    skipped_axis += other.skipped_axis;
    skipped_orientation += other.skipped_orientation;
    predict_only_steps += other.predict_only_steps;
    return *this;
}

DecoupledEstimate predict(const DecoupledEstimate& est, const MotionModel& motion)
{
    DecoupledEstimate out;
    out.kin.mean = motion.F_kin * est.kin.mean;
    out.kin.cov = symmetrize_psd<4>(motion.F_kin * est.kin.cov * motion.F_kin.transpose() + motion.Q_kin);
    out.axis.mean = est.axis.mean;
    out.axis.cov = symmetrize_psd<2>(est.axis.cov + motion.Q_axis);
    out.orient.mean = wrap_angle(est.orient.mean);
    out.orient.var = est.orient.var + motion.Q_theta;
    return out;
}

KinematicState update_kinematics(const KinematicState& kin, const Vector2& z, const Matrix2& shape_est,
                                 const FilterConfig& cfg)
{
    const Matrix24 h = center_selection();
    const Matrix2 effective_noise = cfg.R + cfg.c * shape_est;
    const Matrix2 innovation_cov = h * kin.cov * h.transpose() + effective_noise;
    const Matrix2 inv = detail::guarded_inverse<SingularInnovation, 2>(innovation_cov, "kinematic innovation");
    const Eigen::Matrix<double, 4, 2> gain = kin.cov * h.transpose() * inv;

    KinematicState out;
    out.mean = kin.mean + gain * (z - h * kin.mean);
    out.cov = symmetrize_psd<4>(kin.cov - gain * h * kin.cov);
    return out;
}

AxisMoments axis_moments(const DecoupledEstimate& snapshot, const Matrix2& W, const FilterConfig& cfg)
{
    const Matrix2 back = rot(-snapshot.orient.mean);
    const Vector2& p = snapshot.axis.mean;
    const Matrix2& cp = snapshot.axis.cov;

    AxisMoments m;
    m.W_theta = back * W * back.transpose();
    for (int j = 0; j < 2; ++j) {
        m.expected_a(j) = m.W_theta(j, j) + cfg.c * (cp(j, j) + p(j) * p(j));
        m.cov_aa(j, j) = 2.0 * m.expected_a(j) * m.expected_a(j);
        m.cross_ap(j, j) = 2.0 * cfg.c * p(j) * cp(j, j);
    }
    m.cov_aa(0, 1) = 2.0 * m.W_theta(0, 1) * m.W_theta(0, 1);
    m.cov_aa(1, 0) = 2.0 * m.W_theta(1, 0) * m.W_theta(1, 0);
    return m;
}

AxisState update_axis(const AxisState& axis, const Vector2& a, const AxisMoments& mom)
{
    const Matrix2 inv = detail::guarded_inverse<SingularPseudoCov, 2>(mom.cov_aa, "axis pseudo-measurement");
    const Matrix2 gain = mom.cross_ap * inv;

    AxisState out;
    out.mean = (axis.mean + gain * (a - mom.expected_a)).cwiseMax(kMinAxisLength);
    out.cov = symmetrize_psd<2>(axis.cov - gain * mom.cross_ap.transpose());
    return out;
}

OrientationMoments orientation_moments(const DecoupledEstimate& snapshot, const Matrix2& W, const FilterConfig& cfg)
{
    const double theta = snapshot.orient.mean;
    const double var = snapshot.orient.var;
    const Vector2& l = snapshot.axis.mean;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);

    OrientationMoments m;
    m.C_h = cfg.c * Matrix2::Identity();
    m.S = rot(theta) * l.asDiagonal();
    m.J1 = {-l(0) * sin_t, -l(1) * cos_t};
    m.J2 = {l(0) * cos_t, -l(1) * sin_t};

    m.C_I = m.S * m.C_h * m.S.transpose();
    const std::array<const Vector2*, 2> jac{&m.J1, &m.J2};
    for (int r = 0; r < 2; ++r) {
        for (int col = 0; col < 2; ++col) {
            m.C_II(r, col) = var * jac[col]->dot(m.C_h * *jac[r]);
        }
    }
    m.C_s = W + m.C_I + m.C_II;

    const Eigen::RowVector2d s1 = m.S.row(0);
    const Eigen::RowVector2d s2 = m.S.row(1);
    m.M(0) = 2.0 * (s1 * m.C_h * m.J1).value();
    m.M(1) = 2.0 * (s2 * m.C_h * m.J2).value();
    m.M(2) = (s1 * m.C_h * m.J2).value() + (s2 * m.C_h * m.J1).value();

    const Eigen::Matrix<double, 3, 4> v = pseudo_selection();
    const Eigen::Matrix<double, 3, 4> v_sum = v + pseudo_selection_transposed();
    Matrix4 kron;
    for (int r = 0; r < 2; ++r) {
        for (int col = 0; col < 2; ++col) {
            kron.block<2, 2>(2 * r, 2 * col) = m.C_s(r, col) * m.C_s;
        }
    }
    m.expected_b = v * vec(m.C_s);
    const Matrix3 cov_bb = v * kron * v_sum.transpose();
    m.cov_bb = 0.5 * (cov_bb + cov_bb.transpose());
    m.cross_btheta = var * m.M.transpose();
    return m;
}

OrientationState update_orientation(const OrientationState& orient, const Vector3& b, const OrientationMoments& mom)
{
    const Matrix3 inv = detail::guarded_inverse<SingularPseudoCov, 3>(mom.cov_bb, "orientation pseudo-measurement");
    const Eigen::RowVector3d gain = mom.cross_btheta * inv;

    OrientationState out;
    out.mean = wrap_angle(orient.mean + gain.dot(b - mom.expected_b));
    out.var = std::clamp(orient.var - gain.dot(mom.cross_btheta), 0.0, orient.var);
    return out;
}

DecoupledEstimate update_sequential(const DecoupledEstimate& predicted, const MeasurementSet& z,
                                    const FilterConfig& cfg, Diagnostics* diag, const UpdateOrder& order)
{
    if (z.empty()) {
        if (diag) {
            ++diag->predict_only_steps;
        }
        return predicted;
    }

    // W and the centered points are fixed for the whole time step
    const CenteredMeasurements centered = center_measurements(z, predicted.kin, cfg.R);

    DecoupledEstimate current = predicted;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const DecoupledEstimate snapshot = current;
        const Vector2& s = centered.s[i];
        for (const Component component : order) {
            switch (component) {
            case Component::Kinematics:
                try {
                    const Matrix2 shape = shape_matrix(snapshot.orient.mean, snapshot.axis.mean);
                    current.kin = update_kinematics(snapshot.kin, z.points[i], shape, cfg);
                } catch (const SingularInnovation&) {
                    if (diag) {
                        ++diag->skipped_kinematic;
                    }
                }
                break;
            case Component::Axis:
                try {
                    const Vector2 aligned = rot(-snapshot.orient.mean) * s;
                    current.axis = update_axis(snapshot.axis, axis_pseudo(aligned),
                                               axis_moments(snapshot, centered.W, cfg));
                } catch (const SingularPseudoCov&) {
                    if (diag) {
                        ++diag->skipped_axis;
                    }
                }
                break;
            case Component::Orientation:
                try {
                    current.orient = update_orientation(snapshot.orient, orientation_pseudo(s),
                                                        orientation_moments(snapshot, centered.W, cfg));
                } catch (const SingularPseudoCov&) {
                    if (diag) {
                        ++diag->skipped_orientation;
                    }
                }
                break;
            }
        }
    }
    return current;
}

DecoupledEstimate step_sequential(const DecoupledEstimate& est, const MeasurementSet& z, const MotionModel& motion,
                                  const FilterConfig& cfg, Diagnostics* diag)
{
    return update_sequential(predict(est, motion), z, cfg, diag);
}

}  // namespace memqkf
