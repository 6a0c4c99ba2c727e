#pragma once

#include "memqkf/measurement_model.hpp"
#include "memqkf/state.hpp"

#include <array>
#include <cstddef>

namespace memqkf {

/// Expected axis pseudo-measurement and its second moments, evaluated at one snapshot.
struct AxisMoments {
    Vector2 expected_a = Vector2::Zero();
    Matrix2 cov_aa = Matrix2::Zero();
    Matrix2 cross_ap = Matrix2::Zero();  // diagonal
    Matrix2 W_theta = Matrix2::Zero();   // W rotated into the object frame
};

/// Moments of the orientation pseudo-measurement (s1^2, s2^2, s1*s2) and the linearization internals.
struct OrientationMoments {
    Vector3 expected_b = Vector3::Zero();
    Matrix3 cov_bb = Matrix3::Zero();
    Eigen::RowVector3d cross_btheta = Eigen::RowVector3d::Zero();

    Matrix2 S = Matrix2::Zero();
    Vector2 J1 = Vector2::Zero();
    Vector2 J2 = Vector2::Zero();
    Matrix2 C_h = Matrix2::Zero();
    Matrix2 C_I = Matrix2::Zero();
    Matrix2 C_II = Matrix2::Zero();
    Matrix2 C_s = Matrix2::Zero();
    Vector3 M = Vector3::Zero();
};

/// Selection matrices mapping vec(C) (column-stacked) to the pseudo-measurement layout.
Eigen::Matrix<double, 3, 4> pseudo_selection();
Eigen::Matrix<double, 3, 4> pseudo_selection_transposed();

/// Column-stacking vec() of a 2x2 matrix.
Vector4 vec(const Matrix2& m);

/// Counts of component updates skipped because a covariance could not be inverted.
struct Diagnostics {
    std::size_t skipped_kinematic = 0;
    std::size_t skipped_axis = 0;
    std::size_t skipped_orientation = 0;
    std::size_t predict_only_steps = 0;

    Diagnostics& operator+=(const Diagnostics& other);
    std::size_t total_skipped() const { return skipped_kinematic + skipped_axis + skipped_orientation; }
};

enum class Component { Kinematics, Axis, Orientation };

using UpdateOrder = std::array<Component, 3>;
inline constexpr UpdateOrder kDefaultOrder{Component::Kinematics, Component::Axis, Component::Orientation};

DecoupledEstimate predict(const DecoupledEstimate& est, const MotionModel& motion);

/// Kalman update of the kinematics with a single point and the extent-inflated noise R + c X.
KinematicState update_kinematics(const KinematicState& kin, const Vector2& z, const Matrix2& shape_est,
                                 const FilterConfig& cfg);

AxisMoments axis_moments(const DecoupledEstimate& snapshot, const Matrix2& W, const FilterConfig& cfg);

/// `a` is the squared centered point expressed in the object frame of the snapshot,
/// i.e. axis_pseudo(rot(-theta) * s), matching the frame of AxisMoments.
AxisState update_axis(const AxisState& axis, const Vector2& a, const AxisMoments& mom);

OrientationMoments orientation_moments(const DecoupledEstimate& snapshot, const Matrix2& W, const FilterConfig& cfg);

OrientationState update_orientation(const OrientationState& orient, const Vector3& b, const OrientationMoments& mom);

/// Interleaved per-point update of an already predicted estimate. Every component update for
/// point i reads only the estimate obtained after point i-1, so `order` does not affect the result.
DecoupledEstimate update_sequential(const DecoupledEstimate& predicted, const MeasurementSet& z,
                                    const FilterConfig& cfg, Diagnostics* diag = nullptr,
                                    const UpdateOrder& order = kDefaultOrder);

/// One full time step: predict, then the interleaved update. An empty set yields the prediction.
DecoupledEstimate step_sequential(const DecoupledEstimate& est, const MeasurementSet& z, const MotionModel& motion,
                                  const FilterConfig& cfg, Diagnostics* diag = nullptr);

}  // namespace memqkf
