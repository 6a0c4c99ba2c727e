#pragma once

#include "memqkf/measurement_model.hpp"
#include "memqkf/sequential.hpp"
#include "memqkf/state.hpp"

#include <Eigen/Dense>

namespace memqkf {

/// All axis pseudo-measurements of one step, interleaved as (s1_1^2, s1_2^2, s2_1^2, ...).
/// Points are expressed in the object frame given by `theta` before squaring.
struct StackedAxisPseudo {
    Eigen::VectorXd a_tilde;
};

StackedAxisPseudo stack_axis_pseudo(const CenteredMeasurements& centered, double theta);

/// Moments of the stacked axis pseudo-measurement. Every point shares the same 2x2 block,
/// evaluated at the prediction, so only that block is inverted.
struct BatchAxisMoments {
    Eigen::VectorXd expected_a_tilde;
    Vector2 rho = Vector2::Zero();
    Vector2 zeta = Vector2::Zero();
    Matrix2 per_block_cov = Matrix2::Zero();
    Matrix2 per_block_inv = Matrix2::Zero();
};

BatchAxisMoments batch_axis_moments(const AxisState& axis_pred, const OrientationState& orient_pred,
                                    const Matrix2& W, std::size_t count, const FilterConfig& cfg);

/// Intermediates of the information-form orientation update.
struct BatchOrientationInfo {
    double xi_prior = 0.0;
    Matrix3 Gamma_t = Matrix3::Zero();
    Vector3 Xi = Vector3::Zero();
    Vector3 M = Vector3::Zero();
    double posterior_mean = 0.0;
    double posterior_var = 0.0;
};

/// Kalman update with the measurement mean and noise (R + c X) / M.
KinematicState batch_update_kinematics(const KinematicState& kin, const MeasurementSet& z, const Matrix2& shape_est,
                                       const FilterConfig& cfg);

/// Stacked axis update in reduced (summation) form, followed by the psi clamp when configured.
AxisState batch_update_axis(const AxisState& axis_pred, const CenteredMeasurements& centered,
                            const OrientationState& orient_pred, const FilterConfig& cfg);

BatchOrientationInfo batch_orientation_info(const OrientationState& orient_pred, const CenteredMeasurements& centered,
                                            const DecoupledEstimate& snapshot, const FilterConfig& cfg);

OrientationState batch_update_orientation(const OrientationState& orient_pred, const CenteredMeasurements& centered,
                                          const DecoupledEstimate& snapshot, const FilterConfig& cfg);

/// Batch update of an already predicted estimate. A single point is handed to the sequential update.
DecoupledEstimate update_batch(const DecoupledEstimate& predicted, const MeasurementSet& z, const FilterConfig& cfg,
                               Diagnostics* diag = nullptr, const UpdateOrder& order = kDefaultOrder);

DecoupledEstimate step_batch(const DecoupledEstimate& est, const MeasurementSet& z, const MotionModel& motion,
                             const FilterConfig& cfg, Diagnostics* diag = nullptr);

}  // namespace memqkf
