#include "memqkf/batch.hpp"

#include "memqkf/errors.hpp"
#include "memqkf/linalg.hpp"

#include <algorithm>

namespace memqkf {

StackedAxisPseudo stack_axis_pseudo(const CenteredMeasurements& centered, double theta)
{
    const Matrix2 back = rot(-theta);
    StackedAxisPseudo out;
    out.a_tilde.resize(2 * static_cast<Eigen::Index>(centered.s.size()));
    for (std::size_t i = 0; i < centered.s.size(); ++i) {
        out.a_tilde.segment<2>(2 * static_cast<Eigen::Index>(i)) = axis_pseudo(back * centered.s[i]);
    }
    return out;
}

BatchAxisMoments batch_axis_moments(const AxisState& axis_pred, const OrientationState& orient_pred,
                                    const Matrix2& W, std::size_t count, const FilterConfig& cfg)
{
    DecoupledEstimate snapshot;
    snapshot.axis = axis_pred;
    snapshot.orient = orient_pred;
    const AxisMoments block = axis_moments(snapshot, W, cfg);

    BatchAxisMoments out;
    out.rho = block.expected_a;
    out.zeta = block.cross_ap.diagonal();
    out.per_block_cov = block.cov_aa;
    out.per_block_inv = detail::guarded_inverse<SingularPseudoCov, 2>(block.cov_aa, "stacked axis block");
    out.expected_a_tilde = out.rho.replicate(static_cast<Eigen::Index>(count), 1);
    return out;
}

KinematicState batch_update_kinematics(const KinematicState& kin, const MeasurementSet& z, const Matrix2& shape_est,
                                       const FilterConfig& cfg)
{
    if (z.empty()) {
        throw EmptyMeasurementSet();
    }
    Vector2 mean = Vector2::Zero();
    for (const auto& p : z.points) {
        mean += p;
    }
    const double count = static_cast<double>(z.size());
    mean /= count;

    const Matrix24 h = center_selection();
    const Matrix2 noise = (cfg.R + cfg.c * shape_est) / count;
    const Matrix2 innovation_cov = h * kin.cov * h.transpose() + noise;
    const Matrix2 inv = detail::guarded_inverse<SingularInnovation, 2>(innovation_cov, "batch kinematic innovation");
    const Eigen::Matrix<double, 4, 2> gain = kin.cov * h.transpose() * inv;

    KinematicState out;
    out.mean = kin.mean + gain * (mean - h * kin.mean);
    out.cov = symmetrize_psd<4>(kin.cov - gain * h * kin.cov);
    return out;
}

AxisState batch_update_axis(const AxisState& axis_pred, const CenteredMeasurements& centered,
                            const OrientationState& orient_pred, const FilterConfig& cfg)
{
    if (centered.s.empty()) {
        throw EmptyMeasurementSet();
    }
    const std::size_t count = centered.s.size();
    const BatchAxisMoments mom = batch_axis_moments(axis_pred, orient_pred, centered.W, count, cfg);

    // block-diagonal inverse collapses the stacked product to a sum over points
    const Matrix2 back = rot(-orient_pred.mean);
    Vector2 innovation_sum = Vector2::Zero();
    for (const auto& s : centered.s) {
        innovation_sum += axis_pseudo(back * s) - mom.rho;
    }
    const Matrix2 cross = mom.zeta.asDiagonal();
    const Matrix2 gain = cross * mom.per_block_inv;

    AxisState out;
    out.mean = (axis_pred.mean + gain * innovation_sum).cwiseMax(kMinAxisLength);
    out.cov = symmetrize_psd<2>(axis_pred.cov - static_cast<double>(count) * gain * cross.transpose());
    if (cfg.psi) {
        out = clamp_axis_variance(out, *cfg.psi);
    }
    return out;
}

BatchOrientationInfo batch_orientation_info(const OrientationState& orient_pred, const CenteredMeasurements& centered,
                                            const DecoupledEstimate& snapshot, const FilterConfig& cfg)
{
    if (centered.s.empty()) {
        throw EmptyMeasurementSet();
    }
    if (!(orient_pred.var > 0.0)) {
        throw DegenerateInformation();
    }
    const OrientationMoments mom = orientation_moments(snapshot, centered.W, cfg);

    BatchOrientationInfo info;
    info.M = mom.M;
    info.xi_prior = orient_pred.mean / orient_pred.var;
    const Matrix3 gamma = mom.cov_bb - mom.M * orient_pred.var * mom.M.transpose();
    info.Gamma_t = 0.5 * (gamma + gamma.transpose());
    const Matrix3 gamma_inv = detail::guarded_inverse<SingularPseudoCov, 3>(info.Gamma_t, "orientation information");

    const Vector3 offset = mom.M * orient_pred.mean - mom.expected_b;
    for (const auto& s : centered.s) {
        info.Xi += orientation_pseudo(s) + offset;
    }

    const Eigen::RowVector3d projected = mom.M.transpose() * gamma_inv;
    // an indefinite Gamma_t could otherwise report negative information
    const double information = std::max(0.0, static_cast<double>(centered.s.size()) * projected.dot(mom.M));
    info.posterior_var = 1.0 / (1.0 / orient_pred.var + information);
    info.posterior_mean = info.posterior_var * (info.xi_prior + projected.dot(info.Xi));
    return info;
}

OrientationState batch_update_orientation(const OrientationState& orient_pred, const CenteredMeasurements& centered,
                                          const DecoupledEstimate& snapshot, const FilterConfig& cfg)
{
    const BatchOrientationInfo info = batch_orientation_info(orient_pred, centered, snapshot, cfg);
    OrientationState out;
    out.mean = wrap_angle(info.posterior_mean);
    out.var = std::min(info.posterior_var, orient_pred.var);
    return out;
}

DecoupledEstimate update_batch(const DecoupledEstimate& predicted, const MeasurementSet& z, const FilterConfig& cfg,
                               Diagnostics* diag, const UpdateOrder& order)
{
    if (z.size() <= 1) {
        return update_sequential(predicted, z, cfg, diag);
    }

    const CenteredMeasurements centered = center_measurements(z, predicted.kin, cfg.R);
    DecoupledEstimate out = predicted;
    for (const Component component : order) {
        switch (component) {
        case Component::Kinematics:
            try {
                const Matrix2 shape = shape_matrix(predicted.orient.mean, predicted.axis.mean);
                out.kin = batch_update_kinematics(predicted.kin, z, shape, cfg);
            } catch (const SingularInnovation&) {
                if (diag) {
                    ++diag->skipped_kinematic;
                }
            }
            break;
        case Component::Axis:
            try {
                out.axis = batch_update_axis(predicted.axis, centered, predicted.orient, cfg);
            } catch (const SingularPseudoCov&) {
                if (diag) {
                    ++diag->skipped_axis;
                }
            }
            break;
        case Component::Orientation:
            try {
                out.orient = batch_update_orientation(predicted.orient, centered, predicted, cfg);
            } catch (const SingularPseudoCov&) {
                if (diag) {
                    ++diag->skipped_orientation;
                }
            } catch (const DegenerateInformation&) {
                if (diag) {
                    ++diag->skipped_orientation;
                }
            }
            break;
        }
    }
    return out;
}

DecoupledEstimate step_batch(const DecoupledEstimate& est, const MeasurementSet& z, const MotionModel& motion,
                             const FilterConfig& cfg, Diagnostics* diag)
{
    return update_batch(predict(est, motion), z, cfg, diag);
}

}  // namespace memqkf
