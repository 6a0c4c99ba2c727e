#include "memqkf/simulation.hpp"

#include "memqkf/batch.hpp"
#include "memqkf/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

namespace memqkf {

namespace {

constexpr double kMinTrueAxis = 0.1;

template <int N>
Eigen::Matrix<double, N, 1> sample_normal(const Eigen::Matrix<double, N, 1>& mean, const Eigen::Matrix<double, N, N>& cov,
                                          Rng& rng)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(0.5 * (cov + cov.transpose()));
    const Eigen::Matrix<double, N, 1> root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix<double, N, 1> draw;
    for (int i = 0; i < N; ++i) {
        draw(i) = normal(rng);
    }
    return mean + eig.eigenvectors() * root.asDiagonal() * draw;
}

bool is_psd(const Matrix2& m)
{
    return is_symmetric_psd<2>(m, 1e-9, -1e-10);
}

bool is_psd(const Matrix4& m)
{
    return is_symmetric_psd<4>(m, 1e-9, -1e-10);
}

}  // namespace

int TrajectorySpec::total_steps() const
{
    int total = 0;
    for (const auto& segment : segments) {
        total += segment.steps;
    }
    return total;
}

std::vector<bool> TrajectorySpec::turn_mask() const
{
    std::vector<bool> mask;
    mask.reserve(static_cast<std::size_t>(total_steps()));
    for (const auto& segment : segments) {
        mask.insert(mask.end(), static_cast<std::size_t>(segment.steps), segment.turn_rate != 0.0);
    }
    return mask;
}

std::vector<TruthState> generate_truth(const TrajectorySpec& traj, Rng& rng)
{
    const bool follows_velocity = !traj.start_orientation.has_value();
    const bool noisy = !traj.process_noise.isZero(0.0);

    Vector4 x;
    x << traj.start_position, traj.nominal_speed * std::cos(traj.start_heading),
        traj.nominal_speed * std::sin(traj.start_heading);
    double theta = follows_velocity ? wrap_angle(traj.start_heading) : wrap_angle(*traj.start_orientation);

    std::vector<TruthState> out;
    out.reserve(static_cast<std::size_t>(traj.total_steps()));
    for (const auto& segment : traj.segments) {
        const Matrix2 turn = rot(segment.turn_rate);
        for (int step = 0; step < segment.steps; ++step) {
            x.tail<2>() = turn * x.tail<2>();
            x.head<2>() += traj.dt * x.tail<2>();
            if (noisy) {
                x = sample_normal<4>(x, traj.process_noise, rng);
            }
            if (follows_velocity && x.tail<2>().norm() > 1e-9) {
                theta = std::atan2(x(3), x(2));
            }
            out.push_back({x, theta, traj.true_axes});
        }
    }
    return out;
}

const char* to_string(FilterKind kind)
{
    return kind == FilterKind::Sequential ? "sequential" : "batch";
}

FilterKind filter_kind_from_string(const std::string& name)
{
    if (name == "sequential") {
        return FilterKind::Sequential;
    }
    if (name == "batch") {
        return FilterKind::Batch;
    }
    throw ConfigError("unknown filter '" + name + "' (expected sequential or batch)");
}

FilterConfig ScenarioConfig::filter_config() const
{
    return {R, scaling_factor(source_dist), psi};
}

void ScenarioConfig::validate() const
{
    if (runs < 1) {
        throw ConfigError("runs must be >= 1");
    }
    if (!(lambda > 0.0)) {
        throw ConfigError("lambda must be > 0");
    }
    if (fixed_count && *fixed_count < 0) {
        throw ConfigError("fixed_count must be >= 0");
    }
    if (!is_psd(R)) {
        throw ConfigError("R must be symmetric positive semi-definite");
    }
    if (psi && !(*psi > 0.0 && *psi <= 1.0)) {
        throw ConfigError("psi must lie in (0, 1]");
    }
    if (!is_psd(prior.kin.cov) || !is_psd(prior.axis.cov) || prior.orient.var < 0.0) {
        throw ConfigError("prior covariances must be symmetric positive semi-definite");
    }
    if ((prior.axis.mean.array() <= 0.0).any()) {
        throw ConfigError("prior semi-axes must be positive");
    }
    if (!is_psd(motion.Q_kin) || !is_psd(motion.Q_axis) || motion.Q_theta < 0.0) {
        throw ConfigError("process noise must be symmetric positive semi-definite");
    }
    if (trajectory.segments.empty()) {
        throw ConfigError("trajectory needs at least one segment");
    }
    for (const auto& segment : trajectory.segments) {
        if (segment.steps < 1) {
            throw ConfigError("trajectory segments need step_count >= 1");
        }
    }
    if ((trajectory.true_axes.array() <= 0.0).any()) {
        throw ConfigError("true axes must be positive");
    }
    if (!is_psd(trajectory.process_noise)) {
        throw ConfigError("trajectory process noise must be symmetric positive semi-definite");
    }
}

TrajectorySpec default_trajectory()
{
    const double turn = std::numbers::pi / 2.0 / 6.0;
    TrajectorySpec traj;
    // turns on steps 19-24, 39-44 and 59-64
    traj.segments = {{18, 0.0}, {6, turn}, {14, 0.0}, {6, turn}, {14, 0.0}, {6, -turn}, {16, 0.0}};
    traj.nominal_speed = 3.0;
    traj.start_position = Vector2::Zero();
    traj.start_heading = 0.0;
    traj.true_axes = {5.0, 2.0};
    traj.process_noise = Vector4(0.01, 0.01, 0.01, 0.01).asDiagonal();
    traj.dt = 1.0;
    return traj;
}

std::map<std::string, ScenarioConfig> builtin_scenarios()
{
    const Matrix2 diagonal_r = rot(std::numbers::pi / 4.0);
    const Matrix2 moderate_r = diagonal_r * Vector2(1.5, 2.0 / 3.0).asDiagonal() * diagonal_r.transpose();
    const Matrix2 noisy_r = diagonal_r * Vector2(3.0, 1.0).asDiagonal() * diagonal_r.transpose();

    ScenarioConfig moving;
    moving.lambda = 12.0;
    moving.R = moderate_r;
    moving.trajectory = default_trajectory();
    moving.prior.kin.mean << moving.trajectory.start_position, moving.trajectory.nominal_speed, 0.0;
    moving.prior.kin.cov = Vector4(2.0, 2.0, 0.5, 0.5).asDiagonal();
    moving.prior.axis.mean = {5.0, 2.0};
    moving.prior.axis.cov = Matrix2::Identity();
    moving.prior.orient.mean = moving.trajectory.start_heading;
    moving.prior.orient.var = 0.1;
    moving.motion = MotionModel::constant_velocity(1.0, {1.0, 1.0, 2.0, 2.0}, {0.0, 0.0}, 0.1);
    moving.runs = 500;
    moving.seed = 20240601;
    moving.source_dist = SourceDistribution::UniformEllipse;
    moving.psi = 0.4;

    ScenarioConfig moderate = moving;
    moderate.name = "moderate";

    ScenarioConfig noisy = moving;
    noisy.name = "noisy";
    noisy.R = noisy_r;

    ScenarioConfig sparse = moving;
    sparse.name = "sparse";
    sparse.lambda = 6.0;

    ScenarioConfig stationary;
    stationary.name = "stationary";
    stationary.lambda = 1.0;
    stationary.fixed_count = 1;
    stationary.R = Matrix2::Identity();
    stationary.trajectory.segments = {{200, 0.0}};
    stationary.trajectory.nominal_speed = 0.0;
    stationary.trajectory.start_orientation = 0.0;
    stationary.trajectory.true_axes = {4.0, 2.0};
    stationary.prior.kin.mean = Vector4::Zero();
    stationary.prior.kin.cov = Vector4(0.1, 0.1, 0.0, 0.0).asDiagonal();
    stationary.prior.axis.mean = {4.0, 2.0};
    stationary.prior.axis.cov = Vector2(4.0, 2.0).asDiagonal();
    stationary.prior.orient.mean = 0.0;
    stationary.prior.orient.var = std::numbers::pi;
    stationary.motion = MotionModel::constant_velocity(1.0, Vector4::Zero(), Vector2::Zero(), 0.0);
    stationary.runs = 500;
    stationary.seed = 20240602;
    stationary.source_dist = SourceDistribution::UniformEllipse;
    stationary.psi = 0.4;

    return {{moderate.name, moderate}, {noisy.name, noisy}, {sparse.name, sparse}, {stationary.name, stationary}};
}

Rng run_rng(std::uint64_t seed, int run_index)
{
    return Rng(seed ^ static_cast<std::uint64_t>(run_index));
}

SimulatedRun simulate_run(const ScenarioConfig& cfg, int run_index)
{
    Rng rng = run_rng(cfg.seed, run_index);

    const Vector4 kin0 = sample_normal<4>(cfg.prior.kin.mean, cfg.prior.kin.cov, rng);
    Vector2 axes = sample_normal<2>(cfg.prior.axis.mean, cfg.prior.axis.cov, rng);
    for (int attempt = 0; attempt < 1000 && (axes.array() < kMinTrueAxis).any(); ++attempt) {
        axes = sample_normal<2>(cfg.prior.axis.mean, cfg.prior.axis.cov, rng);
    }
    axes = axes.cwiseMax(kMinTrueAxis);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double theta0 = cfg.prior.orient.mean + std::sqrt(cfg.prior.orient.var) * normal(rng);

    TrajectorySpec traj = cfg.trajectory;
    traj.start_position = kin0.head<2>();
    traj.nominal_speed = kin0.tail<2>().norm();
    traj.start_heading = traj.nominal_speed > 0.0 ? std::atan2(kin0(3), kin0(2)) : 0.0;
    if (traj.start_orientation) {
        traj.start_orientation = theta0;
    }
    traj.true_axes = axes;

    SimulatedRun sim;
    sim.truth = generate_truth(traj, rng);
    sim.measurements.reserve(sim.truth.size());
    const FilterConfig filter_cfg = cfg.filter_config();
    for (const auto& truth : sim.truth) {
        if (cfg.fixed_count) {
            sim.measurements.push_back(sample_points(truth.extent(), static_cast<std::size_t>(*cfg.fixed_count),
                                                     filter_cfg.R, cfg.source_dist, rng));
        } else {
            sim.measurements.push_back(sample_measurements(truth.extent(), cfg.lambda, filter_cfg.R, cfg.source_dist,
                                                           rng));
        }
    }
    return sim;
}

DecoupledEstimate step_filter(FilterKind kind, const DecoupledEstimate& est, const MeasurementSet& z,
                              const MotionModel& motion, const FilterConfig& cfg, Diagnostics* diag)
{
    if (kind == FilterKind::Sequential) {
        return step_sequential(est, z, motion, cfg, diag);
    }
    return step_batch(est, z, motion, cfg, diag);
}

RunResult track_run(const ScenarioConfig& cfg, const SimulatedRun& sim, FilterKind kind)
{
    const FilterConfig filter_cfg = cfg.filter_config();
    RunResult result;
    result.steps.reserve(sim.truth.size());

    DecoupledEstimate est = cfg.prior;
    double gwd_sum = 0.0;
    double orient_sum = 0.0;
    for (std::size_t k = 0; k < sim.truth.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        est = step_filter(kind, est, sim.measurements[k], cfg.motion, filter_cfg, &result.diagnostics);
        const auto stop = std::chrono::steady_clock::now();

        StepRecord record;
        record.t = static_cast<int>(k) + 1;
        record.truth = sim.truth[k];
        record.measurements = sim.measurements[k];
        record.estimate = est;
        record.errors = evaluate(ellipse_from_estimate(est), sim.truth[k].ellipse());
        record.wall_time = std::chrono::duration<double>(stop - start).count();
        gwd_sum += record.errors.gwd_sq;
        orient_sum += record.errors.orient_err;
        result.steps.push_back(std::move(record));
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, result.steps.size()));
    result.mean_gwd_sq = gwd_sum / n;
    result.mean_orient_err = orient_sum / n;
    return result;
}

Campaign run_scenario(const ScenarioConfig& cfg, FilterKind kind, const CampaignOptions& options)
{
    cfg.validate();
    const int runs = cfg.runs;
    std::vector<RunResult> results(static_cast<std::size_t>(runs));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) {
            results[static_cast<std::size_t>(r)] = track_run(cfg, simulate_run(cfg, r), kind);
        }
    };
    const unsigned threads = std::max(1u, std::min(options.threads, static_cast<unsigned>(runs)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
    }

    Campaign campaign;
    CampaignSummary& summary = campaign.summary;
    summary.runs = runs;
    const std::size_t steps = results.front().steps.size();
    summary.per_step_mean_gwd_sq.assign(steps, 0.0);
    summary.per_step_mean_orient_err.assign(steps, 0.0);
    double runtime_sum = 0.0;
    double measurement_sum = 0.0;
    for (const auto& run : results) {
        for (std::size_t k = 0; k < steps; ++k) {
            summary.per_step_mean_gwd_sq[k] += run.steps[k].errors.gwd_sq;
            summary.per_step_mean_orient_err[k] += run.steps[k].errors.orient_err;
            runtime_sum += run.steps[k].wall_time;
            measurement_sum += static_cast<double>(run.steps[k].measurements.size());
        }
        summary.overall_mean_gwd_sq += run.mean_gwd_sq;
        summary.overall_mean_orient_err += run.mean_orient_err;
        summary.diagnostics += run.diagnostics;
    }
    const double run_count = static_cast<double>(runs);
    for (std::size_t k = 0; k < steps; ++k) {
        summary.per_step_mean_gwd_sq[k] /= run_count;
        summary.per_step_mean_orient_err[k] /= run_count;
    }
    summary.overall_mean_gwd_sq /= run_count;
    summary.overall_mean_orient_err /= run_count;
    const double step_count = run_count * static_cast<double>(std::max<std::size_t>(1, steps));
    summary.mean_step_runtime = runtime_sum / step_count;
    summary.mean_measurements_per_step = measurement_sum / step_count;

    if (options.keep_records) {
        campaign.runs = std::move(results);
    }
    return campaign;
}

}  // namespace memqkf
