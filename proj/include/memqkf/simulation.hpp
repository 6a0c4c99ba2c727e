#pragma once

#include "memqkf/measurement_model.hpp"
#include "memqkf/metrics.hpp"
#include "memqkf/sequential.hpp"
#include "memqkf/state.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace memqkf {

struct TrajectorySegment {
    int steps = 1;
    double turn_rate = 0.0;  // rad per step
};

struct TrajectorySpec {
    std::vector<TrajectorySegment> segments;
    double nominal_speed = 0.0;  // m/s
    Vector2 start_position = Vector2::Zero();
    double start_heading = 0.0;
    /// Orientation used when it does not follow the velocity (e.g. a stationary object).
    std::optional<double> start_orientation;
    Vector2 true_axes = Vector2::Ones();
    /// Zero-mean jitter added to the true position/velocity every step.
    Matrix4 process_noise = Matrix4::Zero();
    double dt = 1.0;

    int total_steps() const;
    /// Per step (index 0 is step 1): true when that step has a nonzero turn rate.
    std::vector<bool> turn_mask() const;
};

struct TruthState {
    Vector4 kin = Vector4::Zero();  // position, velocity
    double theta = 0.0;
    Vector2 axes = Vector2::Ones();

    ExtentTruth extent() const { return {kin.head<2>(), theta, axes}; }
    EllipseParams ellipse() const { return {kin.head<2>(), theta, axes}; }
};

/// Truth after each of the steps 1..N. Velocity is rotated by the segment's turn rate, then the
/// position is integrated; orientation follows the velocity unless start_orientation is set.
std::vector<TruthState> generate_truth(const TrajectorySpec& traj, Rng& rng);

enum class FilterKind { Sequential, Batch };

const char* to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

struct ScenarioConfig {
    std::string name;
    double lambda = 12.0;
    /// When set, every step yields exactly this many points instead of a Poisson count.
    std::optional<int> fixed_count;
    Matrix2 R = Matrix2::Identity();
    /// Prior means and covariances; the per-run truth is drawn from this distribution.
    DecoupledEstimate prior;
    MotionModel motion;
    TrajectorySpec trajectory;
    int runs = 1;
    std::uint64_t seed = 0;
    SourceDistribution source_dist = SourceDistribution::UniformEllipse;
    std::optional<double> psi;

    FilterConfig filter_config() const;
    /// Throws ConfigError when the configuration is inconsistent.
    void validate() const;
};

std::map<std::string, ScenarioConfig> builtin_scenarios();

/// Default evaluation trajectory: 80 steps at 3 m/s with three 90 degree turns.
TrajectorySpec default_trajectory();

struct StepRecord {
    int t = 0;
    TruthState truth;
    MeasurementSet measurements;
    DecoupledEstimate estimate;
    ErrorRecord errors;
    double wall_time = 0.0;  // seconds spent in the filter step
};

/// Ground truth and measurements of one run, before any filtering.
struct SimulatedRun {
    std::vector<TruthState> truth;
    std::vector<MeasurementSet> measurements;
};

/// Random stream of run `run_index`; runs use seed XOR run_index.
Rng run_rng(std::uint64_t seed, int run_index);

/// Samples the true initial state from the prior and generates truth plus measurements.
SimulatedRun simulate_run(const ScenarioConfig& cfg, int run_index);

struct RunResult {
    std::vector<StepRecord> steps;
    Diagnostics diagnostics;
    double mean_gwd_sq = 0.0;
    double mean_orient_err = 0.0;
};

/// Runs the filter over an already simulated run, starting from the prior means.
RunResult track_run(const ScenarioConfig& cfg, const SimulatedRun& sim, FilterKind kind);

DecoupledEstimate step_filter(FilterKind kind, const DecoupledEstimate& est, const MeasurementSet& z,
                              const MotionModel& motion, const FilterConfig& cfg, Diagnostics* diag = nullptr);

struct CampaignSummary {
    std::vector<double> per_step_mean_gwd_sq;
    std::vector<double> per_step_mean_orient_err;
    double overall_mean_gwd_sq = 0.0;
    double overall_mean_orient_err = 0.0;
    double mean_step_runtime = 0.0;  // seconds
    double mean_measurements_per_step = 0.0;
    Diagnostics diagnostics;
    int runs = 0;
};

struct Campaign {
    CampaignSummary summary;
    std::vector<RunResult> runs;  // empty unless records were requested
};

struct CampaignOptions {
    unsigned threads = 1;
    bool keep_records = false;
};

/// Executes all runs and aggregates in run order, so results do not depend on thread count.
Campaign run_scenario(const ScenarioConfig& cfg, FilterKind kind, const CampaignOptions& options = {});

}  // namespace memqkf
