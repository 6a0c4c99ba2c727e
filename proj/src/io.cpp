#include "memqkf/io.hpp"

#include "memqkf/errors.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace memqkf::io {

namespace {

const char* source_name(SourceDistribution dist)
{
    return dist == SourceDistribution::UniformEllipse ? "uniform_ellipse" : "uniform_rectangle";
}

SourceDistribution source_from_name(const std::string& name)
{
    if (name == "uniform_ellipse") {
        return SourceDistribution::UniformEllipse;
    }
    if (name == "uniform_rectangle") {
        return SourceDistribution::UniformRectangle;
    }
    throw FormatError("unknown source_dist '" + name + "'");
}

Json motion_to_json(const MotionModel& m)
{
    return {{"F_kin", matrix_to_json(m.F_kin)},
            {"Q_kin", matrix_to_json(m.Q_kin)},
            {"Q_axis", matrix_to_json(m.Q_axis)},
            {"Q_theta", m.Q_theta}};
}

MotionModel motion_from_json(const Json& j, MotionModel m)
{
    if (j.contains("F_kin")) {
        m.F_kin = matrix_from_json<4, 4>(j.at("F_kin"));
    }
    if (j.contains("Q_kin")) {
        m.Q_kin = matrix_from_json<4, 4>(j.at("Q_kin"));
    }
    if (j.contains("Q_axis")) {
        m.Q_axis = matrix_from_json<2, 2>(j.at("Q_axis"));
    }
    if (j.contains("Q_theta")) {
        m.Q_theta = j.at("Q_theta").get<double>();
    }
    return m;
}

Json trajectory_to_json(const TrajectorySpec& t)
{
    Json segments = Json::array();
    for (const auto& s : t.segments) {
        segments.push_back({{"step_count", s.steps}, {"turn_rate", s.turn_rate}});
    }
    Json out = {{"segments", std::move(segments)},
                {"nominal_speed", t.nominal_speed},
                {"start_position", vector_to_json<2>(t.start_position)},
                {"start_heading", t.start_heading},
                {"true_axes", vector_to_json<2>(t.true_axes)},
                {"process_noise", matrix_to_json(t.process_noise)},
                {"dt", t.dt}};
    out["start_orientation"] = t.start_orientation ? Json(*t.start_orientation) : Json(nullptr);
    return out;
}

TrajectorySpec trajectory_from_json(const Json& j, TrajectorySpec t)
{
    if (j.contains("segments")) {
        t.segments.clear();
        for (const auto& s : j.at("segments")) {
            t.segments.push_back({s.at("step_count").get<int>(), s.at("turn_rate").get<double>()});
        }
    }
    if (j.contains("nominal_speed")) {
        t.nominal_speed = j.at("nominal_speed").get<double>();
    }
    if (j.contains("start_position")) {
        t.start_position = vector_from_json<2>(j.at("start_position"));
    }
    if (j.contains("start_heading")) {
        t.start_heading = j.at("start_heading").get<double>();
    }
    if (j.contains("start_orientation")) {
        const auto& v = j.at("start_orientation");
        t.start_orientation = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    if (j.contains("true_axes")) {
        t.true_axes = vector_from_json<2>(j.at("true_axes"));
    }
    if (j.contains("process_noise")) {
        t.process_noise = matrix_from_json<4, 4>(j.at("process_noise"));
    }
    if (j.contains("dt")) {
        t.dt = j.at("dt").get<double>();
    }
    return t;
}

}  // namespace

Json estimate_to_json(const DecoupledEstimate& est)
{
    return {{"kin", {{"mean", vector_to_json<4>(est.kin.mean)}, {"cov", matrix_to_json(est.kin.cov)}}},
            {"axis", {{"mean", vector_to_json<2>(est.axis.mean)}, {"cov", matrix_to_json(est.axis.cov)}}},
            {"orient", {{"mean", est.orient.mean}, {"var", est.orient.var}}}};
}

DecoupledEstimate estimate_from_json(const Json& j)
{
    DecoupledEstimate est;
    est.kin.mean = vector_from_json<4>(j.at("kin").at("mean"));
    est.kin.cov = matrix_from_json<4, 4>(j.at("kin").at("cov"));
    est.axis.mean = vector_from_json<2>(j.at("axis").at("mean"));
    est.axis.cov = matrix_from_json<2, 2>(j.at("axis").at("cov"));
    est.orient.mean = j.at("orient").at("mean").get<double>();
    est.orient.var = j.at("orient").at("var").get<double>();
    return est;
}

Json config_to_json(const ScenarioConfig& cfg)
{
    Json out = {{"name", cfg.name},
                {"lambda", cfg.lambda},
                {"R", matrix_to_json(cfg.R)},
                {"prior", estimate_to_json(cfg.prior)},
                {"motion", motion_to_json(cfg.motion)},
                {"trajectory", trajectory_to_json(cfg.trajectory)},
                {"runs", cfg.runs},
                {"seed", cfg.seed},
                {"source_dist", source_name(cfg.source_dist)}};
    out["fixed_count"] = cfg.fixed_count ? Json(*cfg.fixed_count) : Json(nullptr);
    out["psi"] = cfg.psi ? Json(*cfg.psi) : Json(nullptr);
    return out;
}

ScenarioConfig config_from_json(const Json& j, const ScenarioConfig& base)
{
    if (!j.is_object()) {
        throw FormatError("config must be a JSON object");
    }
    ScenarioConfig cfg = base;
    if (j.contains("name")) {
        cfg.name = j.at("name").get<std::string>();
    }
    if (j.contains("lambda")) {
        cfg.lambda = j.at("lambda").get<double>();
    }
    if (j.contains("fixed_count")) {
        const auto& v = j.at("fixed_count");
        cfg.fixed_count = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
    }
    if (j.contains("R")) {
        cfg.R = matrix_from_json<2, 2>(j.at("R"));
    }
    if (j.contains("prior")) {
        cfg.prior = estimate_from_json(j.at("prior"));
    }
    if (j.contains("motion")) {
        cfg.motion = motion_from_json(j.at("motion"), cfg.motion);
    }
    if (j.contains("trajectory")) {
        cfg.trajectory = trajectory_from_json(j.at("trajectory"), cfg.trajectory);
    }
    if (j.contains("runs")) {
        cfg.runs = j.at("runs").get<int>();
    }
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("source_dist")) {
        cfg.source_dist = source_from_name(j.at("source_dist").get<std::string>());
    }
    if (j.contains("psi")) {
        const auto& v = j.at("psi");
        cfg.psi = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.is_object() && j.value("schema", "") == kManifestSchema) {
            ScenarioConfig cfg = config_from_json(j.at("scenario"));
            cfg.seed = j.at("seed").get<std::uint64_t>();
            cfg.runs = j.at("runs").get<int>();
            return cfg;
        }
        ScenarioConfig base;
        if (j.is_object() && j.contains("base")) {
            const auto builtins = builtin_scenarios();
            const auto name = j.at("base").get<std::string>();
            const auto it = builtins.find(name);
            if (it == builtins.end()) {
                throw ConfigError("unknown base scenario '" + name + "'");
            }
            base = it->second;
        }
        return config_from_json(j, base);
    } catch (const Json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    } catch (const FormatError& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

ScenarioConfig resolve_scenario(const std::string& name_or_path)
{
    const auto builtins = builtin_scenarios();
    if (const auto it = builtins.find(name_or_path); it != builtins.end()) {
        return it->second;
    }
    if (std::filesystem::exists(name_or_path)) {
        return load_config(name_or_path);
    }
    throw ConfigError("'" + name_or_path + "' is neither a builtin scenario nor a config file");
}

Json simulate_line(int run, int t, const TruthState& truth, const MeasurementSet& z)
{
    Json points = Json::array();
    for (const auto& p : z.points) {
        points.push_back({p(0), p(1)});
    }
    return {{"run", run},
            {"t", t},
            {"truth",
             {{"center", vector_to_json<2>(truth.kin.head<2>())},
              {"theta", truth.theta},
              {"axes", vector_to_json<2>(truth.axes)},
              {"velocity", vector_to_json<2>(truth.kin.tail<2>())}}},
            {"measurements", std::move(points)}};
}

Json track_line(int run, int t, const DecoupledEstimate& est)
{
    Json out = estimate_to_json(est);
    out["run"] = run;
    out["t"] = t;
    return out;
}

std::string error_csv_row(int t, double gwd_sq, double orient_err)
{
    return fmt::format("{},{},{}\n", t, gwd_sq, orient_err);
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::ios_base::failure("cannot write '" + tmp + "'");
        }
        out << content;
        if (!out) {
            throw std::ios_base::failure("write failed for '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw std::ios_base::failure("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

}  // namespace memqkf::io
