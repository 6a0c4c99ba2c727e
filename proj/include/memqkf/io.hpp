#pragma once

#include "memqkf/simulation.hpp"

#include <json.hpp>

#include <string>

namespace memqkf::io {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSimulateSchema = "memqkf.simulate.v1";
inline constexpr const char* kTrackSchema = "memqkf.track.v1";
inline constexpr const char* kEvalCsvSchema = "memqkf.eval_csv.v1";
inline constexpr const char* kSummarySchema = "memqkf.summary.v1";
inline constexpr const char* kManifestSchema = "memqkf.manifest.v1";

/// Thrown for well-formed JSON with missing or mistyped fields.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrices are written row-major with explicit dimensions: {"rows", "cols", "data"}.
template <int R, int C>
Json matrix_to_json(const Eigen::Matrix<double, R, C>& m)
{
    Json data = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            data.push_back(m(r, c));
        }
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

template <int R, int C>
Eigen::Matrix<double, R, C> matrix_from_json(const Json& j)
{
    if (!j.is_object() || j.at("rows").get<int>() != R || j.at("cols").get<int>() != C) {
        throw FormatError("expected a " + std::to_string(R) + "x" + std::to_string(C) + " matrix");
    }
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != static_cast<std::size_t>(R * C)) {
        throw FormatError("matrix data has the wrong length");
    }
    Eigen::Matrix<double, R, C> m;
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            m(r, c) = data.at(static_cast<std::size_t>(r * C + c)).get<double>();
        }
    }
    return m;
}

template <int N>
Json vector_to_json(const Eigen::Matrix<double, N, 1>& v)
{
    Json out = Json::array();
    for (int i = 0; i < N; ++i) {
        out.push_back(v(i));
    }
    return out;
}

template <int N>
Eigen::Matrix<double, N, 1> vector_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
        throw FormatError("expected an array of length " + std::to_string(N));
    }
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) {
        v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    }
    return v;
}

Json estimate_to_json(const DecoupledEstimate& est);
DecoupledEstimate estimate_from_json(const Json& j);

Json config_to_json(const ScenarioConfig& cfg);
/// Fields absent from `j` keep their value from `base`.
ScenarioConfig config_from_json(const Json& j, const ScenarioConfig& base = {});

/// Reads a scenario config file. A "base" key names a builtin scenario to start from;
/// a run manifest is accepted too, in which case its embedded scenario is used.
ScenarioConfig load_config(const std::string& path);

/// Builtin name or path to a config file.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

Json simulate_line(int run, int t, const TruthState& truth, const MeasurementSet& z);
Json track_line(int run, int t, const DecoupledEstimate& est);

/// One CSV row of per-step errors, shared by `eval` and `mc` so both print identical text.
std::string error_csv_row(int t, double gwd_sq, double orient_err);
inline constexpr const char* kErrorCsvHeader = "t,gwd_sq,orient_err\n";

/// Writes `content` to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace memqkf::io
