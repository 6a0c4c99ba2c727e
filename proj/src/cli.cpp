#include "memqkf/cli.hpp"

#include "memqkf/errors.hpp"
#include "memqkf/io.hpp"
#include "memqkf/metrics.hpp"
#include "memqkf/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

namespace memqkf::cli {

namespace {

using io::Json;

/// Input line that could not be interpreted; carries the 1-based line number.
class MalformedLine : public std::runtime_error {
public:
    MalformedLine(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(fmt::format("{}:{}: malformed line: {}", path, line, what))
    {
    }
};

class IoFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NumberedJson {
    std::size_t line = 0;
    Json value;
};

std::vector<NumberedJson> read_jsonl(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open '" + path + "'");
    }
    std::vector<NumberedJson> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back({line, Json::parse(text)});
        } catch (const Json::exception& e) {
            throw MalformedLine(path, line, e.what());
        }
        if (!out.back().value.is_object()) {
            throw MalformedLine(path, line, "expected a JSON object");
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& content)
{
    try {
        io::write_file_atomic(path, content);
    } catch (const std::ios_base::failure& e) {
        throw IoFailure(e.what());
    }
}

MeasurementSet measurements_from_line(const Json& j)
{
    MeasurementSet z;
    for (const auto& p : j.at("measurements")) {
        if (!p.is_array() || p.size() != 2) {
            throw io::FormatError("measurement points must be [x, y]");
        }
        z.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return z;
}

TruthState truth_from_line(const Json& j)
{
    const auto& t = j.at("truth");
    TruthState truth;
    truth.kin.head<2>() = io::vector_from_json<2>(t.at("center"));
    truth.kin.tail<2>() = io::vector_from_json<2>(t.at("velocity"));
    truth.theta = t.at("theta").get<double>();
    truth.axes = io::vector_from_json<2>(t.at("axes"));
    return truth;
}

/// Maps library and I/O failures onto the documented exit codes.
template <typename Fn>
int guarded(std::ostream& log, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const MalformedLine& e) {
        log << e.what() << '\n';
        return kMalformedInput;
    } catch (const IoFailure& e) {
        log << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
}

}  // namespace

std::string eval_summary_path(const std::string& csv_path)
{
    std::filesystem::path p(csv_path);
    p.replace_extension(".summary.json");
    return p.string();
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& log)
{
    return guarded(log, [&] {
        ScenarioConfig cfg = io::resolve_scenario(opts.scenario);
        if (opts.seed) {
            cfg.seed = *opts.seed;
        }
        cfg.runs = opts.runs;
        cfg.validate();

        std::string content;
        std::size_t lines = 0;
        for (int r = 0; r < cfg.runs; ++r) {
            const SimulatedRun sim = simulate_run(cfg, r);
            for (std::size_t k = 0; k < sim.truth.size(); ++k) {
                content += io::simulate_line(r, static_cast<int>(k) + 1, sim.truth[k], sim.measurements[k]).dump();
                content += '\n';
                ++lines;
            }
        }
        write_text(opts.out, content);
        log << fmt::format("simulate: wrote {} lines to {}\n", lines, opts.out);
        return static_cast<int>(kOk);
    });
}

int cmd_track(const TrackOptions& opts, std::ostream& log)
{
    return guarded(log, [&] {
        const ScenarioConfig cfg = io::resolve_scenario(opts.scenario);
        cfg.validate();
        const FilterKind kind = filter_kind_from_string(opts.filter);
        const FilterConfig filter_cfg = cfg.filter_config();
        const auto lines = read_jsonl(opts.measurements);

        std::string content;
        DecoupledEstimate est = cfg.prior;
        std::optional<int> current_run;
        Diagnostics diag;
        for (const auto& [line, j] : lines) {
            int run = 0;
            int t = 0;
            MeasurementSet z;
            try {
                run = j.value("run", 0);
                t = j.at("t").get<int>();
                z = measurements_from_line(j);
            } catch (const Json::exception& e) {
                throw MalformedLine(opts.measurements, line, e.what());
            } catch (const io::FormatError& e) {
                throw MalformedLine(opts.measurements, line, e.what());
            }
            if (current_run != run) {
                est = cfg.prior;
                current_run = run;
            }
            est = step_filter(kind, est, z, cfg.motion, filter_cfg, &diag);
            content += io::track_line(run, t, est).dump();
            content += '\n';
        }
        write_text(opts.out, content);
        log << fmt::format("track: {} steps with the {} filter, {} skipped component updates\n", lines.size(),
                           to_string(kind), diag.total_skipped());
        return static_cast<int>(kOk);
    });
}

int cmd_eval(const EvalOptions& opts, std::ostream& log)
{
    return guarded(log, [&]() -> int {
        const auto estimates = read_jsonl(opts.estimates);
        const auto truths = read_jsonl(opts.truth);
        if (estimates.size() != truths.size()) {
            log << fmt::format("eval: {} estimate lines but {} truth lines\n", estimates.size(), truths.size());
            return kMisaligned;
        }

        std::string csv = io::kErrorCsvHeader;
        double gwd_sum = 0.0;
        double orient_sum = 0.0;
        for (std::size_t i = 0; i < estimates.size(); ++i) {
            DecoupledEstimate est;
            int est_run = 0;
            int est_t = 0;
            try {
                est = io::estimate_from_json(estimates[i].value);
                est_run = estimates[i].value.value("run", 0);
                est_t = estimates[i].value.at("t").get<int>();
            } catch (const std::exception& e) {
                throw MalformedLine(opts.estimates, estimates[i].line, e.what());
            }
            TruthState truth;
            int truth_run = 0;
            int truth_t = 0;
            try {
                truth = truth_from_line(truths[i].value);
                truth_run = truths[i].value.value("run", 0);
                truth_t = truths[i].value.at("t").get<int>();
            } catch (const std::exception& e) {
                throw MalformedLine(opts.truth, truths[i].line, e.what());
            }
            if (est_run != truth_run || est_t != truth_t) {
                log << fmt::format("eval: step mismatch at record {}: estimate (run {}, t {}) vs truth (run {}, t {})\n",
                                   i + 1, est_run, est_t, truth_run, truth_t);
                return kMisaligned;
            }
            const ErrorRecord err = evaluate(ellipse_from_estimate(est), truth.ellipse());
            csv += io::error_csv_row(est_t, err.gwd_sq, err.orient_err);
            gwd_sum += err.gwd_sq;
            orient_sum += err.orient_err;
        }

        const double n = static_cast<double>(std::max<std::size_t>(1, estimates.size()));
        const Json summary = {{"schema", io::kSummarySchema},
                              {"csv_schema", io::kEvalCsvSchema},
                              {"steps", estimates.size()},
                              {"mean_gwd_sq", gwd_sum / n},
                              {"mean_orient_err", orient_sum / n}};
        write_text(opts.out, csv);
        write_text(eval_summary_path(opts.out), summary.dump(2) + "\n");
        log << fmt::format("eval: {} steps, mean gwd_sq {:.4f} m^2, mean orientation error {:.4f} rad\n",
                           estimates.size(), gwd_sum / n, orient_sum / n);
        return kOk;
    });
}

int cmd_mc(const McOptions& opts, std::ostream& log)
{
    return guarded(log, [&] {
        ScenarioConfig cfg = io::resolve_scenario(opts.scenario);
        if (opts.runs) {
            cfg.runs = *opts.runs;
        }
        if (opts.seed) {
            cfg.seed = *opts.seed;
        }
        const FilterKind kind = filter_kind_from_string(opts.filter);
        cfg.validate();

        std::error_code ec;
        std::filesystem::create_directories(opts.out_dir, ec);
        if (ec) {
            throw IoFailure("cannot create '" + opts.out_dir + "'");
        }
        const unsigned threads = opts.threads > 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());

        const auto start = std::chrono::steady_clock::now();
        const Campaign campaign = run_scenario(cfg, kind, {threads, false});
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const CampaignSummary& s = campaign.summary;

        std::string csv = io::kErrorCsvHeader;
        for (std::size_t k = 0; k < s.per_step_mean_gwd_sq.size(); ++k) {
            csv += io::error_csv_row(static_cast<int>(k) + 1, s.per_step_mean_gwd_sq[k], s.per_step_mean_orient_err[k]);
        }
        const Json summary = {{"schema", io::kSummarySchema},
                              {"scenario", cfg.name},
                              {"filter", to_string(kind)},
                              {"runs", s.runs},
                              {"seed", cfg.seed},
                              {"steps", s.per_step_mean_gwd_sq.size()},
                              {"overall_mean_gwd_sq", s.overall_mean_gwd_sq},
                              {"overall_mean_orient_err", s.overall_mean_orient_err},
                              {"mean_measurements_per_step", s.mean_measurements_per_step},
                              {"diagnostics",
                               {{"skipped_kinematic", s.diagnostics.skipped_kinematic},
                                {"skipped_axis", s.diagnostics.skipped_axis},
                                {"skipped_orientation", s.diagnostics.skipped_orientation},
                                {"predict_only_steps", s.diagnostics.predict_only_steps}}}};
        const Json runtime = {{"filter", to_string(kind)},
                              {"mean_step_runtime_s", s.mean_step_runtime},
                              {"mean_step_runtime_ms", s.mean_step_runtime * 1e3},
                              {"campaign_wall_clock_s", wall},
                              {"threads", threads}};

        const std::filesystem::path dir(opts.out_dir);
        const std::string csv_path = (dir / "per_step.csv").string();
        const std::string summary_path = (dir / "summary.json").string();
        const std::string runtime_path = (dir / "runtime.json").string();
        const std::string manifest_path = (dir / "manifest.json").string();
        write_text(csv_path, csv);
        write_text(summary_path, summary.dump(2) + "\n");
        write_text(runtime_path, runtime.dump(2) + "\n");

        const Json manifest = {{"schema", io::kManifestSchema},
                               {"tool_version", io::kToolVersion},
                               {"schemas",
                                {{"per_step_csv", io::kEvalCsvSchema},
                                 {"summary", io::kSummarySchema},
                                 {"simulate", io::kSimulateSchema},
                                 {"track", io::kTrackSchema}}},
                               {"filter", to_string(kind)},
                               {"seed", cfg.seed},
                               {"runs", cfg.runs},
                               {"scenario", io::config_to_json(cfg)},
                               {"outputs", {csv_path, summary_path, runtime_path}},
                               {"wall_clock_s", wall},
                               {"mean_step_runtime_s", s.mean_step_runtime}};
        write_text(manifest_path, manifest.dump(2) + "\n");

        log << fmt::format("mc {} {} runs={}: mean gwd_sq {:.4f} m^2, mean orientation error {:.4f} rad, "
                           "mean step {:.2f} us\n",
                           cfg.name, to_string(kind), cfg.runs, s.overall_mean_gwd_sq, s.overall_mean_orient_err,
                           s.mean_step_runtime * 1e6);
        return static_cast<int>(kOk);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Decoupled quadratic Kalman filter for elliptical extended objects"};
    app.require_subcommand(1);
    app.set_version_flag("--version", io::kToolVersion);

    SimulateOptions sim;
    std::string sim_config;
    auto* simulate = app.add_subcommand("simulate", "Generate truth and measurements as JSON Lines");
    simulate->add_option("--scenario", sim.scenario, "Builtin scenario name");
    simulate->add_option("--config", sim_config, "Scenario config file (JSON)");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--runs", sim.runs, "Number of runs to generate")->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "Output JSON Lines file")->required();

    TrackOptions track;
    std::string track_config;
    auto* track_cmd = app.add_subcommand("track", "Run a filter over a measurement file");
    track_cmd->add_option("measurements,--measurements", track.measurements, "Measurement JSON Lines file")
        ->required();
    track_cmd->add_option("--filter", track.filter, "sequential or batch");
    track_cmd->add_option("--scenario", track.scenario, "Builtin scenario name");
    track_cmd->add_option("--config", track_config, "Scenario config file (JSON)");
    track_cmd->add_option("--out", track.out, "Output estimates JSON Lines file")->required();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Per-step errors of estimates against truth");
    eval_cmd->add_option("estimates,--estimates", eval.estimates, "Estimates JSON Lines file")->required();
    eval_cmd->add_option("truth,--truth", eval.truth, "Truth (simulate output) JSON Lines file")->required();
    eval_cmd->add_option("--out", eval.out, "Output CSV")->required();

    McOptions mc;
    std::string mc_config;
    auto* mc_cmd = app.add_subcommand("mc", "Monte-Carlo campaign");
    mc_cmd->add_option("scenario,--scenario", mc.scenario, "Builtin scenario name or config path");
    mc_cmd->add_option("filter,--filter", mc.filter, "sequential or batch");
    mc_cmd->add_option("runs,--runs", mc.runs, "Number of runs")->check(CLI::PositiveNumber);
    mc_cmd->add_option("seed,--seed", mc.seed, "Campaign seed");
    mc_cmd->add_option("--config", mc_config, "Scenario config file or run manifest");
    mc_cmd->add_option("--out", mc.out_dir, "Output directory")->required();
    mc_cmd->add_option("--threads", mc.threads, "Worker threads (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kConfigError);
    }

    auto pick = [&err](std::string& target, const std::string& config) {
        if (!config.empty()) {
            target = config;
        }
        if (target.empty()) {
            err << "config error: one of --scenario or --config is required\n";
            return false;
        }
        return true;
    };

    if (simulate->parsed()) {
        return pick(sim.scenario, sim_config) ? cmd_simulate(sim, err) : static_cast<int>(kConfigError);
    }
    if (track_cmd->parsed()) {
        return pick(track.scenario, track_config) ? cmd_track(track, err) : static_cast<int>(kConfigError);
    }
    if (eval_cmd->parsed()) {
        return cmd_eval(eval, err);
    }
    return pick(mc.scenario, mc_config) ? cmd_mc(mc, err) : static_cast<int>(kConfigError);
}

}  // namespace memqkf::cli
