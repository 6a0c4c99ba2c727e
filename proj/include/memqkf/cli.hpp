#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace memqkf::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIoError = 3,
    kMalformedInput = 4,
    kMisaligned = 5,
};

struct SimulateOptions {
    std::string scenario;  // builtin name or config path
    std::string out;
    std::optional<std::uint64_t> seed;
    int runs = 1;
};

struct TrackOptions {
    std::string measurements;
    std::string filter = "sequential";
    std::string scenario;
    std::string out;
};

struct EvalOptions {
    std::string estimates;
    std::string truth;
    std::string out;
};

struct McOptions {
    std::string scenario;
    std::string filter = "sequential";
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 0;  // 0: hardware concurrency
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_track(const TrackOptions& opts, std::ostream& log);
int cmd_eval(const EvalOptions& opts, std::ostream& log);
int cmd_mc(const McOptions& opts, std::ostream& log);

/// Path of the summary JSON written next to an eval CSV.
std::string eval_summary_path(const std::string& csv_path);

/// Parses the command line and dispatches to one of the subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace memqkf::cli
