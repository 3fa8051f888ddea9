#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qshadow/config.hpp"

namespace qshadow {

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_not_converged = 2, exit_config = 3 };

struct CommandOptions {
    std::string format = "json"; ///< json | csv
    unsigned jobs = 0;           ///< 0: hardware concurrency
    std::optional<std::uint64_t> seed;
    bool timing = false;         ///< emit wall-clock fields (breaks byte-identical output)
};

struct CommandResult {
    int exit_code = exit_ok;
    std::string output;  ///< report body; empty on configuration errors
    std::string message; ///< diagnostic for stderr
};

CommandResult cmd_certify(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_refine(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_shadow(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_periodic(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_sweep(const RunConfig& cfg, const CommandOptions& opts);

struct SweepRow {
    double axis_value = 0.0;
    bool certified = false;
    bool converged = false;
    std::optional<double> max_shadow_distance;
    int iterations = 0;
    double wall_ms = 0.0;
    std::string error;
};

/// One independent cell per axis value, computed on `jobs` threads; rows
/// come back in axis order whatever the schedule.
std::vector<SweepRow> run_sweep(const RunConfig& cfg, unsigned jobs);
/// axis_value,certified,converged,max_shadow_distance,iterations,wall_ms
std::string sweep_csv(const std::vector<SweepRow>& rows, bool timing);

/// Applies --seed, dispatches by name and maps library errors to exit codes.
CommandResult run_command(const std::string& name, RunConfig cfg, const CommandOptions& opts);

} // namespace qshadow
