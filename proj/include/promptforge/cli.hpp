#pragma once

#include <iosfwd>
#include <memory>

#include "promptforge/backend.hpp"
#include "promptforge/config.hpp"
#include "promptforge/error.hpp"

namespace promptforge {

/// Exit statuses of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitBackend = 2, kExitAdapter = 3 };

int exit_code_for(ErrorCode code);

/// Scripted backend from config.backend.bank plus the variant banks, or the
/// HTTP backend with its key taken from PROMPTFORGE_API_KEY.
std::unique_ptr<ModelBackend> make_backend(const TaskConfig& config, const EnvLookup& env = process_env);

/// Entry point behind the promptforge executable. Subcommands: mutate,
/// oracle, testgen, ablate, report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_env);

}  // namespace promptforge
