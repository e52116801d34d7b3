#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace keldysh::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitConfigError = 2,
  kExitNumericalError = 3,
};

struct VerifyFlags {
  bool corrupt_keldysh = false;  // negative-control fixture
};

// Each command writes its primary output to `out` and returns an exit code.
int cmd_gf(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log, const VerifyFlags& flags = {});
int cmd_z(const RunConfig& cfg, std::ostream& out);
int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Full command-line entry point: parses arguments, loads the config,
/// applies `--a.b value` overrides, dispatches, and maps errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for a library error.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace keldysh::cli
