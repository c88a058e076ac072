// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sclora/subspace.hpp"

namespace sclora::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvariantViolation = 1,
  kUsageError = 2,
  kNumericalFailure = 3,
};

struct CommandOutcome {
  int exit_code = kSuccess;
  std::vector<Warning> warnings;
};

/// Runs one `sclora` invocation. `args` excludes the program name.
/// Regular output goes to `out`; warnings (`WARN <code>: <message>`) and
/// errors go to `err`.
CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sclora::cli
