#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lps {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes of the command-line tool.
enum Exit : int { Ok = 0, Usage = 1, VerificationFailed = 2, NumericFailed = 3 };

/// Runs `lps <args...>` in-process; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lps
