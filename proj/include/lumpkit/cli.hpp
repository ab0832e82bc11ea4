#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lumpkit::cli {

inline constexpr const char *kToolVersion = "0.1.0";

enum ExitCode : int {
    Ok = 0,
    UsageOrParse = 1,
    Numeric = 2,
    Io = 3,
};

/// Runs `lumpkit <command> [flags]`. `args` excludes the program name.
/// Commands: lump, find-epsilon, simulate, sweep.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace lumpkit::cli
