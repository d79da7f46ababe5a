#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kslice::cli {

constexpr const char* kSchema = "kslice/1";
constexpr unsigned long long kDefaultSeed = 20240611ULL;

enum ExitCode : int { ok = 0, invariant_failure = 1, config_error = 2 };

/// Entry point behind the `kslice` binary; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kslice::cli
