#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fishnav {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line (without the program name). Primary output goes to
/// `out`; artifacts and manifest.json go to the --out directory.
/// Returns 0 on success, 1 on a domain error, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fishnav
