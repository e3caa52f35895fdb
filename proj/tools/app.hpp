#pragma once

// Command-line front end shared by the `ssg` binary and its tests.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ssg::app {

/// Exit statuses: all checks passed, some check failed, schema or usage error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitSchema = 2;

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a hash, used for input digests in reports.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace ssg::app
