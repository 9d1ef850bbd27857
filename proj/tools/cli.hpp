#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coarse::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kModuleError = 1;
inline constexpr int kUsageError = 2;

// args excludes the program name. Summaries go to out, errors to err.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coarse::cli
