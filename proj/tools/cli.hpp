#ifndef ICD_TOOLS_CLI_HPP
#define ICD_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace icd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModuleError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one pipeline subcommand. `args` excludes the program name. Errors are
/// reported on `err` as a single `error: ...` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icd::cli

#endif  // ICD_TOOLS_CLI_HPP
