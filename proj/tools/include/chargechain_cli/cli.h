#ifndef CHARGECHAIN_CLI_CLI_H_
#define CHARGECHAIN_CLI_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace chargechain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapacity = 3;

// args excludes the program name. Reports go to `out` unless --out is given,
// diagnostics to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Writes through a temporary file in the same directory, then renames.
void WriteFileAtomically(const std::string& path, const std::string& contents);

}  // namespace chargechain::cli

#endif  // CHARGECHAIN_CLI_CLI_H_
