#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace alignrecon {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// args excludes the program name. Commands: mask, phantom, misalign, acquire,
// recon, eval, sweep. Returns one of the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace alignrecon
