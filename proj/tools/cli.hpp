#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualbill::cli {

enum ExitCode : int { ok = 0, usage = 1, domain = 2, convergence = 3, verification = 4 };

// args excludes the program name. Results go to `out` (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualbill::cli
