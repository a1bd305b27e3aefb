#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ldu {

// Entry point of the `ldu` tool. args[0] is the program name. Subcommands:
// gen-data, split, train-ensemble, featurize, sweep-ldu, sweep-ld, sweep-dt,
// report. Returns 0 on success; errors go to `err` with a nonzero status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ldu
