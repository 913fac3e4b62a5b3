#ifndef PARSKIT_CLI_HPP
#define PARSKIT_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace parskit::cli {

/// Exit codes: 0 success, 1 IO/usage, 2 parse/validation failure,
/// 3 analysis refused (frontier or other precondition).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RunResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Test harness entry point: same behaviour as run(), streams captured.
RunResult run_captured(const std::vector<std::string>& args);

}  // namespace parskit::cli

#endif
