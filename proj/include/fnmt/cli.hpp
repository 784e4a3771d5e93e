#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fnmt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

// Runs one `fnmt` invocation; `args` excludes the program name. Progress and
// diagnostics go to `err`, reports to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnmt::cli
