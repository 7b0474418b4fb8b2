#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nmfem::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kEmptyInput = 2,
  kNotConverged = 3,
  kNumerical = 4,
  kInsufficientData = 5,
  kIoError = 6,
};

// Runs the tool on the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nmfem::cli
