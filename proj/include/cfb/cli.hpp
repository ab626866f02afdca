#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cfb::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kParameter = 4,
  kInstability = 5,
  kNumerical = 6,
  kIo = 7,
  kCalibration = 8,
};

/// Delimited table with '#' metadata lines above the header row.
struct Table {
  std::vector<std::string> meta;    // "key = value"
  std::vector<std::string> header;  // "name [unit]"
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

/// Parses `args` (without the program name) and runs one command. The result goes to
/// --out when given, otherwise to `out`. Errors are written to `err` as a one-line JSON
/// record; no output file is created on failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace cfb::cli
