#ifndef FMLFS_CLI_H_
#define FMLFS_CLI_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fmlfs/federation.h"

namespace fmlfs {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitRuntimeError = 2,
};

struct ExperimentSpec {
  RunConfig run;
  std::filesystem::path label_xml;  // empty: use run-level label count
  std::size_t num_labels = 0;
  double test_fraction = 0.3;
  std::filesystem::path output_dir = "fmlfs_out";
  std::string format = "json";  // json | csv
  bool debug_reports = false;
};

// Parses "10,20,30" or the arithmetic shorthand "10,20,...,100".
std::vector<std::size_t> ParseTopKList(std::string_view text);

// Multiples of 10 up to min(100, D); {D} when D < 10.
std::vector<std::size_t> DefaultTopK(std::size_t num_features);

// Entry point shared by the fmlfs binary and the tests.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace fmlfs

#endif  // FMLFS_CLI_H_
