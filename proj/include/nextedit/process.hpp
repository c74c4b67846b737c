#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nextedit {

struct ProcessResult {
  int status = -1;  // exit code, or 128 + signal
  std::string out;
};

/// Runs argv[0] (PATH lookup) in `cwd`, feeding `input` on stdin and
/// collecting stdout. stderr is discarded unless `merge_stderr` is set.
/// Throws Io when the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {},
                          const std::string& input = {}, bool merge_stderr = false);

/// Looks `name` up on PATH; empty when not found.
std::filesystem::path find_executable(const std::string& name);

}  // namespace nextedit
