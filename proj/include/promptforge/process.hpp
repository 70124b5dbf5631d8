#pragma once

#include <chrono>
#include <filesystem>
#include <string>

namespace promptforge {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs `command` through /bin/sh -c in its own process group. On timeout the
/// whole group is killed. Exit status 127 (shell could not find the command)
/// raises Error(AdapterFailure), as does a failure to spawn the shell.
ProcessResult run_command(const std::string& command, std::chrono::seconds timeout);

/// Directory under the system temp dir, removed recursively on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace promptforge
