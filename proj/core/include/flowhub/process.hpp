#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace flowhub {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct ProcessOptions {
  std::filesystem::path cwd;
  /// Added to (or overriding) the inherited environment.
  std::map<std::string, std::string> env;
  std::string input;
};

/// Runs `argv[0]` (looked up on PATH) without a shell, feeding `input` on
/// stdin and collecting stdout and stderr. Throws Error(io_error) if the
/// process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// A directory under the system temp dir, removed recursively on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "flowhub");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace flowhub
