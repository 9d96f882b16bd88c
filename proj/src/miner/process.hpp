#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace faultrank::miner::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs argv[0] (PATH lookup) with stdout captured; stdin is redirected from
/// `stdin_file` when given, otherwise /dev/null.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::optional<std::filesystem::path>& stdin_file = std::nullopt);

/// Scratch file removed on destruction.
class TempFile {
 public:
  TempFile();
  ~TempFile();
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const { return path_; }
  void write(const std::string& content) const;

 private:
  std::filesystem::path path_;
};

}  // namespace faultrank::miner::detail
