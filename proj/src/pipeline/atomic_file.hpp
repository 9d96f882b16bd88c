#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "faultrank/common.hpp"

namespace faultrank::pipeline::detail {

/// Writes to "<path>.partial" and renames onto <path> at commit(). An
/// uncommitted file keeps its .partial name so half-written output is
/// recognizable.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path)
      : path_(std::move(path)), partial_(path_.string() + ".partial") {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw InputError("cannot write " + partial_.string());
  }

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw Error("write failed: " + partial_.string());
    out_.close();
    std::error_code ec;
    std::filesystem::rename(partial_, path_, ec);
    if (ec) throw Error("cannot rename " + partial_.string() + ": " + ec.message());
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  std::ofstream out_;
};

}  // namespace faultrank::pipeline::detail
