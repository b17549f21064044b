#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace msmpolicy::cli {

/// Files produced by one command, written only once all of them are ready:
/// each goes to a temporary sibling first, then all are renamed into place.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  /// Throws IoError when a file cannot be written; temporaries are removed.
  std::vector<std::filesystem::path> commit() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Reads the dataset named by the config and subtracts the per-arm cost.
Dataset load_dataset(const RunConfig& rc);

/// Runs one command. Returns the process exit code; module errors propagate
/// as exceptions. `out` receives a short summary, `err` progress messages.
int run_command(const RunConfig& rc, std::ostream& out, std::ostream& err);

}  // namespace msmpolicy::cli
