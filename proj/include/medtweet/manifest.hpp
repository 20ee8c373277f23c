#pragma once

#include <string>
#include <utility>
#include <vector>

#include "medtweet/data_io.hpp"
#include "medtweet/hashing.hpp"
#include "medtweet/version.hpp"

namespace medtweet {

// Reproducibility record written beside each run's outputs: the resolved
// configuration, digests of every input file, and the tool version. Two runs
// with identical manifests produce byte-identical outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value) {
    settings_.emplace_back(key, value);
  }
  void set(const std::string& key, double value, int precision = 6) {
    settings_.emplace_back(key, format_fixed(value, precision));
  }
  void set(const std::string& key, std::uint64_t value) {
    settings_.emplace_back(key, std::to_string(value));
  }
  void set(const std::string& key, int value) { settings_.emplace_back(key, std::to_string(value)); }
  void set(const std::string& key, bool value) {
    settings_.emplace_back(key, value ? "true" : "false");
  }

  void add_input(const std::string& path) { inputs_.push_back(path); }

  void write(const std::string& path) const {
    detail::TsvWriter w(path);
    w.row({"tool", kToolName});
    w.row({"version", kVersion});
    w.row({"command", command_});
    for (const auto& [key, value] : settings_) w.row({"arg." + key, value});
    for (const std::string& input : inputs_) w.row({"digest." + input, file_digest(input)});
    w.close();
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> settings_;
  std::vector<std::string> inputs_;
};

}  // namespace medtweet
