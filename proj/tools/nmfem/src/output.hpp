#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nmfem::cli {

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Collects one command's outputs and writes them followed by manifest.json.
class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, std::string command, std::vector<std::string> arguments,
            nlohmann::json config);

  void add_input(const std::filesystem::path& path);
  void emit(const std::string& name, const std::string& content);
  void warn(std::string message) { warnings_.push_back(std::move(message)); }
  void finish(std::optional<std::uint64_t> seed, int exit_code);

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::vector<std::string> arguments_;
  nlohmann::json config_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  std::vector<std::string> warnings_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace nmfem::cli
