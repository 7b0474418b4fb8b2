#include "output.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <unistd.h>

#include <nmfem/errors.hpp>

namespace nmfem::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 0xf];
  }
  return hex;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw FormatError("cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw FormatError("cannot move output into place at '" + path.string() + "'");
  }
}

OutputSet::OutputSet(fs::path dir, std::string command, std::vector<std::string> arguments,
                     nlohmann::json config)
    : dir_(std::move(dir)),
      command_(std::move(command)),
      arguments_(std::move(arguments)),
      config_(std::move(config)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw FormatError("cannot create output directory '" + dir_.string() + "'");
  }
}

void OutputSet::add_input(const fs::path& path) {
  const std::string bytes = read_file(path);
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
}

void OutputSet::emit(const std::string& name, const std::string& content) {
  write_file_atomic(dir_ / name, content);
  outputs_.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
}

void OutputSet::finish(std::optional<std::uint64_t> seed, int exit_code) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json manifest = {
      {"schema_version", 1},
      {"tool", "nmfem"},
      {"version", NMFEM_VERSION},
      {"command", command_},
      {"arguments", arguments_},
      {"config", config_},
      {"inputs", inputs_},
      {"outputs", outputs_},
      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
      {"wall_time_seconds", wall},
      {"exit_code", exit_code},
      {"warnings", warnings_},
  };
  write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace nmfem::cli
