#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace cardie::cli {

using Json = nlohmann::ordered_json;

/// Collects the artifacts of one command run: hashed inputs, tables (each with a JSON
/// sidecar), config.json and provenance.json.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string command);

  const std::filesystem::path& path() const noexcept { return dir_; }

  void add_input(const std::string& role, const std::filesystem::path& file);
  /// Images are hashed individually and reported as one aggregate digest, keyed by id.
  void add_images(const std::string& role, const std::vector<std::pair<std::string, std::filesystem::path>>& images,
                  unsigned jobs);

  void text(const std::string& name, const std::string& content);
  void json(const std::string& name, const Json& value);
  void table(const std::string& name, const std::string& csv_text, const std::string& description);

  /// Writes config.json, provenance.json and the table sidecars.
  void finish(const Json& config);

 private:
  struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::size_t rows;
    std::string description;
  };

  std::string inputs_digest() const;

  std::filesystem::path dir_;
  std::string command_;
  Json inputs_ = Json::array();
  std::vector<Table> tables_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace cardie::cli
