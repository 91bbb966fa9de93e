#include "output.hpp"

#include <fstream>
#include <sstream>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"
#include "cardie/hash.hpp"
#include "cardie/parallel.hpp"

namespace cardie::cli {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  if (!f) throw IoError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

OutputDir::OutputDir(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
  fs::create_directories(dir_);
}

void OutputDir::add_input(const std::string& role, const fs::path& file) {
  if (!fs::exists(file)) throw IoError("input file not found: " + file.string());
  inputs_.push_back({{"role", role}, {"path", file.string()}, {"git_blob_sha1", git_blob_hash_file(file)}});
}

void OutputDir::add_images(const std::string& role, const std::vector<std::pair<std::string, fs::path>>& images,
                           unsigned jobs) {
  std::vector<std::string> hashes(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    if (!fs::exists(images[i].second)) throw DecodeError(images[i].first, "image not found: " + images[i].second.string());
    hashes[i] = git_blob_hash_file(images[i].second);
  });
  std::string listing;
  for (std::size_t i = 0; i < images.size(); ++i) listing += images[i].first + " " + hashes[i] + "\n";
  inputs_.push_back({{"role", role}, {"count", images.size()}, {"aggregate_sha1", git_blob_hash(listing)}});
}

void OutputDir::text(const std::string& name, const std::string& content) { write_file(dir_ / name, content); }

void OutputDir::json(const std::string& name, const Json& value) { text(name, value.dump(2) + "\n"); }

void OutputDir::table(const std::string& name, const std::string& csv_text, const std::string& description) {
  const auto doc = csv::parse(csv_text);
  text(name, csv_text);
  tables_.push_back({name, doc.header, doc.rows.size(), description});
}

std::string OutputDir::inputs_digest() const { return git_blob_hash(inputs_.dump()); }

void OutputDir::finish(const Json& config) {
  json("config.json", config);
  const std::string digest = inputs_digest();
  // the worker count never changes results, so it stays out of the hash
  Json hashed = config;
  if (hashed.contains("options")) hashed["options"].erase("jobs");
  const std::string config_hash = git_blob_hash(hashed.dump());
  json("provenance.json", Json{{"tool", "cardie"},
                               {"version", CARDIE_VERSION},
                               {"command", command_},
                               {"config_sha1", config_hash},
                               {"inputs_sha1", digest},
                               {"inputs", inputs_}});
  for (const auto& t : tables_) {
    json(t.name + ".json", Json{{"file", t.name},
                                {"description", t.description},
                                {"schema", {{"format", "csv"}, {"columns", t.columns}}},
                                {"rows", t.rows},
                                {"provenance", {{"command", command_}, {"config_sha1", config_hash}, {"inputs_sha1", digest}}}});
  }
}

}  // namespace cardie::cli
