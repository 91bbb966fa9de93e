#include "cardie/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"
#include "cardie/random.hpp"

namespace cardie {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kLabelPrefix = "label_";

std::string label_key_of(const std::string& column) {
  if (column.rfind(kLabelPrefix, 0) == 0) return column.substr(kLabelPrefix.size());
  return column;
}

bool dropped(const ManifestLoadOptions& o, const std::string& key) {
  return std::find(o.drop_labels.begin(), o.drop_labels.end(), key) != o.drop_labels.end() ||
         std::find(o.drop_labels.begin(), o.drop_labels.end(), std::string(kLabelPrefix) + key) !=
             o.drop_labels.end();
}

std::vector<PairEntry> parse_csv_entries(const fs::path& path, const ManifestLoadOptions& options) {
  const auto doc = csv::read_file(path);
  const int id_col = doc.column("id");
  const int in_col = doc.column("input_path");
  if (id_col < 0 || in_col < 0) {
    throw SchemaError(path.string() + ": manifest requires columns id,input_path");
  }
  const int gt_col = doc.column("gt_path");
  const int rep_col = doc.column("replica_index");

  std::vector<std::pair<int, std::string>> label_cols;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == id_col || ci == in_col || ci == gt_col || ci == rep_col) continue;
    const auto key = label_key_of(doc.header[c]);
    if (!dropped(options, key)) label_cols.emplace_back(ci, key);
  }

  std::vector<PairEntry> entries;
  entries.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    PairEntry e;
    e.id = row[id_col];
    e.input_path = row[in_col];
    if (gt_col >= 0 && !row[gt_col].empty()) e.gt_path = fs::path(row[gt_col]);
    if (rep_col >= 0 && !row[rep_col].empty()) e.replica_index = std::stoi(row[rep_col]);
    for (const auto& [c, key] : label_cols) e.labels[key] = row[c];
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<PairEntry> parse_json_entries(const fs::path& path, const ManifestLoadOptions& options,
                                          std::optional<fs::path>& root_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (doc.contains("source_root") && doc["source_root"].is_string()) {
      root_out = fs::path(doc["source_root"].get<std::string>());
    }
    if (!doc.contains("entries")) throw SchemaError(path.string() + ": missing 'entries'");
    list = &doc["entries"];
  }
  if (!list->is_array()) throw SchemaError(path.string() + ": entries must be an array");

  std::vector<PairEntry> entries;
  for (const auto& item : *list) {
    if (!item.is_object() || !item.contains("id") || !item.contains("input_path")) {
      throw SchemaError(path.string() + ": manifest requires fields id,input_path");
    }
    PairEntry e;
    e.id = item["id"].is_string() ? item["id"].get<std::string>() : item["id"].dump();
    e.input_path = item["input_path"].get<std::string>();
    if (item.contains("gt_path") && item["gt_path"].is_string() &&
        !item["gt_path"].get<std::string>().empty()) {
      e.gt_path = fs::path(item["gt_path"].get<std::string>());
    }
    if (item.contains("replica_index")) e.replica_index = item["replica_index"].get<int>();
    for (const auto& [k, v] : item.items()) {
      if (k == "id" || k == "input_path" || k == "gt_path" || k == "replica_index") continue;
      if (k == "labels" && v.is_object()) {
        for (const auto& [lk, lv] : v.items()) {
          if (!dropped(options, lk)) e.labels[lk] = lv.is_string() ? lv.get<std::string>() : lv.dump();
        }
        continue;
      }
      const auto key = label_key_of(k);
      if (!dropped(options, key)) e.labels[key] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

PairManifest::PairManifest(std::vector<PairEntry> entries, fs::path source_root)
    : entries_(std::move(entries)), source_root_(std::move(source_root)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.id.empty()) throw SchemaError("manifest entry with empty id");
    if (e.input_path.empty()) throw SchemaError("entry '" + e.id + "' has no input_path");
    if (!seen.insert(e.id).second) throw IntegrityError("duplicate id '" + e.id + "'");
  }
  if (!entries_.empty()) {
    const auto& ref = entries_.front().labels;
    for (const auto& e : entries_) {
      bool same = e.labels.size() == ref.size();
      for (auto a = e.labels.begin(), b = ref.begin(); same && a != e.labels.end(); ++a, ++b) {
        same = a->first == b->first;
      }
      if (!same) throw SchemaError("entry '" + e.id + "' has inconsistent label keys");
    }
  }
}

std::vector<std::string> PairManifest::label_keys() const {
  std::vector<std::string> keys;
  if (!entries_.empty()) {
    for (const auto& [k, v] : entries_.front().labels) keys.push_back(k);
  }
  return keys;
}

const PairEntry* PairManifest::find(const std::string& id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

fs::path PairManifest::resolve(const fs::path& p) const {
  if (p.is_absolute() || source_root_.empty()) return p;
  return source_root_ / p;
}

std::optional<fs::path> PairManifest::gt_of(const PairEntry& e) const {
  if (!e.gt_path) return std::nullopt;
  return resolve(*e.gt_path);
}

std::vector<std::string> PairManifest::missing_gt() const {
  std::vector<std::string> ids;
  for (const auto& e : entries_) {
    if (!e.gt_path) ids.push_back(e.id);
  }
  return ids;
}

PairManifest load_manifest(const fs::path& path, const ManifestLoadOptions& options) {
  if (!fs::exists(path)) throw IoError("manifest not found: " + path.string());
  ManifestFormat format = options.format;
  if (format == ManifestFormat::automatic) {
    format = path.extension() == ".json" ? ManifestFormat::json : ManifestFormat::csv;
  }
  std::optional<fs::path> root_from_file;
  auto entries = format == ManifestFormat::json ? parse_json_entries(path, options, root_from_file)
                                                : parse_csv_entries(path, options);
  fs::path root = path.parent_path();
  if (root_from_file) root = root_from_file->is_absolute() ? *root_from_file : root / *root_from_file;
  if (options.source_root) root = *options.source_root;
  return PairManifest(std::move(entries), root);
}

std::string manifest_to_csv(const PairManifest& manifest, bool with_replica_index) {
  csv::Row header{"id", "input_path", "gt_path"};
  if (with_replica_index) header.push_back("replica_index");
  const auto keys = manifest.label_keys();
  for (const auto& k : keys) header.push_back(std::string(kLabelPrefix) + k);
  csv::Writer w(header);
  for (const auto& e : manifest.entries()) {
    csv::Row row{e.id, e.input_path.generic_string(), e.gt_path ? e.gt_path->generic_string() : ""};
    if (with_replica_index) row.push_back(std::to_string(e.replica_index));
    for (const auto& k : keys) row.push_back(e.labels.at(k));
    w.add(std::move(row));
  }
  return w.str();
}

void save_manifest_csv(const PairManifest& manifest, const fs::path& path, bool with_replica_index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest_to_csv(manifest, with_replica_index);
}

std::string manifest_to_json(const PairManifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries()) {
    json item{{"id", e.id}, {"input_path", e.input_path.generic_string()}};
    item["gt_path"] = e.gt_path ? e.gt_path->generic_string() : "";
    if (e.replica_index) item["replica_index"] = e.replica_index;
    item["labels"] = e.labels;
    entries.push_back(std::move(item));
  }
  return json{{"entries", entries}}.dump(2) + "\n";
}

PairManifest subsample(const PairManifest& manifest, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > manifest.size()) {
    throw ArgumentError("subsample size " + std::to_string(k) + " outside [1, " +
                        std::to_string(manifest.size()) + "]");
  }
  Rng rng(derive_seed(seed, "subsample"));
  std::vector<PairEntry> picked;
  picked.reserve(k);
  std::sample(manifest.entries().begin(), manifest.entries().end(), std::back_inserter(picked), k, rng);
  return PairManifest(std::move(picked), manifest.source_root());
}

}  // namespace cardie
