#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cardie {

/// One (input, ground truth) pair of the dataset, plus optional external labels.
struct PairEntry {
  std::string id;
  std::filesystem::path input_path;
  std::optional<std::filesystem::path> gt_path;
  std::map<std::string, std::string> labels;
  /// 0 for original entries; k > 0 marks the k-th replica emitted by oversampling.
  int replica_index = 0;

  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

enum class ManifestFormat { automatic, csv, json };

struct ManifestLoadOptions {
  ManifestFormat format = ManifestFormat::automatic;
  /// Label columns to discard while loading (e.g. a column known to be redundant).
  std::vector<std::string> drop_labels;
  /// Root for relative paths; defaults to the manifest's own directory.
  std::optional<std::filesystem::path> source_root;
};

class PairManifest {
 public:
  PairManifest() = default;
  /// Validates id uniqueness and label-key consistency.
  PairManifest(std::vector<PairEntry> entries, std::filesystem::path source_root);

  const std::vector<PairEntry>& entries() const noexcept { return entries_; }
  const std::filesystem::path& source_root() const noexcept { return source_root_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const PairEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// Label keys shared by all entries (sorted).
  std::vector<std::string> label_keys() const;
  const PairEntry* find(const std::string& id) const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path input_of(const PairEntry& e) const { return resolve(e.input_path); }
  std::optional<std::filesystem::path> gt_of(const PairEntry& e) const;

  /// Ids of entries lacking a ground-truth path, in manifest order.
  std::vector<std::string> missing_gt() const;

 private:
  std::vector<PairEntry> entries_;
  std::filesystem::path source_root_;
};

PairManifest load_manifest(const std::filesystem::path& path, const ManifestLoadOptions& options = {});

/// CSV text in the interchange schema: id,input_path,gt_path,label_<key>...
/// With `with_replica_index`, a replica_index column follows gt_path.
std::string manifest_to_csv(const PairManifest& manifest, bool with_replica_index = false);
void save_manifest_csv(const PairManifest& manifest, const std::filesystem::path& path,
                       bool with_replica_index = false);
std::string manifest_to_json(const PairManifest& manifest);

/// K entries drawn uniformly without replacement, returned in manifest order.
PairManifest subsample(const PairManifest& manifest, std::size_t k, std::uint64_t seed);

}  // namespace cardie
