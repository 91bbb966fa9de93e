#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cardie/clustering.hpp"
#include "cardie/descriptor_table.hpp"

namespace cardie {

/// Cluster label per id (kNoise for noise), in file order.
struct Assignment {
  std::vector<std::string> ids;
  std::vector<int> labels;

  static Assignment from_model(const ClusterModel& model);
  std::size_t size() const noexcept { return ids.size(); }
  std::optional<int> label_of(const std::string& id) const;
  std::map<std::string, int> as_map() const;
  /// Members per non-noise label, ascending by label.
  std::map<int, std::size_t> cluster_counts() const;
};

std::string assignment_csv(const Assignment& assignment);
Assignment read_assignment(const std::filesystem::path& path);
Assignment parse_assignment(const std::string& text);

std::string sweep_csv(const GridSearchResult& result);

struct ClusterStat {
  int label = kNoise;
  std::string name;         ///< e.g. "DaRB"; "noise" for the noise row
  std::string description;  ///< e.g. "{dark lum, red, blue}"
  std::size_t size = 0;
  double share_pct = 0.0;  ///< of all rows, noise included
};

/// One row per cluster (ascending label), plus a trailing noise row when noise exists.
/// Names come from the flags held by a strict majority of each cluster's members; if two
/// clusters would share a name, later ones get a "#<label>" suffix.
std::vector<ClusterStat> cluster_stats(const DescriptorTable& table, const Assignment& assignment);
std::string cluster_stats_csv(const std::vector<ClusterStat>& stats);

struct LuminosityCrossTab {
  int label = kNoise;
  std::string name;
  std::size_t count = 0;
  double frac_low = 0.0, frac_avg = 0.0, frac_high = 0.0;
};

/// Fraction of each cluster's members flagged low/average/high by a descriptor table with
/// lum_low/lum_avg/lum_high columns. Ids absent from the table are a PreconditionError.
std::vector<LuminosityCrossTab> luminosity_crosstab(const Assignment& assignment, const DescriptorTable& luminosity,
                                                    const std::vector<ClusterStat>& names = {});
std::string crosstab_csv(const std::vector<LuminosityCrossTab>& rows);

}  // namespace cardie
