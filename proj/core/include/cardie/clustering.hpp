#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardie/descriptor_table.hpp"

namespace cardie {

inline constexpr int kNoise = -1;

struct ClusterConfig {
  int m_min = 5;         ///< minimum cluster size; also the core-distance neighbor count
  double sigma_d = 0.0;  ///< columns with Bernoulli variance below this are dropped

  void validate() const;
  friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

struct FilteredTable {
  std::vector<BoolRow> rows;
  std::vector<std::string> kept_columns;
};

/// Drops every column with p (1 - p) < sigma_d. Throws ConfigError if nothing survives.
FilteredTable filter_descriptors(const DescriptorTable& table, double sigma_d);

/// 1 - |u and v| / |u or v|; 0 when both are all-false.
double jaccard_distance(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v);

struct HdbscanResult {
  std::vector<int> labels;  ///< cluster index per row, or kNoise
  int num_clusters = 0;
};

/// HDBSCAN over Jaccard distances: core distance at the m_min-th nearest neighbor
/// (not counting the point itself), minimum spanning tree of mutual reachability,
/// condensed tree with minimum cluster size m_min and excess-of-mass selection.
/// The root is never selected, except for the degenerate table whose rows are all
/// identical, which yields one cluster without noise.
/// Cluster indices are numbered by the first row that belongs to them.
HdbscanResult hdbscan(std::span<const BoolRow> rows, int m_min);

struct SilhouetteResult {
  double value = -1.0;
  bool valid = false;
};

/// Mean silhouette over non-noise rows with Jaccard distance; noise rows take no part.
/// Members of singleton clusters score 0. Fewer than two clusters -> {-1, false}.
SilhouetteResult silhouette_prime(std::span<const BoolRow> rows, std::span<const int> labels);
/// Same rule over an arbitrary symmetric distance.
SilhouetteResult silhouette_prime(std::size_t n, const std::function<double(std::size_t, std::size_t)>& distance,
                                  std::span<const int> labels);

struct ClusterModel {
  ClusterConfig config;
  std::vector<std::string> ids;
  std::vector<int> labels;
  int num_clusters = 0;
  double sc_prime = -1.0;
  bool valid = false;  ///< silhouette defined (at least two clusters)
  double noise_fraction = 0.0;
  std::vector<std::string> kept_descriptors;

  std::size_t noise_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

/// filter -> hdbscan -> silhouette for one configuration.
ClusterModel cluster_table(const DescriptorTable& table, const ClusterConfig& config);

struct GridSpec {
  std::vector<int> m_min_values;
  std::vector<double> sigma_d_values;

  std::size_t size() const noexcept { return m_min_values.size() * sigma_d_values.size(); }

  /// m_min: `m_min_count` evenly spaced integers over [max(5, ceil(0.005 N)), ceil(0.10 N)]
  /// (duplicates after rounding removed); sigma_d: `sigma_d_count` values evenly over [0, sigma_d_max].
  static GridSpec defaults(std::size_t n, int m_min_count = 20, int sigma_d_count = 10, double sigma_d_max = 0.09,
                           int m_min_lo = 0, int m_min_hi = 0);
};

struct GridPoint {
  ClusterConfig config;
  double sc_prime = -1.0;
  int num_clusters = 0;
  double noise_fraction = 0.0;
  bool valid = false;
  std::string error;  ///< why the point was skipped, if it was
};

struct GridSearchResult {
  std::vector<GridPoint> evaluated;  ///< m_min-major order
  ClusterModel best;
};

/// True when `a` should be preferred over `b`: higher SC', then lower noise fraction,
/// then fewer clusters, then smaller m_min, then smaller sigma_d.
bool better_point(const GridPoint& a, const GridPoint& b);

/// Evaluates every grid point (in parallel when jobs > 1) and returns the best valid model.
/// Throws NumericError when no grid point yields a valid clustering.
GridSearchResult grid_search(const DescriptorTable& table, const GridSpec& grid, unsigned jobs = 1);

}  // namespace cardie
