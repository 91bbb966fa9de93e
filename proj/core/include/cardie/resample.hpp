#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cardie/cluster_report.hpp"
#include "cardie/manifest.hpp"

namespace cardie {

enum class Stratify { none, cluster };

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  Stratify stratify = Stratify::none;

  void validate() const;
};

struct SplitResult {
  PairManifest train;
  PairManifest test;
};

/// floor(f N) entries go to train, the rest to test; both keep manifest order.
/// With Stratify::cluster, each cluster (noise counts as one more stratum) contributes in
/// proportion to its size, rounded by largest remainder.
SplitResult split(const PairManifest& manifest, const SplitSpec& spec, const Assignment* assignment = nullptr);

std::size_t train_size(std::size_t n, double train_fraction);

enum class Strategy { cardie, external, random };

Strategy parse_strategy(const std::string& text);
std::string to_string(Strategy strategy);

struct ResamplePlan {
  Strategy strategy = Strategy::cardie;
  int n_overs = 3;
  std::vector<int> minority_labels;  ///< empty: chosen by auto_minority
  /// false: each minority image appears n_overs times in total; true: n_overs extra copies.
  bool replicas_are_additional = false;
  std::uint64_t seed = 0;

  void validate() const;
  int total_copies() const { return replicas_are_additional ? n_overs + 1 : n_overs; }
};

/// Clusters whose share of the clustered (non-noise) points is below half the mean share;
/// if none, the single smallest (lowest label on ties).
std::vector<int> auto_minority(const Assignment& assignment);

/// Same rule over explicit shares; returns indices into `shares`.
std::vector<std::size_t> auto_minority_shares(const std::vector<double>& shares);

struct OversampleResult {
  PairManifest manifest;
  std::vector<int> minority_labels;
  std::size_t added_count = 0;
};

/// Replicates the members of the minority clusters; replicas get id "<id>#r<k>" and
/// replica_index k. The output order is shuffled with the plan seed.
OversampleResult oversample(const PairManifest& train, const Assignment& assignment, const ResamplePlan& plan);

/// Adds `added_count` entries drawn uniformly with replacement from the whole manifest,
/// then shuffles.
PairManifest random_oversample_matched(const PairManifest& train, std::size_t added_count, std::uint64_t seed);

/// Number of entries a plan adds for the given minority sizes.
std::size_t planned_additions(const std::vector<std::size_t>& minority_sizes, const ResamplePlan& plan);

struct ResampleReport {
  Strategy strategy = Strategy::cardie;
  std::uint64_t seed = 0;
  int n_overs = 3;
  bool replicas_are_additional = false;
  std::vector<int> minority_labels;
  std::vector<std::size_t> minority_sizes;  ///< members within the train split
  std::size_t input_size = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t added_count = 0;
  std::size_t output_size = 0;
};

std::string resample_report_json(const ResampleReport& report);

}  // namespace cardie
