#include "cardie/resample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cardie/error.hpp"
#include "cardie/random.hpp"

namespace cardie {

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
}

std::size_t train_size(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
}

namespace {

PairManifest pick(const PairManifest& m, const std::vector<bool>& keep, bool value) {
  std::vector<PairEntry> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (keep[i] == value) out.push_back(m[i]);
  }
  return PairManifest(std::move(out), m.source_root());
}

}  // namespace

SplitResult split(const PairManifest& manifest, const SplitSpec& spec, const Assignment* assignment) {
  spec.validate();
  const std::size_t n = manifest.size();
  if (n < 4) throw ArgumentError("split needs at least 4 entries, got " + std::to_string(n));
  const std::size_t n_train = train_size(n, spec.train_fraction);
  auto rng = make_rng(spec.seed, "split");
  std::vector<bool> in_train(n, false);

  if (spec.stratify == Stratify::none) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
  } else {
    if (!assignment) throw ConfigError("stratified split needs a cluster assignment");
    const auto labels = assignment->as_map();
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = labels.find(manifest[i].id);
      if (it == labels.end()) throw PreconditionError("cluster assignment lacks id '" + manifest[i].id + "'");
      strata[it->second].push_back(i);
    }
    // Largest-remainder allocation of n_train across strata.
    std::vector<std::pair<int, std::size_t>> quota;
    std::vector<std::pair<double, int>> remainders;
    std::size_t allocated = 0;
    for (const auto& [label, members] : strata) {
      const double exact = static_cast<double>(members.size()) * static_cast<double>(n_train) / static_cast<double>(n);
      const auto base = static_cast<std::size_t>(std::floor(exact));
      quota.emplace_back(label, base);
      remainders.emplace_back(exact - static_cast<double>(base), label);
      allocated += base;
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::map<int, std::size_t> take(quota.begin(), quota.end());
    for (std::size_t k = 0; allocated < n_train; ++k, ++allocated) ++take[remainders[k].second];
    for (auto& [label, members] : strata) {
      std::shuffle(members.begin(), members.end(), rng);
      for (std::size_t i = 0; i < take[label]; ++i) in_train[members[i]] = true;
    }
  }
  return {pick(manifest, in_train, true), pick(manifest, in_train, false)};
}

Strategy parse_strategy(const std::string& text) {
  if (text == "cardie") return Strategy::cardie;
  if (text == "external") return Strategy::external;
  if (text == "random") return Strategy::random;
  throw ConfigError("unknown strategy '" + text + "' (expected cardie, external or random)");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::cardie: return "cardie";
    case Strategy::external: return "external";
    case Strategy::random: return "random";
  }
  return "?";
}

void ResamplePlan::validate() const {
  if (n_overs < 1) throw ConfigError("n_overs must be >= 1");
}

std::vector<std::size_t> auto_minority_shares(const std::vector<double>& shares) {
  if (shares.size() < 2) throw ArgumentError("minority selection needs at least two clusters");
  const double mean = std::accumulate(shares.begin(), shares.end(), 0.0) / static_cast<double>(shares.size());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (shares[i] < 0.5 * mean) out.push_back(i);
  }
  if (out.empty()) out.push_back(static_cast<std::size_t>(std::min_element(shares.begin(), shares.end()) - shares.begin()));
  return out;
}

std::vector<int> auto_minority(const Assignment& assignment) {
  const auto counts = assignment.cluster_counts();
  std::vector<int> labels;
  std::vector<double> shares;
  for (const auto& [label, n] : counts) {
    labels.push_back(label);
    shares.push_back(static_cast<double>(n));
  }
  std::vector<int> out;
  for (auto i : auto_minority_shares(shares)) out.push_back(labels[i]);
  return out;
}

std::size_t planned_additions(const std::vector<std::size_t>& minority_sizes, const ResamplePlan& plan) {
  const auto members = std::accumulate(minority_sizes.begin(), minority_sizes.end(), std::size_t{0});
  return members * static_cast<std::size_t>(plan.total_copies() - 1);
}

namespace {

PairEntry replica(const PairEntry& e, int k) {
  PairEntry r = e;
  r.id = e.id + "#r" + std::to_string(k);
  r.replica_index = k;
  return r;
}

}  // namespace

OversampleResult oversample(const PairManifest& train, const Assignment& assignment, const ResamplePlan& plan) {
  plan.validate();
  const auto labels = assignment.as_map();
  std::map<int, std::size_t> in_train;
  for (const auto& e : train.entries()) {
    const auto it = labels.find(e.id);
    if (it == labels.end()) throw PreconditionError("cluster assignment lacks train id '" + e.id + "'");
    if (it->second != kNoise) ++in_train[it->second];
  }

  OversampleResult out;
  out.minority_labels = plan.minority_labels;
  if (out.minority_labels.empty()) {
    Assignment restricted;
    for (const auto& e : train.entries()) {
      restricted.ids.push_back(e.id);
      restricted.labels.push_back(labels.at(e.id));
    }
    out.minority_labels = auto_minority(restricted);
  }
  std::sort(out.minority_labels.begin(), out.minority_labels.end());
  out.minority_labels.erase(std::unique(out.minority_labels.begin(), out.minority_labels.end()), out.minority_labels.end());
  for (int l : out.minority_labels) {
    if (!in_train.count(l)) throw ConfigError("minority cluster " + std::to_string(l) + " has no members in the train split");
  }

  std::vector<PairEntry> entries;
  for (const auto& e : train.entries()) {
    entries.push_back(e);
    const int label = labels.at(e.id);
    if (!std::binary_search(out.minority_labels.begin(), out.minority_labels.end(), label)) continue;
    for (int k = 1; k < plan.total_copies(); ++k) {
      entries.push_back(replica(e, k));
      ++out.added_count;
    }
  }
  auto rng = make_rng(plan.seed, "oversample");
  std::shuffle(entries.begin(), entries.end(), rng);
  out.manifest = PairManifest(std::move(entries), train.source_root());
  return out;
}

PairManifest random_oversample_matched(const PairManifest& train, std::size_t added_count, std::uint64_t seed) {
  if (train.empty()) throw ArgumentError("cannot oversample an empty manifest");
  auto rng = make_rng(seed, "random-oversample");
  std::vector<PairEntry> entries(train.entries());
  std::vector<int> copies(train.size(), 0);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  for (std::size_t k = 0; k < added_count; ++k) {
    const auto i = pick(rng);
    entries.push_back(replica(train[i], ++copies[i]));
  }
  std::shuffle(entries.begin(), entries.end(), rng);
  return PairManifest(std::move(entries), train.source_root());
}

std::string resample_report_json(const ResampleReport& r) {
  nlohmann::ordered_json j;
  j["strategy"] = to_string(r.strategy);
  j["seed"] = r.seed;
  j["n_overs"] = r.n_overs;
  j["replicas_are_additional"] = r.replicas_are_additional;
  j["minority_labels"] = r.minority_labels;
  j["minority_sizes"] = r.minority_sizes;
  j["input_size"] = r.input_size;
  j["train_size"] = r.train_size;
  j["test_size"] = r.test_size;
  j["added_count"] = r.added_count;
  j["output_size"] = r.output_size;
  return j.dump(2) + "\n";
}

}  // namespace cardie
