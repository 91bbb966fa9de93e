#include "cardie/degrade.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"
#include "cardie/parallel.hpp"

namespace cardie {

void NoiseSpec::validate() const {
  for (const auto& r : {base_a, base_b, amplified_a, amplified_b}) {
    if (!(r.first >= 0.0 && r.first <= r.second)) throw ConfigError("noise ranges must be nonnegative and ordered");
  }
}

double sample_signal_dependent(double x, double a, double b, Rng& rng) {
  const double variance = a * x + b;
  if (variance <= 0.0) return x;
  return std::normal_distribution<double>(x, std::sqrt(variance))(rng);
}

NoisyImage noisify(const RgbImage& clean, double a, double b, Rng& rng) {
  if (a < 0.0 || b < 0.0) throw ArgumentError("noise parameters must be nonnegative");
  NoisyImage out{clean, 0.0};
  std::size_t clamped = 0;
  auto draw = [&](double& v) {
    const double s = sample_signal_dependent(v, a, b, rng);
    if (s < 0.0 || s > 1.0) ++clamped;
    v = std::clamp(s, 0.0, 1.0);
  };
  for (std::size_t i = 0; i < out.image.pixel_count(); ++i) {
    draw(out.image.r[i]);
    draw(out.image.g[i]);
    draw(out.image.b[i]);
  }
  if (clean.pixel_count() > 0) {
    out.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(3 * clean.pixel_count());
  }
  return out;
}

std::vector<int> least_represented(const Assignment& assignment, std::size_t count) {
  std::vector<std::pair<std::size_t, int>> sized;
  for (const auto& [label, n] : assignment.cluster_counts()) sized.emplace_back(n, label);
  std::sort(sized.begin(), sized.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < std::min(count, sized.size()); ++i) out.push_back(sized[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> file_stems(const std::vector<std::string>& ids) {
  std::vector<std::string> stems;
  std::set<std::string> used;
  for (const auto& id : ids) {
    std::string s;
    for (unsigned char c : id) s += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? char(c) : '_';
    if (s.empty() || s.front() == '.') s.insert(s.begin(), '_');
    std::string candidate = s;
    for (int k = 1; used.count(candidate); ++k) candidate = s + "_" + std::to_string(k);
    used.insert(candidate);
    stems.push_back(candidate);
  }
  return stems;
}

NoisyDataset build_noisy_dataset(const PairManifest& manifest, const Assignment& assignment, const NoiseSpec& spec,
                                 const std::filesystem::path& out_dir, const NoisifyOptions& options) {
  spec.validate();
  const auto labels = assignment.as_map();
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries()) {
    if (!labels.count(e.id)) missing.push_back(e.id);
  }
  if (!missing.empty()) {
    throw PreconditionError("cluster assignment lacks " + std::to_string(missing.size()) + " id(s), first '" +
                            missing.front() + "'");
  }
  const auto counts = assignment.cluster_counts();
  for (int l : spec.amplified_labels) {
    if (!counts.count(l)) throw ConfigError("amplified cluster " + std::to_string(l) + " does not exist");
  }
  const auto gt_missing = manifest.missing_gt();
  if (!gt_missing.empty()) {
    throw PreconditionError("pairs without ground truth: " + gt_missing.front() +
                            (gt_missing.size() > 1 ? " (+" + std::to_string(gt_missing.size() - 1) + " more)" : ""));
  }

  std::vector<std::string> ids;
  for (const auto& e : manifest.entries()) ids.push_back(e.id);
  const auto stems = file_stems(ids);
  const auto image_dir = out_dir / "images";
  std::filesystem::create_directories(image_dir);

  const std::size_t n = manifest.size();
  std::vector<NoiseRecord> records(n);
  std::vector<PairEntry> entries(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    const auto& e = manifest[i];
    const bool amplified = std::count(spec.amplified_labels.begin(), spec.amplified_labels.end(), labels.at(e.id)) > 0;
    const Range ra = amplified ? spec.amplified_a : spec.base_a;
    const Range rb = amplified ? spec.amplified_b : spec.base_b;
    auto rng = make_rng(spec.seed, e.id);
    const double a = std::uniform_real_distribution<double>(ra.first, ra.second)(rng);
    const double b = std::uniform_real_distribution<double>(rb.first, rb.second)(rng);
    const auto gt = std::filesystem::absolute(*manifest.gt_of(e)).lexically_normal();
    const auto noisy = noisify(load_image(gt, options.resolution, e.id), a, b, rng);
    const auto rel = std::filesystem::path("images") / (stems[i] + ".png");
    try {
      save_png(noisy.image, out_dir / rel, 8);
    } catch (const Error& err) {
      throw IoError("writing noisy image for '" + e.id + "': " + err.what());
    }
    records[i] = {e.id, a, b, noisy.clamped_fraction};
    PairEntry out = e;
    out.input_path = rel;
    out.gt_path = gt;
    entries[i] = std::move(out);
  });
  return {PairManifest(std::move(entries), out_dir), std::move(records)};
}

std::string noise_records_csv(const std::vector<NoiseRecord>& records) {
  csv::Writer w({"id", "a", "b", "clamped_fraction"});
  for (const auto& r : records) {
    w.add({r.id, csv::format_double(r.a), csv::format_double(r.b), csv::format_double(r.clamped_fraction)});
  }
  return w.str();
}

}  // namespace cardie
