#include "cardie_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "cardie/cluster_report.hpp"
#include "cardie/clustering.hpp"
#include "cardie/colormath.hpp"
#include "cardie/csv.hpp"
#include "cardie/degrade.hpp"
#include "cardie/descriptor_table.hpp"
#include "cardie/descriptors.hpp"
#include "cardie/error.hpp"
#include "cardie/fitquant.hpp"
#include "cardie/manifest.hpp"
#include "cardie/parallel.hpp"
#include "cardie/random.hpp"
#include "cardie/resample.hpp"
#include "cardie/stats.hpp"
#include "output.hpp"

namespace cardie::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string manifest;
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string target = "input";
  std::string drop_labels;
  std::string source_root;
};

struct DescriptorsArgs {
  int resolution = kDefaultAnalysisResolution;
  std::size_t k = 100;
  int hue_bins = kDefaultHueBins;
  double chroma_eps = kDefaultChromaEpsilon;
  std::string hue_mode = "opponent";
  std::string anchors = ColorAnchors::defaults().to_spec();
  double delta_theta = std::numbers::pi / 6.0;
  bool partial = false;
  bool from_labels = false;
  std::string label_keys;
};

struct ClusterArgs {
  std::string descriptors;
  int m_min_count = 20;
  int sigma_d_count = 10;
  double sigma_d_max = 0.09;
  int m_min_lo = 0;
  int m_min_hi = 0;
  int m_min = 0;
  double sigma_d = -1.0;
};

struct FitArgs {
  int resolution = kDefaultAnalysisResolution;
  std::size_t pixels = 100;
  double gamma_min = 1e-2, gamma_max = 10.0;
  double mu_min = 1e-3, mu_max = 1.5;
  int max_iter = 2000;
  double tolerance = 1e-10;
  int window = kDefaultVarianceWindow;
};

struct IndicatorsArgs {
  std::string fits;
  std::string variance;
  std::string grouping = "cardie";
  std::string assignments;
  std::string descriptors;
  double alpha = kDefaultAlpha;
  std::size_t min_group_size = kDefaultMinGroupSize;
  bool dump_histograms = false;
  int bins = 20;
};

struct NoisifyArgs {
  std::string assignments;
  std::string amplify = "auto";
  std::size_t amplify_count = 2;
  std::string base_a = "0.3,0.5", base_b = "0.1,0.2";
  std::string amplified_a = "0.6,1.0", amplified_b = "0.2,0.4";
  int resolution = 0;
};

struct ResampleArgs {
  std::string assignments;
  std::string strategy = "cardie";
  int n_overs = 3;
  bool additional = false;
  std::string minority = "auto";
  double train_fraction = 0.75;
  std::string stratify = "none";
  long long added_count = -1;
};

struct ReportArgs {
  std::string assignments;
  std::string descriptors;
  std::string cluster_table;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream s(text);
  while (std::getline(s, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_labels(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw ConfigError("'" + s + "' is not a cluster label");
    }
  }
  return out;
}

Range parse_range(const std::string& text, const std::string& what) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError(what + " must be 'lo,hi'");
  try {
    return {csv::parse_double(parts[0]), csv::parse_double(parts[1])};
  } catch (const Error&) {
    throw ConfigError(what + " must be 'lo,hi'");
  }
}

void require(const std::string& value, const std::string& flag, const std::string& command) {
  if (value.empty()) throw ArgumentError(command + " requires " + flag);
}

PairManifest load(const Common& c, const std::string& command) {
  require(c.manifest, "--manifest", command);
  ManifestLoadOptions opts;
  opts.drop_labels = split_list(c.drop_labels);
  if (!c.source_root.empty()) opts.source_root = fs::path(c.source_root);
  return load_manifest(c.manifest, opts);
}

std::vector<std::pair<std::string, fs::path>> image_list(const PairManifest& m, bool gt) {
  std::vector<std::pair<std::string, fs::path>> out;
  for (const auto& e : m.entries()) {
    if (gt) {
      if (auto p = m.gt_of(e)) out.emplace_back(e.id, *p);
    } else {
      out.emplace_back(e.id, m.input_of(e));
    }
  }
  return out;
}

/// Effective value of every option of the subcommand, defaults included.
Json options_json(const CLI::App& sub) {
  Json j = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out") continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->reduced_results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    j[name] = value;
  }
  return j;
}

Json config_json(const CLI::App& sub, Json derived) {
  return Json{{"command", sub.get_name()}, {"options", options_json(sub)}, {"derived", std::move(derived)}};
}

// ----------------------------------------------------------------------------- descriptors

void cmd_descriptors(const CLI::App& sub, const Common& c, const DescriptorsArgs& a, std::ostream& err) {
  const auto manifest = load(c, "descriptors");
  require(c.out, "--out", "descriptors");
  OutputDir out(c.out, "descriptors");
  out.add_input("manifest", c.manifest);
  Json derived;

  if (a.from_labels) {
    const auto table = table_from_labels(manifest, split_list(a.label_keys));
    out.table("descriptors.csv", descriptor_table_csv(table), "one-hot flags from manifest label columns");
    derived["columns"] = table.columns;
    out.finish(config_json(sub, derived));
    return;
  }

  DescriptorOptions opts;
  opts.resolution = a.resolution;
  opts.hue_bins = a.hue_bins;
  opts.chroma_epsilon = a.chroma_eps;
  opts.hue_mode = parse_hue_mode(a.hue_mode);
  opts.target = parse_image_target(c.target);
  opts.jobs = c.jobs;
  opts.partial = a.partial;
  if (a.resolution < 1) throw ConfigError("resolution must be positive");
  auto anchors = ColorAnchors::parse(a.anchors, a.delta_theta);
  anchors.validate();
  if (a.k < 1) throw ConfigError("K must be >= 1");
  if (opts.target == ImageTarget::gt) {
    const auto missing = manifest.missing_gt();
    if (!missing.empty()) throw PreconditionError("--target gt but pairs lack ground truth, first '" + missing.front() + "'");
  }

  const std::size_t k = std::min(a.k, manifest.size());
  if (k < a.k) {
    err << "warning: K=" << a.k << " exceeds the manifest size; using K=" << k << "\n";
  }
  out.add_images(to_string(opts.target) + "_images", image_list(manifest, opts.target == ImageTarget::gt), c.jobs);

  const auto stats = dataset_thresholds(manifest, k, derive_seed(c.seed, "thresholds"), opts);
  const auto run = build_descriptor_table(manifest, stats, anchors, opts);
  const auto table = to_table(run.vectors, anchors);
  out.table("descriptors.csv", descriptor_table_csv(table), "per-image luminosity one-hot and dominant-color flags");

  Json thr{{"low_threshold", stats.low_threshold},
           {"high_threshold", stats.high_threshold},
           {"k", stats.k},
           {"k_requested", a.k},
           {"seed", stats.seed},
           {"sampled_ids", stats.sampled_ids}};
  out.json("thresholds.json", thr);
  if (!run.failures.empty()) {
    csv::Writer w({"id", "message"});
    for (const auto& f : run.failures) w.add({f.id, f.message});
    out.table("failures.csv", w.str(), "images skipped in partial mode");
    err << "warning: " << run.failures.size() << " image(s) failed and were skipped\n";
  }
  derived["k_effective"] = k;
  derived["anchors"] = anchors.to_spec();
  derived["delta_theta"] = anchors.delta_theta;
  derived["low_threshold"] = stats.low_threshold;
  derived["high_threshold"] = stats.high_threshold;
  derived["failures"] = run.failures.size();
  out.finish(config_json(sub, derived));
}

// ----------------------------------------------------------------------------- cluster

void cmd_cluster(const CLI::App& sub, const Common& c, const ClusterArgs& a, std::ostream&) {
  require(a.descriptors, "--descriptors", "cluster");
  require(c.out, "--out", "cluster");
  const auto table = read_descriptor_table(a.descriptors);
  OutputDir out(c.out, "cluster");
  out.add_input("descriptors", a.descriptors);

  auto grid = GridSpec::defaults(table.size(), a.m_min_count, a.sigma_d_count, a.sigma_d_max, a.m_min_lo, a.m_min_hi);
  if (a.m_min > 0) grid.m_min_values = {a.m_min};
  if (a.sigma_d >= 0.0) grid.sigma_d_values = {a.sigma_d};
  const auto result = grid_search(table, grid, c.jobs);
  const auto& best = result.best;
  const auto assignment = Assignment::from_model(best);

  out.table("assignments.csv", assignment_csv(assignment), "cluster label per id; -1 marks noise");
  out.table("sweep.csv", sweep_csv(result), "every evaluated (m_min, sigma_d) grid point");
  out.table("cluster_stats.csv", cluster_stats_csv(cluster_stats(table, assignment)), "cluster names, sizes and shares");
  Json model{{"m_min", best.config.m_min},
             {"sigma_d", best.config.sigma_d},
             {"num_clusters", best.num_clusters},
             {"sc_prime", best.sc_prime},
             {"noise_fraction", best.noise_fraction},
             {"rows", best.ids.size()},
             {"kept_descriptors", best.kept_descriptors}};
  out.json("model.json", model);
  out.finish(config_json(sub, Json{{"m_min_values", grid.m_min_values}, {"sigma_d_values", grid.sigma_d_values}}));
}

// ----------------------------------------------------------------------------- fit

void cmd_fit(const CLI::App& sub, const Common& c, const FitArgs& a, std::ostream&) {
  const auto manifest = load(c, "fit");
  require(c.out, "--out", "fit");
  const auto missing = manifest.missing_gt();
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) list += ", ...";
    throw PreconditionError(std::to_string(missing.size()) + " pair(s) lack a ground-truth path: " + list);
  }
  FitConfig cfg;
  cfg.pixels = a.pixels;
  cfg.seed = c.seed;
  cfg.gamma_bounds = {a.gamma_min, a.gamma_max};
  cfg.mu_bounds = {a.mu_min, a.mu_max};
  cfg.max_iter = a.max_iter;
  cfg.tolerance = a.tolerance;
  cfg.validate();
  if (a.resolution < 1) throw ConfigError("resolution must be positive");

  OutputDir out(c.out, "fit");
  out.add_input("manifest", c.manifest);
  out.add_images("input_images", image_list(manifest, false), c.jobs);
  out.add_images("gt_images", image_list(manifest, true), c.jobs);

  std::vector<FitParams> fits(manifest.size());
  std::vector<VarianceDelta> vars(manifest.size());
  parallel_for(manifest.size(), c.jobs, [&](std::size_t i) {
    const auto& e = manifest[i];
    const auto lin = luminance(load_image(manifest.input_of(e), a.resolution, e.id));
    const auto lgt = luminance(load_image(*manifest.gt_of(e), a.resolution, e.id));
    const auto samples = sample_pixels(lin, lgt, cfg.pixels, derive_seed(c.seed, e.id));
    fits[i] = fit_pair(samples, cfg);
    fits[i].id = e.id;
    vars[i] = variance_delta(lin, lgt, a.window);
    vars[i].id = e.id;
  });
  const auto nonconverged = std::count_if(fits.begin(), fits.end(), [](const FitParams& f) { return !f.converged; });
  out.table("fits.csv", fits_csv(fits), "tone-curve fit per pair");
  out.table("variance.csv", variances_csv(vars), "mean local variance of input and processed luminance");
  out.finish(config_json(sub, Json{{"pairs", manifest.size()}, {"non_converged", nonconverged}}));
}

// ----------------------------------------------------------------------------- indicators

void cmd_indicators(const CLI::App& sub, const Common& c, const IndicatorsArgs& a, std::ostream& err) {
  require(c.out, "--out", "indicators");
  if (a.fits.empty() && a.variance.empty()) throw ArgumentError("indicators requires --fits and/or --variance");
  OutputDir out(c.out, "indicators");
  std::vector<FitParams> fits;
  std::vector<VarianceDelta> vars;
  if (!a.fits.empty()) {
    out.add_input("fits", a.fits);
    fits = parse_fits_csv(read_file(a.fits));
  }
  if (!a.variance.empty()) {
    out.add_input("variance", a.variance);
    vars = parse_variances_csv(read_file(a.variance));
  }

  std::vector<std::pair<std::string, std::string>> grouping;
  std::vector<std::string> order;
  if (a.grouping == "cardie") {
    require(a.assignments, "--assignments", "indicators --grouping cardie");
    out.add_input("assignments", a.assignments);
    const auto asg = read_assignment(a.assignments);
    for (std::size_t i = 0; i < asg.size(); ++i) {
      if (asg.labels[i] != kNoise) grouping.emplace_back(asg.ids[i], std::to_string(asg.labels[i]));
    }
  } else if (a.grouping == "luminosity") {
    require(a.descriptors, "--descriptors", "indicators --grouping luminosity");
    out.add_input("descriptors", a.descriptors);
    const auto table = read_descriptor_table(a.descriptors);
    const int cols[] = {table.column("lum_low"), table.column("lum_avg"), table.column("lum_high")};
    const char* names[] = {"low", "average", "high"};
    for (int col : cols) {
      if (col < 0) throw SchemaError("descriptor table lacks lum_low/lum_avg/lum_high columns");
    }
    order = {"low", "average", "high"};
    for (std::size_t i = 0; i < table.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        if (table.rows[i][static_cast<std::size_t>(cols[k])]) grouping.emplace_back(table.ids[i], names[k]);
      }
    }
  } else if (a.grouping.rfind("external:", 0) == 0) {
    const std::string key = a.grouping.substr(9);
    if (key.empty()) throw ConfigError("--grouping external:<column> needs a column name");
    const auto manifest = load(c, "indicators --grouping external");
    out.add_input("manifest", c.manifest);
    for (const auto& e : manifest.entries()) {
      const auto it = e.labels.find(key);
      if (it == e.labels.end()) throw SchemaError("manifest has no label column '" + key + "'");
      grouping.emplace_back(e.id, it->second);
    }
  } else {
    throw ConfigError("unknown grouping '" + a.grouping + "' (expected cardie, luminosity or external:<column>)");
  }

  const auto set = collect_distributions(fits, vars, grouping, order);
  for (const auto& w : set.warnings) err << "warning: " << w << "\n";

  csv::Writer groups({"group", "pairs", "gamma_mu_values", "delta_sigma_values", "excluded_nonconverged"});
  for (const auto& g : set.groups) {
    groups.add({g.name, std::to_string(g.ids.size()), std::to_string(g.gammas.size()), std::to_string(g.sigmas.size()),
                std::to_string(g.excluded_nonconverged)});
  }
  out.table("groups.csv", groups.str(), "pairs per group and values entering each distribution");

  Json warnings = set.warnings;
  if (!fits.empty()) {
    const auto m = indicator_matrix_tm(set.groups, a.alpha, a.min_group_size);
    out.text("indicator_tm.json", indicator_json(m));
    out.table("indicator_tm.csv", indicator_csv(m), "tone-mapping indicator: KS on gamma or mu");
    for (const auto& w : m.warnings) warnings.push_back(w);
  }
  if (!vars.empty()) {
    const auto m = indicator_matrix_dn(set.groups, a.alpha, a.min_group_size);
    out.text("indicator_dn.json", indicator_json(m));
    out.table("indicator_dn.csv", indicator_csv(m), "denoising indicator: KS on local-variance deltas");
    for (const auto& w : m.warnings) warnings.push_back(w);
  }
  if (a.dump_histograms) {
    out.table("distributions.csv", distributions_csv(set), "raw per-group parameter values");
    out.table("histograms.csv", distribution_histograms_csv(set, a.bins), "per-group histograms on shared bin edges");
  }
  out.finish(config_json(sub, Json{{"groups", set.groups.size()}, {"warnings", warnings}}));
}

// ----------------------------------------------------------------------------- noisify

void cmd_noisify(const CLI::App& sub, const Common& c, const NoisifyArgs& a, std::ostream&) {
  const auto manifest = load(c, "noisify");
  require(c.out, "--out", "noisify");
  require(a.assignments, "--assignments", "noisify");
  const auto asg = read_assignment(a.assignments);

  NoiseSpec spec;
  spec.base_a = parse_range(a.base_a, "--base-a");
  spec.base_b = parse_range(a.base_b, "--base-b");
  spec.amplified_a = parse_range(a.amplified_a, "--amplified-a");
  spec.amplified_b = parse_range(a.amplified_b, "--amplified-b");
  spec.seed = c.seed;
  if (a.amplify == "auto") {
    spec.amplified_labels = least_represented(asg, a.amplify_count);
  } else if (a.amplify != "none") {
    spec.amplified_labels = parse_labels(a.amplify);
  }
  spec.validate();

  OutputDir out(c.out, "noisify");
  out.add_input("manifest", c.manifest);
  out.add_input("assignments", a.assignments);
  out.add_images("gt_images", image_list(manifest, true), c.jobs);
  const auto result = build_noisy_dataset(manifest, asg, spec, out.path(), {a.resolution, c.jobs});
  out.table("manifest.csv", manifest_to_csv(result.manifest), "noisy inputs paired with the clean ground truth");
  out.table("noise.csv", noise_records_csv(result.records), "noise parameters drawn per pair");
  out.finish(config_json(sub, Json{{"amplified_labels", spec.amplified_labels}}));
}

// ----------------------------------------------------------------------------- resample

void cmd_resample(const CLI::App& sub, const Common& c, const ResampleArgs& a, std::ostream&) {
  const auto manifest = load(c, "resample");
  require(c.out, "--out", "resample");
  SplitSpec split_spec;
  split_spec.train_fraction = a.train_fraction;
  split_spec.seed = derive_seed(c.seed, "split");
  if (a.stratify == "cluster") {
    split_spec.stratify = Stratify::cluster;
  } else if (a.stratify != "none") {
    throw ConfigError("--stratify must be none or cluster");
  }
  ResamplePlan plan;
  plan.strategy = parse_strategy(a.strategy);
  plan.n_overs = a.n_overs;
  plan.replicas_are_additional = a.additional;
  plan.seed = derive_seed(c.seed, "oversample");
  if (a.minority != "auto") plan.minority_labels = parse_labels(a.minority);
  plan.validate();

  OutputDir out(c.out, "resample");
  out.add_input("manifest", c.manifest);
  std::optional<Assignment> asg;
  const bool need_assignment = plan.strategy != Strategy::random || a.added_count < 0 || split_spec.stratify == Stratify::cluster;
  if (need_assignment) {
    require(a.assignments, "--assignments", "resample");
    asg = read_assignment(a.assignments);
    out.add_input("assignments", a.assignments);
  }

  const auto parts = split(manifest, split_spec, asg ? &*asg : nullptr);
  ResampleReport report;
  report.strategy = plan.strategy;
  report.seed = c.seed;
  report.n_overs = plan.n_overs;
  report.replicas_are_additional = plan.replicas_are_additional;
  report.input_size = manifest.size();
  report.train_size = parts.train.size();
  report.test_size = parts.test.size();

  PairManifest train;
  if (plan.strategy == Strategy::random && a.added_count >= 0) {
    report.added_count = static_cast<std::size_t>(a.added_count);
    train = random_oversample_matched(parts.train, report.added_count, derive_seed(c.seed, "random"));
  } else {
    const auto ref = oversample(parts.train, *asg, plan);
    report.minority_labels = ref.minority_labels;
    const auto labels = asg->as_map();
    for (int l : ref.minority_labels) {
      report.minority_sizes.push_back(static_cast<std::size_t>(std::count_if(
          parts.train.entries().begin(), parts.train.entries().end(),
          [&](const PairEntry& e) { return labels.at(e.id) == l; })));
    }
    report.added_count = ref.added_count;
    train = plan.strategy == Strategy::random
                ? random_oversample_matched(parts.train, ref.added_count, derive_seed(c.seed, "random"))
                : ref.manifest;
  }
  report.output_size = train.size();
  out.table("train.csv", manifest_to_csv(train, true), "resampled training manifest");
  out.table("test.csv", manifest_to_csv(parts.test, true), "held-out test manifest");
  out.text("resample_report.json", resample_report_json(report));
  out.finish(config_json(sub, Json{{"added_count", report.added_count}, {"minority_labels", report.minority_labels}}));
}

// ----------------------------------------------------------------------------- report

void cmd_report(const CLI::App& sub, const Common& c, const ReportArgs& a, std::ostream&) {
  require(c.out, "--out", "report");
  require(a.assignments, "--assignments", "report");
  const std::string names_path = a.cluster_table.empty() ? a.descriptors : a.cluster_table;
  require(names_path, "--descriptors or --cluster-table", "report");
  OutputDir out(c.out, "report");
  out.add_input("assignments", a.assignments);
  const auto asg = read_assignment(a.assignments);
  out.add_input("cluster_table", names_path);
  const auto names_table = read_descriptor_table(names_path);
  const auto stats = cluster_stats(names_table, asg);
  out.table("cluster_stats.csv", cluster_stats_csv(stats), "cluster names, sizes and shares");
  if (!a.descriptors.empty()) {
    if (a.descriptors != names_path) out.add_input("descriptors", a.descriptors);
    const auto lum = a.descriptors == names_path ? names_table : read_descriptor_table(a.descriptors);
    out.table("crosstab.csv", crosstab_csv(luminosity_crosstab(asg, lum, stats)),
              "share of low/average/high luminosity images per cluster");
  }
  out.finish(config_json(sub, Json::object()));
}

// ----------------------------------------------------------------------------- plumbing

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    if (line[first] == '[') continue;  // sections are accepted and ignored
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(n) + ": expected key = value");
    auto key = line.substr(first, eq - first);
    auto value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t") + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(n) + ": empty key");
    out[key] = value;
  }
  return out;
}

/// Inserts "--key=value" for config-file entries the command line does not set.
std::vector<std::string> apply_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = args.size();
  const CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto* s : app.get_subcommands({})) {
      if (s->get_name() == args[i]) {
        sub_pos = i;
        sub = s;
        break;
      }
    }
    if (sub) break;
  }
  if (!sub) return args;
  std::string config;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;

  auto given = [&](const std::string& key) {
    return std::any_of(args.begin() + static_cast<long>(sub_pos) + 1, args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config)) {
    if (key == "config" || key == "out") throw ConfigError("'" + key + "' cannot be set from a config file");
    if (!sub->get_option_no_throw("--" + key)) {
      const auto subs = app.get_subcommands({});
      const bool known = std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) {
        return s->get_option_no_throw("--" + key) != nullptr;
      });
      if (!known) throw ConfigError("unknown config key '" + key + "'");
      continue;
    }
    if (!given(key)) injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + static_cast<long>(sub_pos) + 1, injected.begin(), injected.end());
  return args;
}

void error_report(std::ostream& err, const Common& common, int code, const std::string& kind,
                  const std::string& tag, const std::string& message, const std::string& entry_id = {}) {
  Json j{{"error", {{"kind", kind}, {"code", tag}, {"message", message}}}, {"exit_code", code}};
  if (!entry_id.empty()) j["error"]["entry_id"] = entry_id;
  err << j.dump() << "\n";
  if (!common.out.empty()) {
    try {
      write_file(fs::path(common.out) / "error.json", j.dump(2) + "\n");
    } catch (...) {
    }
  }
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

void add_common(CLI::App* sub, Common& c, bool manifest, bool target) {
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--config", c.config, "key = value config file; command-line flags take precedence");
  sub->add_option("--seed", c.seed, "Base seed; every random stage derives its own stream from it");
  sub->add_option("--jobs", c.jobs, "Worker threads for per-image stages")->check(CLI::PositiveNumber);
  if (manifest) {
    sub->add_option("--manifest", c.manifest, "Pair manifest (CSV or JSON)");
    sub->add_option("--drop-label", c.drop_labels, "Comma-separated label columns to discard");
    sub->add_option("--source-root", c.source_root, "Root for relative image paths (default: manifest directory)");
  }
  if (target) sub->add_option("--target", c.target, "Images to analyse: input or gt")->check(CLI::IsMember({"input", "gt"}));
}

}  // namespace

int run(const std::vector<std::string>& arguments, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustering and operator analysis for image-enhancement datasets", "cardie"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(CARDIE_VERSION));

  Common common;
  DescriptorsArgs da;
  ClusterArgs ca;
  FitArgs fa;
  IndicatorsArgs ia;
  NoisifyArgs na;
  ResampleArgs ra;
  ReportArgs pa;

  auto* desc = app.add_subcommand("descriptors", "Luminosity and dominant-color flags per image");
  add_common(desc, common, true, true);
  desc->add_option("--resolution", da.resolution, "Analysis grid side length");
  desc->add_option("--k", da.k, "Images sampled for the luminance thresholds");
  desc->add_option("--hue-bins", da.hue_bins, "Hue histogram bins");
  desc->add_option("--chroma-eps", da.chroma_eps, "Pixels with lower chroma carry no hue");
  desc->add_option("--hue-mode", da.hue_mode, "opponent or standard")->check(CLI::IsMember({"opponent", "standard"}));
  desc->add_option("--anchors", da.anchors, "name:radians,... candidate dominant colors");
  desc->add_option("--delta-theta", da.delta_theta, "Hue interval width per anchor (radians)");
  desc->add_flag("--partial", da.partial, "Skip undecodable images instead of failing");
  desc->add_flag("--from-labels", da.from_labels, "One-hot encode manifest label columns instead of reading images");
  desc->add_option("--label-keys", da.label_keys, "Label columns used by --from-labels (default: all)");

  auto* clus = app.add_subcommand("cluster", "Grid-searched density clustering of a flag table");
  add_common(clus, common, false, false);
  clus->add_option("--descriptors", ca.descriptors, "Descriptor or external flag table (CSV)");
  clus->add_option("--m-min-count", ca.m_min_count, "Grid points along m_min");
  clus->add_option("--sigma-d-count", ca.sigma_d_count, "Grid points along sigma_d");
  clus->add_option("--sigma-d-max", ca.sigma_d_max, "Largest sigma_d on the grid");
  clus->add_option("--m-min-lo", ca.m_min_lo, "Smallest m_min (0: automatic)");
  clus->add_option("--m-min-hi", ca.m_min_hi, "Largest m_min (0: automatic)");
  clus->add_option("--m-min", ca.m_min, "Fix m_min instead of searching (0: search)");
  clus->add_option("--sigma-d", ca.sigma_d, "Fix sigma_d instead of searching (negative: search)");

  auto* fit = app.add_subcommand("fit", "Tone-curve fit and local-variance delta per pair");
  add_common(fit, common, true, false);
  fit->add_option("--resolution", fa.resolution, "Analysis grid side length");
  fit->add_option("--pixels", fa.pixels, "Pixels sampled per pair");
  fit->add_option("--gamma-min", fa.gamma_min, "Lower bound on gamma");
  fit->add_option("--gamma-max", fa.gamma_max, "Upper bound on gamma");
  fit->add_option("--mu-min", fa.mu_min, "Lower bound on mu");
  fit->add_option("--mu-max", fa.mu_max, "Upper bound on mu");
  fit->add_option("--max-iter", fa.max_iter, "Simplex iterations per start");
  fit->add_option("--tolerance", fa.tolerance, "Simplex size tolerance (log units)");
  fit->add_option("--window", fa.window, "Local variance window side");

  auto* ind = app.add_subcommand("indicators", "KS indicator matrices between groups");
  add_common(ind, common, true, false);
  ind->add_option("--fits", ia.fits, "Fit table from `fit`");
  ind->add_option("--variance", ia.variance, "Variance table from `fit`");
  ind->add_option("--grouping", ia.grouping, "cardie, luminosity or external:<column>");
  ind->add_option("--assignments", ia.assignments, "Cluster assignment (for --grouping cardie)");
  ind->add_option("--descriptors", ia.descriptors, "Descriptor table (for --grouping luminosity)");
  ind->add_option("--alpha", ia.alpha, "KS significance level");
  ind->add_option("--min-group-size", ia.min_group_size, "Smaller groups give undefined cells");
  ind->add_flag("--dump-histograms", ia.dump_histograms, "Also write raw distributions and histograms");
  ind->add_option("--bins", ia.bins, "Histogram bins for --dump-histograms");

  auto* noi = app.add_subcommand("noisify", "Synthetic signal-dependent noisy dataset");
  add_common(noi, common, true, false);
  noi->add_option("--assignments", na.assignments, "Cluster assignment of the clean dataset");
  noi->add_option("--amplify", na.amplify, "Amplified cluster labels: auto, none or a comma list");
  noi->add_option("--amplify-count", na.amplify_count, "Clusters chosen by --amplify auto");
  noi->add_option("--base-a", na.base_a, "lo,hi");
  noi->add_option("--base-b", na.base_b, "lo,hi");
  noi->add_option("--amplified-a", na.amplified_a, "lo,hi");
  noi->add_option("--amplified-b", na.amplified_b, "lo,hi");
  noi->add_option("--resolution", na.resolution, "Resize before adding noise (0: native size)");

  auto* res = app.add_subcommand("resample", "Train/test split and oversampled training manifest");
  add_common(res, common, true, false);
  res->add_option("--assignments", ra.assignments, "Cluster assignment (CARDIE or clustered external labels)");
  res->add_option("--strategy", ra.strategy, "cardie, external or random")
      ->check(CLI::IsMember({"cardie", "external", "random"}));
  res->add_option("--n-overs", ra.n_overs, "Replication factor");
  res->add_flag("--additional", ra.additional, "n_overs counts extra copies rather than total appearances");
  res->add_option("--minority", ra.minority, "Minority labels: auto or a comma list");
  res->add_option("--train-fraction", ra.train_fraction, "Share of pairs in the training split");
  res->add_option("--stratify", ra.stratify, "none or cluster");
  res->add_option("--added-count", ra.added_count, "random strategy: entries to add (negative: match the cluster plan)");

  auto* rep = app.add_subcommand("report", "Cluster statistics and luminosity cross-tabulation");
  add_common(rep, common, false, false);
  rep->add_option("--assignments", pa.assignments, "Cluster assignment");
  rep->add_option("--descriptors", pa.descriptors, "Descriptor table with luminosity flags");
  rep->add_option("--cluster-table", pa.cluster_table, "Flag table used to name clusters (default: --descriptors)");

  for (auto* s : app.get_subcommands({})) s->fallthrough(false);

  try {
    auto args = apply_config(app, arguments);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_report(err, common, 2, "config", "usage", e.what());
    return 2;
  } catch (const Error& e) {
    error_report(err, common, static_cast<int>(e.kind()), kind_name(e.kind()), e.code(), e.what());
    return static_cast<int>(e.kind());
  }

  try {
    if (desc->parsed()) cmd_descriptors(*desc, common, da, err);
    if (clus->parsed()) cmd_cluster(*clus, common, ca, err);
    if (fit->parsed()) cmd_fit(*fit, common, fa, err);
    if (ind->parsed()) cmd_indicators(*ind, common, ia, err);
    if (noi->parsed()) cmd_noisify(*noi, common, na, err);
    if (res->parsed()) cmd_resample(*res, common, ra, err);
    if (rep->parsed()) cmd_report(*rep, common, pa, err);
  } catch (const DecodeError& e) {
    error_report(err, common, 3, "data", e.code(), e.what(), e.entry_id());
    return 3;
  } catch (const Error& e) {
    error_report(err, common, static_cast<int>(e.kind()), kind_name(e.kind()), e.code(), e.what());
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    error_report(err, common, 3, "data", "io", e.what());
    return 3;
  } catch (const std::exception& e) {
    error_report(err, common, 4, "numeric", "internal", e.what());
    return 4;
  }
  return 0;
}

}  // namespace cardie::cli
