#include "cardie/fitquant.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"
#include "cardie/random.hpp"
#include "cardie/simplex.hpp"

namespace cardie {

void FitConfig::validate() const {
  if (pixels < 2) throw ConfigError("P must be >= 2");
  auto ok = [](std::pair<double, double> b) { return b.first > 0.0 && b.first < b.second; };
  if (!ok(gamma_bounds) || !ok(mu_bounds)) throw ConfigError("fit bounds must be positive and ordered");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

std::vector<PixelSample> sample_pixels(const LuminanceMap& in, const LuminanceMap& out, std::size_t count,
                                       std::uint64_t seed) {
  if (in.width != out.width || in.height != out.height) throw ArgumentError("luminance maps differ in size");
  if (count > in.size()) {
    throw ArgumentError("cannot sample " + std::to_string(count) + " of " + std::to_string(in.size()) + " pixels");
  }
  std::vector<std::size_t> all(in.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  Rng rng(derive_seed(seed, "pixels"));
  std::sample(all.begin(), all.end(), std::back_inserter(picked), count, rng);
  std::vector<PixelSample> samples;
  samples.reserve(count);
  for (auto i : picked) samples.push_back({in.values[i], out.values[i]});
  return samples;
}

double naka_rushton(double luminance_in, double gamma, double mu) {
  if (luminance_in <= 0.0) return 0.0;
  // 1 / (1 + (mu / L)^gamma), evaluated in log space to avoid under/overflow
  return 1.0 / (1.0 + std::exp(gamma * (std::log(mu) - std::log(luminance_in))));
}

double fit_objective(std::span<const PixelSample> samples, double gamma, double mu) {
  double sse = 0.0;
  for (const auto& s : samples) {
    const double r = naka_rushton(s.in, gamma, mu) - s.out;
    sse += r * r;
  }
  return sse / static_cast<double>(samples.size());
}

std::vector<std::pair<double, double>> multistart_points(const FitConfig& config) {
  const double lg0 = std::log(config.gamma_bounds.first), lg1 = std::log(config.gamma_bounds.second);
  const double lm0 = std::log(config.mu_bounds.first), lm1 = std::log(config.mu_bounds.second);
  std::vector<std::pair<double, double>> pts;
  for (double tg : {0.25, 0.5, 0.75}) {
    for (double tm : {0.25, 0.5, 0.75}) {
      pts.emplace_back(std::exp(lg0 + tg * (lg1 - lg0)), std::exp(lm0 + tm * (lm1 - lm0)));
    }
  }
  return pts;
}

FitParams fit_pair(std::span<const PixelSample> samples, const FitConfig& config) {
  config.validate();
  FitParams out;
  out.gamma = out.mu = out.rmse = std::numeric_limits<double>::quiet_NaN();
  if (samples.size() < 2) return out;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const PixelSample& a, const PixelSample& b) { return a.in < b.in; });
  if (lo->in == hi->in) return out;

  const std::vector<double> lower{std::log(config.gamma_bounds.first), std::log(config.mu_bounds.first)};
  const std::vector<double> upper{std::log(config.gamma_bounds.second), std::log(config.mu_bounds.second)};
  auto objective = [&](const std::vector<double>& x) { return fit_objective(samples, std::exp(x[0]), std::exp(x[1])); };

  SimplexOptions opts;
  opts.max_iterations = config.max_iter;
  opts.x_tolerance = config.tolerance;

  std::optional<SimplexResult> best;
  for (const auto& [g, m] : multistart_points(config)) {
    auto r = minimize_simplex(objective, {std::log(g), std::log(m)}, lower, upper, opts);
    if (!best || r.value < best->value) best = std::move(r);
  }
  out.gamma = std::exp(best->x[0]);
  out.mu = std::exp(best->x[1]);
  out.rmse = std::sqrt(best->value);
  out.converged = best->converged;
  return out;
}

VarianceDelta variance_delta(const LuminanceMap& input, const LuminanceMap& processed, int window) {
  if (input.width != processed.width || input.height != processed.height) {
    throw NumericError("internal: input and processed images differ in size after normalization");
  }
  VarianceDelta v;
  v.sigma_in = mean_local_variance(input, window).sigma_bar;
  v.sigma_pp = mean_local_variance(processed, window).sigma_bar;
  v.delta_sigma = std::fabs(v.sigma_pp - v.sigma_in);
  return v;
}

bool natural_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin() + (s[0] == '-' ? 1 : 0), s.end(),
                                     [](unsigned char c) { return std::isdigit(c); }) &&
           s != "-";
  };
  if (numeric(a) && numeric(b)) return std::stoll(a) < std::stoll(b);
  return a < b;
}

DistributionSet collect_distributions(const std::vector<FitParams>& fits, const std::vector<VarianceDelta>& variances,
                                      const std::vector<std::pair<std::string, std::string>>& grouping,
                                      const std::vector<std::string>& order) {
  std::map<std::string, const FitParams*> fit_of;
  for (const auto& f : fits) fit_of[f.id] = &f;
  std::map<std::string, const VarianceDelta*> var_of;
  for (const auto& v : variances) var_of[v.id] = &v;

  std::map<std::string, ParamDistribution> by_name;
  for (const auto& [id, group] : grouping) {
    const FitParams* f = nullptr;
    const VarianceDelta* v = nullptr;
    if (!fits.empty()) {
      const auto it = fit_of.find(id);
      if (it == fit_of.end()) throw PreconditionError("id '" + id + "' missing from the fit table");
      f = it->second;
    }
    if (!variances.empty()) {
      const auto it = var_of.find(id);
      if (it == var_of.end()) throw PreconditionError("id '" + id + "' missing from the variance table");
      v = it->second;
    }
    auto& d = by_name[group];
    d.name = group;
    d.ids.push_back(id);
    if (f) {
      if (f->converged && std::isfinite(f->gamma) && std::isfinite(f->mu)) {
        d.gammas.push_back(f->gamma);
        d.mus.push_back(f->mu);
      } else {
        ++d.excluded_nonconverged;
      }
    }
    if (v) d.sigmas.push_back(v->delta_sigma);
  }

  std::vector<std::string> names;
  for (const auto& o : order) {
    if (by_name.count(o)) names.push_back(o);
  }
  std::vector<std::string> rest;
  for (const auto& [name, d] : by_name) {
    if (std::find(names.begin(), names.end(), name) == names.end()) rest.push_back(name);
  }
  std::sort(rest.begin(), rest.end(), natural_less);
  names.insert(names.end(), rest.begin(), rest.end());

  DistributionSet set;
  for (const auto& o : order) {
    if (!by_name.count(o)) set.warnings.push_back("group '" + o + "' is empty and was excluded");
  }
  for (const auto& n : names) {
    auto& d = by_name[n];
    if (!fits.empty() && d.gammas.empty()) {
      set.warnings.push_back("group '" + n + "' has no converged fits");
    }
    if (d.excluded_nonconverged > 0) {
      set.warnings.push_back("group '" + n + "': " + std::to_string(d.excluded_nonconverged) +
                             " non-converged fit(s) excluded");
    }
    set.groups.push_back(std::move(d));
  }
  return set;
}

std::string fits_csv(const std::vector<FitParams>& fits) {
  csv::Writer w({"id", "gamma", "mu", "rmse", "converged"});
  for (const auto& f : fits) {
    w.add({f.id, csv::format_double(f.gamma), csv::format_double(f.mu), csv::format_double(f.rmse),
           f.converged ? "1" : "0"});
  }
  return w.str();
}

std::string variances_csv(const std::vector<VarianceDelta>& variances) {
  csv::Writer w({"id", "sigma_in", "sigma_pp", "delta_sigma"});
  for (const auto& v : variances) {
    w.add({v.id, csv::format_double(v.sigma_in), csv::format_double(v.sigma_pp), csv::format_double(v.delta_sigma)});
  }
  return w.str();
}

namespace {

int require(const csv::Document& doc, const char* name) {
  const int c = doc.column(name);
  if (c < 0) throw SchemaError(std::string("table lacks column '") + name + "'");
  return c;
}

}  // namespace

std::vector<FitParams> parse_fits_csv(const std::string& text) {
  const auto doc = csv::parse(text);
  const int id = require(doc, "id"), g = require(doc, "gamma"), m = require(doc, "mu"), r = require(doc, "rmse"),
            c = require(doc, "converged");
  std::vector<FitParams> out;
  for (const auto& row : doc.rows) {
    out.push_back({row[id], csv::parse_double(row[g]), csv::parse_double(row[m]), csv::parse_double(row[r]),
                   row[c] == "1" || row[c] == "true"});
  }
  return out;
}

std::vector<VarianceDelta> parse_variances_csv(const std::string& text) {
  const auto doc = csv::parse(text);
  const int id = require(doc, "id"), si = require(doc, "sigma_in"), sp = require(doc, "sigma_pp"),
            d = require(doc, "delta_sigma");
  std::vector<VarianceDelta> out;
  for (const auto& row : doc.rows) {
    out.push_back({row[id], csv::parse_double(row[si]), csv::parse_double(row[sp]), csv::parse_double(row[d])});
  }
  return out;
}

std::string distributions_csv(const DistributionSet& set) {
  csv::Writer w({"group", "parameter", "value"});
  for (const auto& g : set.groups) {
    for (double v : g.gammas) w.add({g.name, "gamma", csv::format_double(v)});
    for (double v : g.mus) w.add({g.name, "mu", csv::format_double(v)});
    for (double v : g.sigmas) w.add({g.name, "delta_sigma", csv::format_double(v)});
  }
  return w.str();
}

std::string distribution_histograms_csv(const DistributionSet& set, int bins) {
  if (bins < 1) throw ArgumentError("histogram needs at least one bin");
  csv::Writer w({"group", "parameter", "bin_lo", "bin_hi", "count"});
  const std::pair<const char*, std::vector<double> ParamDistribution::*> params[] = {
      {"gamma", &ParamDistribution::gammas}, {"mu", &ParamDistribution::mus}, {"delta_sigma", &ParamDistribution::sigmas}};
  for (const auto& [pname, member] : params) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& g : set.groups) {
      for (double v : g.*member) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(lo <= hi)) continue;
    if (hi == lo) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    for (const auto& g : set.groups) {
      std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
      for (double v : g.*member) {
        const auto b = std::min<std::size_t>(static_cast<std::size_t>((v - lo) / width), counts.size() - 1);
        ++counts[b];
      }
      for (int b = 0; b < bins; ++b) {
        w.add({g.name, pname, csv::format_double(lo + b * width), csv::format_double(lo + (b + 1) * width),
               std::to_string(counts[static_cast<std::size_t>(b)])});
      }
    }
  }
  return w.str();
}

}  // namespace cardie
