#include "cardie/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"

namespace cardie {

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi theta transform; the alternating series converges slowly here.
    const double k = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double odd = 2.0 * j - 1.0;
      const double term = std::exp(odd * odd * k);
      sum += term;
      if (term < 1e-300 || term < 1e-17 * sum) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-300 || term < 1e-17 * std::fabs(sum)) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw ArgumentError("KS test needs two non-empty samples");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());

  // Walk the pooled distinct values, consuming ties on both sides before comparing.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    const double v = (j == b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }

  KsResult r;
  r.d = d;
  r.n = a.size();
  r.m = b.size();
  const double ne = std::sqrt(n * m / (n + m));
  r.p = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

std::string to_string(IndicatorKind kind) { return kind == IndicatorKind::tone_mapping ? "tone-mapping" : "denoising"; }

namespace {

using Member = std::vector<double> ParamDistribution::*;

IndicatorMatrix build(const std::vector<ParamDistribution>& dists, IndicatorKind kind, std::vector<Member> members,
                      double alpha, std::size_t min_size) {
  if (dists.size() < 2) throw ArgumentError("indicator matrix needs at least two groups");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (min_size < 1) throw ConfigError("minimum group size must be >= 1");

  IndicatorMatrix out;
  out.kind = kind;
  out.alpha = alpha;
  out.min_group_size = min_size;
  const std::size_t g = dists.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.cells.assign(g, std::vector<int>(g, 0));
  out.p_primary.assign(g, std::vector<double>(g, nan));
  if (members.size() > 1) out.p_secondary.assign(g, std::vector<double>(g, nan));

  std::vector<bool> usable(g, true);
  for (std::size_t l = 0; l < g; ++l) {
    out.group_names.push_back(dists[l].name);
    for (auto mem : members) {
      if ((dists[l].*mem).size() < min_size) usable[l] = false;
    }
    if (!usable[l]) {
      out.warnings.push_back("group '" + dists[l].name + "' has fewer than " + std::to_string(min_size) +
                             " values; its cells are undefined");
    }
  }

  for (std::size_t l = 0; l < g; ++l) {
    for (std::size_t a = l; a < g; ++a) {
      if (!usable[l] || !usable[a]) {
        out.cells[l][a] = out.cells[a][l] = -1;
        continue;
      }
      bool differs = false;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const double p = l == a ? 1.0 : ks_two_sample(dists[l].*members[k], dists[a].*members[k]).p;
        auto& table = k == 0 ? out.p_primary : out.p_secondary;
        table[l][a] = table[a][l] = p;
        differs = differs || p < alpha;
      }
      out.cells[l][a] = out.cells[a][l] = (l != a && differs) ? 1 : 0;
    }
  }
  return out;
}

nlohmann::json matrix_json(const std::vector<std::vector<double>>& m) {
  auto out = nlohmann::json::array();
  for (const auto& row : m) {
    auto r = nlohmann::json::array();
    for (double v : row) r.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

IndicatorMatrix indicator_matrix_tm(const std::vector<ParamDistribution>& dists, double alpha,
                                    std::size_t min_group_size) {
  return build(dists, IndicatorKind::tone_mapping, {&ParamDistribution::gammas, &ParamDistribution::mus}, alpha,
               min_group_size);
}

IndicatorMatrix indicator_matrix_dn(const std::vector<ParamDistribution>& dists, double alpha,
                                    std::size_t min_group_size) {
  return build(dists, IndicatorKind::denoising, {&ParamDistribution::sigmas}, alpha, min_group_size);
}

std::string indicator_json(const IndicatorMatrix& matrix) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(matrix.kind);
  j["groups"] = matrix.group_names;
  auto cells = nlohmann::json::array();
  for (const auto& row : matrix.cells) {
    auto r = nlohmann::json::array();
    for (int c : row) r.push_back(c < 0 ? nlohmann::json(nullptr) : nlohmann::json(c));
    cells.push_back(std::move(r));
  }
  j["cells"] = std::move(cells);
  if (matrix.kind == IndicatorKind::tone_mapping) {
    j["p_gamma"] = matrix_json(matrix.p_primary);
    j["p_mu"] = matrix_json(matrix.p_secondary);
  } else {
    j["p_sigma"] = matrix_json(matrix.p_primary);
  }
  j["alpha"] = matrix.alpha;
  j["min_group_size"] = matrix.min_group_size;
  j["warnings"] = matrix.warnings;
  return j.dump(2) + "\n";
}

std::string indicator_csv(const IndicatorMatrix& matrix) {
  const bool tm = matrix.kind == IndicatorKind::tone_mapping;
  csv::Row header{"group_a", "group_b", "indicator"};
  if (tm) {
    header.insert(header.end(), {"p_gamma", "p_mu"});
  } else {
    header.push_back("p_sigma");
  }
  csv::Writer w(header);
  for (std::size_t l = 0; l < matrix.size(); ++l) {
    for (std::size_t a = l + 1; a < matrix.size(); ++a) {
      const int c = matrix.cells[l][a];
      csv::Row row{matrix.group_names[l], matrix.group_names[a], c < 0 ? "" : std::to_string(c)};
      auto fmt = [](double v) { return std::isnan(v) ? std::string() : csv::format_double(v); };
      row.push_back(fmt(matrix.p_primary[l][a]));
      if (tm) row.push_back(fmt(matrix.p_secondary[l][a]));
      w.add(std::move(row));
    }
  }
  return w.str();
}

}  // namespace cardie
