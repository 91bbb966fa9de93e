#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cardie/fitquant.hpp"

namespace cardie {

struct KsResult {
  double d = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;
};

/// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q_KS((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * d), ne = n m / (n + m).
KsResult ks_two_sample(std::span<const double> xs, std::span<const double> ys);

/// Q_KS(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), in [0, 1].
double kolmogorov_survival(double lambda);

enum class IndicatorKind { tone_mapping, denoising };

std::string to_string(IndicatorKind kind);

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr std::size_t kDefaultMinGroupSize = 5;

struct IndicatorMatrix {
  IndicatorKind kind = IndicatorKind::tone_mapping;
  std::vector<std::string> group_names;
  /// 0/1, or -1 where a group is below the minimum size. Diagonal is 0.
  std::vector<std::vector<int>> cells;
  /// KS p-values: gamma and mu for tone mapping, sigma (in p_primary) for denoising.
  /// NaN where undefined.
  std::vector<std::vector<double>> p_primary;
  std::vector<std::vector<double>> p_secondary;
  double alpha = kDefaultAlpha;
  std::size_t min_group_size = kDefaultMinGroupSize;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return group_names.size(); }
};

/// cell = 1 iff the gamma or the mu distributions differ at level alpha.
IndicatorMatrix indicator_matrix_tm(const std::vector<ParamDistribution>& dists, double alpha = kDefaultAlpha,
                                    std::size_t min_group_size = kDefaultMinGroupSize);

/// cell = 1 iff the local-variance-delta distributions differ at level alpha.
IndicatorMatrix indicator_matrix_dn(const std::vector<ParamDistribution>& dists, double alpha = kDefaultAlpha,
                                    std::size_t min_group_size = kDefaultMinGroupSize);

/// {kind, groups, cells, p_gamma, p_mu | p_sigma, alpha}; undefined entries are null.
std::string indicator_json(const IndicatorMatrix& matrix);
/// group_a,group_b,indicator,p_gamma,p_mu (or p_sigma); upper triangle, row-major.
std::string indicator_csv(const IndicatorMatrix& matrix);

}  // namespace cardie
