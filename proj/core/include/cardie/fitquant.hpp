#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardie/colormath.hpp"

namespace cardie {

struct FitConfig {
  std::size_t pixels = 100;  ///< P, pixels sampled per pair
  std::uint64_t seed = 0;
  std::pair<double, double> gamma_bounds{1e-2, 10.0};
  std::pair<double, double> mu_bounds{1e-3, 1.5};
  int max_iter = 2000;
  double tolerance = 1e-10;  ///< simplex size, in log-parameter units

  void validate() const;
};

struct PixelSample {
  double in;
  double out;
};

/// P index-aligned pixel pairs drawn uniformly without replacement, in pixel order.
std::vector<PixelSample> sample_pixels(const LuminanceMap& in, const LuminanceMap& out, std::size_t count,
                                       std::uint64_t seed);

/// L^gamma / (L^gamma + mu^gamma); 0 at L = 0.
double naka_rushton(double luminance_in, double gamma, double mu);

/// Mean squared error of the transfer curve over the samples.
double fit_objective(std::span<const PixelSample> samples, double gamma, double mu);

struct FitParams {
  std::string id;
  double gamma = 0.0;
  double mu = 0.0;
  double rmse = 0.0;
  bool converged = false;
};

/// Least-squares fit over (log gamma, log mu) inside the bounds: a 3x3 grid of starts,
/// each refined with the bounded simplex; the lowest objective wins.
/// Degenerate samples (fewer than two, or constant input) come back non-converged with NaN
/// parameters.
FitParams fit_pair(std::span<const PixelSample> samples, const FitConfig& config = {});

/// The nine simplex start points (gamma, mu) used by fit_pair.
std::vector<std::pair<double, double>> multistart_points(const FitConfig& config);

struct VarianceDelta {
  std::string id;
  double sigma_in = 0.0;
  double sigma_pp = 0.0;
  double delta_sigma = 0.0;  ///< |sigma_pp - sigma_in|
};

VarianceDelta variance_delta(const LuminanceMap& input, const LuminanceMap& processed,
                             int window = kDefaultVarianceWindow);

struct ParamDistribution {
  std::string name;
  std::vector<std::string> ids;  ///< pairs in the group, in grouping order
  std::vector<double> gammas;    ///< converged fits only
  std::vector<double> mus;
  std::vector<double> sigmas;
  std::size_t excluded_nonconverged = 0;
};

struct DistributionSet {
  std::vector<ParamDistribution> groups;
  std::vector<std::string> warnings;
};

/// One distribution per group. Group order is `order` when given (unlisted groups follow),
/// otherwise ascending with numeric-aware comparison. Either table may be empty; ids in the
/// grouping missing from a non-empty table raise PreconditionError.
DistributionSet collect_distributions(const std::vector<FitParams>& fits, const std::vector<VarianceDelta>& variances,
                                      const std::vector<std::pair<std::string, std::string>>& grouping,
                                      const std::vector<std::string>& order = {});

/// "2" < "10"; otherwise lexicographic.
bool natural_less(const std::string& a, const std::string& b);

std::string fits_csv(const std::vector<FitParams>& fits);
std::string variances_csv(const std::vector<VarianceDelta>& variances);
std::vector<FitParams> parse_fits_csv(const std::string& text);
std::vector<VarianceDelta> parse_variances_csv(const std::string& text);

/// Raw values (group,id,gamma,mu,delta_sigma) and shared-edge histograms
/// (group,parameter,bin_lo,bin_hi,count).
std::string distributions_csv(const DistributionSet& set);
std::string distribution_histograms_csv(const DistributionSet& set, int bins = 20);

}  // namespace cardie
