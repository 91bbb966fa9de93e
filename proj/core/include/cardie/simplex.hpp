#pragma once

#include <functional>
#include <vector>

namespace cardie {

struct SimplexOptions {
  int max_iterations = 2000;
  /// Stop when every vertex lies within x_tolerance (max-norm) of the best one...
  double x_tolerance = 1e-10;
  /// ...and their objective values differ from the best by at most
  /// f_tolerance + f_relative_tolerance * |f_best|.
  double f_tolerance = 1e-16;
  double f_relative_tolerance = 1e-10;
  /// Initial edge length along each coordinate, as a fraction of a full sweep of the box
  /// in the internal angle coordinate (see minimize_simplex).
  double initial_step = 0.1;
  /// After convergence, rebuild a fresh simplex at the best vertex and continue, at most this
  /// many times; stops early once a restart no longer lowers the value. Guards against a
  /// simplex that degenerated inside a narrow curved valley.
  int restarts = 10;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead minimization inside the box [lower, upper]. The search runs on
/// z with x = lower + (upper - lower) (sin z + 1) / 2, so every trial point is feasible and
/// vertices cannot collapse onto a face of the box. Standard coefficients (reflect 1,
/// expand 2, contract 1/2, shrink 1/2).
/// Iteration and evaluation counts include every restart.
SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& objective,
                               std::vector<double> start, const std::vector<double>& lower,
                               const std::vector<double>& upper, const SimplexOptions& options = {});

}  // namespace cardie
