#include "cardie/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cardie/error.hpp"

namespace cardie {

namespace {

// Box handling by the substitution x = lo + (hi - lo) (sin z + 1) / 2: the search runs
// unconstrained in z, so vertices never pile up on a face of the box.
struct BoxMap {
  const std::vector<double>& lower;
  const std::vector<double>& upper;

  void to_x(const std::vector<double>& z, std::vector<double>& x) const {
    for (std::size_t i = 0; i < z.size(); ++i) {
      x[i] = std::clamp(lower[i] + (upper[i] - lower[i]) * 0.5 * (std::sin(z[i]) + 1.0), lower[i], upper[i]);
    }
  }
  std::vector<double> to_z(const std::vector<double>& x) const {
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = upper[i] - lower[i];
      const double t = w > 0.0 ? std::clamp(2.0 * (x[i] - lower[i]) / w - 1.0, -1.0, 1.0) : 0.0;
      z[i] = std::asin(t);
    }
    return z;
  }
};

SimplexResult run_once(const std::function<double(const std::vector<double>&)>& objective, const BoxMap& box,
                       std::vector<double> start_z, const SimplexOptions& options) {
  const std::size_t dim = start_z.size();
  SimplexResult result;
  std::vector<double> x(dim);
  auto eval = [&](const std::vector<double>& z) {
    ++result.evaluations;
    box.to_x(z, x);
    const double v = objective(x);
    return std::isnan(v) ? INFINITY : v;
  };

  // a full sweep of the box is pi in z
  const double step = options.initial_step * std::numbers::pi;
  std::vector<std::vector<double>> pts(dim + 1, start_z);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += start_z[i] + step > std::numbers::pi / 2 ? -step : step;
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim), xb(dim), xv(dim);

  auto at = [&](double t, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t i = 0; i < dim; ++i) out[i] = centroid[i] + t * (worst[i] - centroid[i]);
  };

  for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

    // convergence is judged in the caller's coordinates
    double spread_x = 0.0, spread_f = 0.0;
    box.to_x(pts[best], xb);
    for (std::size_t v = 0; v <= dim; ++v) {
      spread_f = std::max(spread_f, std::fabs(vals[v] - vals[best]));
      box.to_x(pts[v], xv);
      for (std::size_t i = 0; i < dim; ++i) spread_x = std::max(spread_x, std::fabs(xv[i] - xb[i]));
    }
    if (spread_x <= options.x_tolerance &&
        spread_f <= options.f_tolerance + options.f_relative_tolerance * std::fabs(vals[best])) {
      result.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= dim; ++v) {
      if (v == worst) continue;
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += pts[v][i] / static_cast<double>(dim);
    }

    at(-1.0, pts[worst], trial);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      at(-2.0, pts[worst], trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // contraction: outside if the reflection improved on the worst point, inside otherwise
    const bool outside = fr < vals[worst];
    at(outside ? -0.5 : 0.5, pts[worst], trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t v = 0; v <= dim; ++v) {
      if (v == best) continue;
      for (std::size_t i = 0; i < dim; ++i) pts[v][i] = pts[best][i] + 0.5 * (pts[v][i] - pts[best][i]);
      vals[v] = eval(pts[v]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  result.x = pts[best];  // still in z; mapped by the caller
  result.value = vals[best];
  return result;
}

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& objective,
                               std::vector<double> start, const std::vector<double>& lower,
                               const std::vector<double>& upper, const SimplexOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0 || lower.size() != dim || upper.size() != dim) throw ArgumentError("simplex: dimension mismatch");
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(lower[i] <= upper[i])) throw ArgumentError("simplex: inverted bounds");
  }

  const BoxMap box{lower, upper};
  auto result = run_once(objective, box, box.to_z(start), options);
  for (int k = 0; k < options.restarts && result.converged; ++k) {
    auto next = run_once(objective, box, result.x, options);
    const double gain = result.value - next.value;
    next.iterations += result.iterations;
    next.evaluations += result.evaluations;
    const bool improved = gain > options.f_tolerance + options.f_relative_tolerance * std::fabs(result.value);
    if (next.value <= result.value) result = std::move(next);
    if (!improved) break;
  }
  std::vector<double> x(dim);
  box.to_x(result.x, x);
  result.x = std::move(x);
  return result;
}

}  // namespace cardie
