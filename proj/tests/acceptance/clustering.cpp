#include <cmath>
#include <random>

#include "acceptance.hpp"
#include "cardie/clustering.hpp"
#include "support.hpp"

namespace acceptance {

using namespace cardie;

namespace {

constexpr int kTrials = 50;
constexpr double kMinAri = 0.95;
constexpr double kMinScPrime = 0.9;
constexpr double kMinSuccessRate = 0.95;
constexpr double kSeparation = 0.5;
constexpr int kTriples = 100000;

// Exact Jaccard distance as a reduced fraction (num / den), both-empty -> 0/1.
struct Fraction {
  long num, den;
};

Fraction exact_jaccard(const BoolRow& u, const BoolRow& v) {
  long inter = 0, uni = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    inter += u[i] && v[i];
    uni += u[i] || v[i];
  }
  return uni == 0 ? Fraction{0, 1} : Fraction{uni - inter, uni};
}

}  // namespace

Outcome clustering_recovery() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> groups(2, 6), rows(50, 500);
  int successes = 0;
  double worst_ari = 1.0;
  for (int t = 0; t < kTrials; ++t) {
    const int g = groups(rng), n = rows(rng);
    const auto planted = testing_support::planted_table(g, n, kSeparation, rng());
    const auto result = grid_search(planted.table, GridSpec::defaults(planted.table.size()));
    const double ari = testing_support::adjusted_rand_index(result.best.labels, planted.truth);
    worst_ari = std::min(worst_ari, ari);
    successes += ari >= kMinAri && result.best.sc_prime >= kMinScPrime;
  }
  const double rate = static_cast<double>(successes) / kTrials;
  return verdict(rate >= kMinSuccessRate, str(successes) + "/" + str(kTrials) + " trials with ARI >= " + str(kMinAri) +
                                              " and SC' >= " + str(kMinScPrime) + " (need " + str(kMinSuccessRate) +
                                              "), worst ARI " + str(worst_ari));
}

Outcome jaccard_metric() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> width(1, 24);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  long asym = 0, ident = 0, tri_exact = 0, tri_double = 0, value = 0;
  double tie_excess = 0.0;
  for (int t = 0; t < kTriples; ++t) {
    const auto w = static_cast<std::size_t>(width(rng));
    BoolRow a(w), b(w), c(w);
    const double pa = density(rng), pb = density(rng), pc = density(rng);
    for (std::size_t i = 0; i < w; ++i) {
      a[i] = std::bernoulli_distribution(pa)(rng);
      b[i] = std::bernoulli_distribution(pb)(rng);
      c[i] = std::bernoulli_distribution(pc)(rng);
    }
    if (t % 4 == 0) b = a;  // exercise identity and zero distances
    const double ab = jaccard_distance(a, b), ba = jaccard_distance(b, a);
    const double bc = jaccard_distance(b, c), ac = jaccard_distance(a, c);
    asym += ab != ba;
    ident += jaccard_distance(a, a) != 0.0 || ((ab == 0.0) != (a == b));
    // each value is the correctly rounded exact fraction
    const auto fab = exact_jaccard(a, b), fbc = exact_jaccard(b, c), fac = exact_jaccard(a, c);
    value += ab != static_cast<double>(fab.num) / static_cast<double>(fab.den);
    // exact rational triangle inequality: ac <= ab + bc
    tri_exact += fac.num * fab.den * fbc.den > (fab.num * fbc.den + fbc.num * fab.den) * fac.den;
    // rounding can break rational ties by an ulp; reported, not asserted
    if (ac > ab + bc) {
      ++tri_double;
      tie_excess = std::max(tie_excess, ac - (ab + bc));
    }
  }
  const bool ok = asym == 0 && ident == 0 && tri_exact == 0 && value == 0;
  return verdict(ok, str(kTriples) + " triples: symmetry violations " + str(asym) + ", identity " + str(ident) +
                         ", triangle " + str(tri_exact) + " (exact fractions), rounding errors " + str(value) +
                         "; float ties broken by rounding " + str(tri_double) + " (max excess " + str(tie_excess) +
                         ", not asserted)");
}

}  // namespace acceptance
