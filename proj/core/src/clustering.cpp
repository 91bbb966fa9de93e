#include "cardie/clustering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cardie/error.hpp"
#include "cardie/parallel.hpp"

namespace cardie {

namespace {

/// Rows collapsed to distinct vectors. Distances are memoized per distinct pair;
/// every algorithm below still works on the full multiset of N rows.
class UniqueRows {
 public:
  explicit UniqueRows(std::span<const BoolRow> rows) : n_(rows.size()) {
    std::map<BoolRow, int> index;
    row_unique_.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto [it, inserted] = index.try_emplace(rows[r], static_cast<int>(bits_.size()));
      if (inserted) {
        bits_.push_back(pack(rows[r]));
        members_.emplace_back();
      }
      row_unique_.push_back(it->second);
      members_[it->second].push_back(static_cast<int>(r));
    }
    const std::size_t u = bits_.size();
    if (u <= kMatrixLimit) {
      matrix_.resize(u * u);
      for (std::size_t a = 0; a < u; ++a) {
        matrix_[a * u + a] = 0.0;
        for (std::size_t b = a + 1; b < u; ++b) {
          matrix_[a * u + b] = matrix_[b * u + a] = compute(a, b);
        }
      }
    }
  }

  std::size_t rows() const noexcept { return n_; }
  std::size_t unique() const noexcept { return bits_.size(); }
  int unique_of(std::size_t row) const { return row_unique_[row]; }
  const std::vector<int>& members(std::size_t u) const { return members_[u]; }
  std::size_t multiplicity(std::size_t u) const { return members_[u].size(); }

  double distance(std::size_t a, std::size_t b) const {
    if (!matrix_.empty()) return matrix_[a * bits_.size() + b];
    return a == b ? 0.0 : compute(a, b);
  }

 private:
  static constexpr std::size_t kMatrixLimit = 3000;

  static std::vector<std::uint64_t> pack(const BoolRow& row) {
    std::vector<std::uint64_t> words((row.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    return words;
  }

  double compute(std::size_t a, std::size_t b) const {
    std::size_t inter = 0, uni = 0;
    const auto& x = bits_[a];
    const auto& y = bits_[b];
    for (std::size_t w = 0; w < x.size(); ++w) {
      inter += static_cast<std::size_t>(std::popcount(x[w] & y[w]));
      uni += static_cast<std::size_t>(std::popcount(x[w] | y[w]));
    }
    // one rounding: the correctly rounded value of the exact fraction
  return uni == 0 ? 0.0 : static_cast<double>(uni - inter) / static_cast<double>(uni);
  }

  std::size_t n_;
  std::vector<std::vector<std::uint64_t>> bits_;
  std::vector<int> row_unique_;
  std::vector<std::vector<int>> members_;
  std::vector<double> matrix_;
};

struct Edge {
  int a, b;
  double w;
};

/// Core distance of each distinct vector: distance to its k-th nearest other row.
std::vector<double> core_distances(const UniqueRows& u, int k_in) {
  const std::size_t n = u.rows();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_in), n - 1);
  std::vector<double> core(u.unique(), 0.0);
  if (k == 0) return core;
  std::vector<std::pair<double, std::size_t>> neigh;
  for (std::size_t a = 0; a < u.unique(); ++a) {
    neigh.clear();
    if (u.multiplicity(a) > 1) neigh.emplace_back(0.0, u.multiplicity(a) - 1);
    for (std::size_t b = 0; b < u.unique(); ++b) {
      if (b != a) neigh.emplace_back(u.distance(a, b), u.multiplicity(b));
    }
    std::sort(neigh.begin(), neigh.end());
    std::size_t seen = 0;
    for (const auto& [d, count] : neigh) {
      seen += count;
      if (seen >= k) {
        core[a] = d;
        break;
      }
    }
  }
  return core;
}

/// Minimum spanning tree of the mutual-reachability graph. Duplicate rows are chained at their
/// core distance, which never exceeds any edge leaving the group, so contracting each group and
/// running Prim on the distinct vectors yields a spanning tree of minimum total weight.
std::vector<Edge> mutual_reachability_mst(const UniqueRows& u, const std::vector<double>& core) {
  std::vector<Edge> edges;
  edges.reserve(u.rows());
  for (std::size_t g = 0; g < u.unique(); ++g) {
    const auto& m = u.members(g);
    for (std::size_t i = 1; i < m.size(); ++i) edges.push_back({m[i - 1], m[i], core[g]});
  }
  const std::size_t nu = u.unique();
  if (nu <= 1) return edges;
  auto reach = [&](std::size_t a, std::size_t b) { return std::max({core[a], core[b], u.distance(a, b)}); };
  std::vector<char> in_tree(nu, 0);
  std::vector<double> best(nu, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(nu, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < nu; ++step) {
    for (std::size_t v = 0; v < nu; ++v) {
      if (in_tree[v]) continue;
      const double w = reach(current, v);
      if (w < best[v]) {
        best[v] = w;
        from[v] = current;
      }
    }
    std::size_t next = nu;
    for (std::size_t v = 0; v < nu; ++v) {
      if (!in_tree[v] && (next == nu || best[v] < best[next])) next = v;
    }
    in_tree[next] = 1;
    edges.push_back({u.members(from[next]).front(), u.members(next).front(), best[next]});
    current = next;
  }
  return edges;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<int> parent_;
};

/// Single-linkage hierarchy where every merge at one height forms a single node,
/// so ties never produce artificial intermediate levels. Leaves 0..N-1 are rows.
struct Dendrogram {
  struct Node {
    double height = 0.0;
    int size = 1;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = 0;
};

Dendrogram build_dendrogram(std::size_t n, std::vector<Edge> edges) {
  Dendrogram d;
  d.nodes.resize(n);
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  DisjointSets sets(n);
  std::vector<int> node_of(n);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::map<int, std::vector<int>> pending;
  for (std::size_t i = 0; i < edges.size();) {
    const double w = edges[i].w;
    pending.clear();
    for (; i < edges.size() && edges[i].w == w; ++i) {
      const int ra = sets.find(edges[i].a);
      const int rb = sets.find(edges[i].b);
      if (ra == rb) continue;
      auto take = [&](int r) {
        auto it = pending.find(r);
        if (it == pending.end()) return std::vector<int>{node_of[r]};
        auto v = std::move(it->second);
        pending.erase(it);
        return v;
      };
      auto ca = take(ra);
      auto cb = take(rb);
      const int root = sets.unite(ra, rb);
      ca.insert(ca.end(), cb.begin(), cb.end());
      pending[root] = std::move(ca);
    }
    for (auto& [root, children] : pending) {
      Dendrogram::Node node;
      node.height = w;
      node.size = 0;
      for (int c : children) node.size += d.nodes[c].size;
      node.children = std::move(children);
      node_of[root] = static_cast<int>(d.nodes.size());
      d.nodes.push_back(std::move(node));
    }
  }
  d.root = n == 0 ? 0 : node_of[sets.find(0)];
  return d;
}

HdbscanResult run_hdbscan(const UniqueRows& u, int m_min) {
  const std::size_t n = u.rows();
  HdbscanResult result;
  result.labels.assign(n, kNoise);
  if (n == 0) return result;
  if (u.unique() == 1) {
    std::fill(result.labels.begin(), result.labels.end(), 0);
    result.num_clusters = 1;
    return result;
  }

  const auto core = core_distances(u, m_min);
  auto edges = mutual_reachability_mst(u, core);
  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& e : edges) {
    if (e.w > 0.0) min_positive = std::min(min_positive, e.w);
  }
  // Zero-distance merges get a finite density level above every observed one, which
  // keeps stabilities finite and comparable.
  const double lambda_cap = 2.0 / min_positive;
  auto lambda_of = [&](double h) { return h > 0.0 ? 1.0 / h : lambda_cap; };

  const Dendrogram tree = build_dendrogram(n, std::move(edges));

  struct Cluster {
    int parent = -1;
    double birth = 0.0;
    double stability = 0.0;
    std::vector<int> children;
  };
  std::vector<Cluster> clusters(1);
  std::vector<int> point_cluster(n, 0);

  std::vector<int> leaf_stack;
  auto drop_leaves = [&](int node, int cluster) {
    leaf_stack.assign(1, node);
    while (!leaf_stack.empty()) {
      const int x = leaf_stack.back();
      leaf_stack.pop_back();
      if (x < static_cast<int>(n)) {
        point_cluster[x] = cluster;
      } else {
        for (int c : tree.nodes[x].children) leaf_stack.push_back(c);
      }
    }
  };

  std::vector<std::pair<int, int>> work{{tree.root, 0}};
  while (!work.empty()) {
    const auto [node, c] = work.back();
    work.pop_back();
    const auto& nd = tree.nodes[node];
    const double lambda = lambda_of(nd.height);
    if (nd.children.empty()) {
      point_cluster[node] = c;
      continue;
    }
    std::vector<int> big;
    for (int ch : nd.children) {
      if (tree.nodes[ch].size >= m_min) big.push_back(ch);
    }
    if (big.size() >= 2) {
      clusters[c].stability += (lambda - clusters[c].birth) * nd.size;
      for (int ch : nd.children) {
        if (tree.nodes[ch].size >= m_min) {
          const int nc = static_cast<int>(clusters.size());
          clusters.push_back({c, lambda, 0.0, {}});
          clusters[c].children.push_back(nc);
          work.emplace_back(ch, nc);
        } else {
          drop_leaves(ch, c);
        }
      }
    } else if (big.size() == 1) {
      for (int ch : nd.children) {
        if (ch == big.front()) continue;
        clusters[c].stability += (lambda - clusters[c].birth) * tree.nodes[ch].size;
        drop_leaves(ch, c);
      }
      work.emplace_back(big.front(), c);
    } else {
      clusters[c].stability += (lambda - clusters[c].birth) * nd.size;
      drop_leaves(node, c);
    }
  }

  // Excess of mass, bottom-up; children always have larger indices than their parent.
  std::vector<double> subtree(clusters.size(), 0.0);
  std::vector<char> selected(clusters.size(), 0);
  for (std::size_t ci = clusters.size(); ci-- > 1;) {
    auto& cl = clusters[ci];
    if (cl.children.empty()) {
      subtree[ci] = cl.stability;
      selected[ci] = 1;
      continue;
    }
    double sum = 0.0;
    for (int ch : cl.children) sum += subtree[ch];
    if (sum > cl.stability) {
      subtree[ci] = sum;
    } else {
      subtree[ci] = cl.stability;
      selected[ci] = 1;
      std::vector<int> stack(cl.children.begin(), cl.children.end());
      while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        selected[x] = 0;
        for (int ch : clusters[x].children) stack.push_back(ch);
      }
    }
  }

  std::vector<int> owner(n, kNoise);
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = point_cluster[p]; c > 0; c = clusters[c].parent) {
      if (selected[c]) {
        owner[p] = c;
        break;
      }
    }
  }
  std::map<int, int> renumber;
  for (std::size_t p = 0; p < n; ++p) {
    if (owner[p] == kNoise) continue;
    auto [it, inserted] = renumber.try_emplace(owner[p], static_cast<int>(renumber.size()));
    result.labels[p] = it->second;
  }
  result.num_clusters = static_cast<int>(renumber.size());
  return result;
}

/// Silhouette over weighted items: each item stands for `count` rows that share a label and
/// are at distance 0 from one another.
struct SilItem {
  std::size_t key;
  int label;
  std::size_t count;
};

SilhouetteResult weighted_silhouette(const std::vector<SilItem>& items,
                                     const std::function<double(std::size_t, std::size_t)>& dist) {
  std::map<int, int> dense;
  for (const auto& it : items) dense.try_emplace(it.label, 0);
  if (dense.size() < 2) return {};
  int next = 0;
  for (auto& [label, idx] : dense) idx = next++;
  const std::size_t nc = dense.size();
  std::vector<double> sizes(nc, 0.0);
  for (const auto& it : items) sizes[dense[it.label]] += static_cast<double>(it.count);

  double total = 0.0, weight = 0.0;
  std::vector<double> sums(nc);
  for (const auto& a : items) {
    const int own = dense[a.label];
    weight += static_cast<double>(a.count);
    if (sizes[own] <= 1.0) continue;  // singleton cluster contributes 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (const auto& b : items) sums[dense[b.label]] += static_cast<double>(b.count) * dist(a.key, b.key);
    const double intra = sums[own] / (sizes[own] - 1.0);
    double inter = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      if (static_cast<int>(c) != own) inter = std::min(inter, sums[c] / sizes[c]);
    }
    const double denom = std::max(intra, inter);
    const double s = denom > 0.0 ? (inter - intra) / denom : 0.0;
    total += s * static_cast<double>(a.count);
  }
  return {total / weight, true};
}

SilhouetteResult silhouette_on(const UniqueRows& u, std::span<const int> labels) {
  if (labels.size() != u.rows()) throw ArgumentError("label count does not match row count");
  std::map<std::pair<int, int>, std::size_t> counts;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] == kNoise) continue;
    ++counts[{u.unique_of(r), labels[r]}];
  }
  std::vector<SilItem> items;
  items.reserve(counts.size());
  for (const auto& [key, count] : counts) items.push_back({static_cast<std::size_t>(key.first), key.second, count});
  return weighted_silhouette(items, [&](std::size_t a, std::size_t b) { return u.distance(a, b); });
}

void check_hdbscan_pre(std::size_t n, int m_min) {
  if (m_min < 2) throw ArgumentError("m_min must be >= 2");
  if (n < 2 * static_cast<std::size_t>(m_min)) {
    throw ArgumentError("hdbscan needs at least 2*m_min = " + std::to_string(2 * m_min) + " rows, got " +
                        std::to_string(n));
  }
}

}  // namespace

void ClusterConfig::validate() const {
  if (m_min < 2) throw ConfigError("m_min must be >= 2");
  if (!(sigma_d >= 0.0 && sigma_d <= 0.25)) throw ConfigError("sigma_d must lie in [0, 0.25]");
}

FilteredTable filter_descriptors(const DescriptorTable& table, double sigma_d) {
  FilteredTable out;
  const std::size_t n = table.rows.size();
  if (n == 0) throw SchemaError("descriptor table has no rows");
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::size_t ones = 0;
    for (const auto& row : table.rows) ones += row[c];
    const double nn = static_cast<double>(n);
    const double variance = static_cast<double>(ones) * static_cast<double>(n - ones) / (nn * nn);
    if (!(variance < sigma_d)) keep.push_back(c);
  }
  if (keep.empty()) {
    throw ConfigError("sigma_d = " + std::to_string(sigma_d) + " drops every descriptor column");
  }
  for (std::size_t c : keep) out.kept_columns.push_back(table.columns[c]);
  out.rows.reserve(n);
  for (const auto& row : table.rows) {
    BoolRow r;
    r.reserve(keep.size());
    for (std::size_t c : keep) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

double jaccard_distance(std::span<const std::uint8_t> u, std::span<const std::uint8_t> v) {
  if (u.size() != v.size()) throw ArgumentError("jaccard_distance: length mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    inter += (u[i] && v[i]) ? 1 : 0;
    uni += (u[i] || v[i]) ? 1 : 0;
  }
  // one rounding: the correctly rounded value of the exact fraction
  return uni == 0 ? 0.0 : static_cast<double>(uni - inter) / static_cast<double>(uni);
}

HdbscanResult hdbscan(std::span<const BoolRow> rows, int m_min) {
  check_hdbscan_pre(rows.size(), m_min);
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw ArgumentError("hdbscan: rows differ in width");
  }
  return run_hdbscan(UniqueRows(rows), m_min);
}

SilhouetteResult silhouette_prime(std::span<const BoolRow> rows, std::span<const int> labels) {
  return silhouette_on(UniqueRows(rows), labels);
}

SilhouetteResult silhouette_prime(std::size_t n, const std::function<double(std::size_t, std::size_t)>& distance,
                                  std::span<const int> labels) {
  if (labels.size() != n) throw ArgumentError("label count does not match item count");
  std::vector<SilItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kNoise) items.push_back({i, labels[i], 1});
  }
  return weighted_silhouette(items, distance);
}

std::size_t ClusterModel::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(num_clusters), 0);
  for (int l : labels) {
    if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

namespace {

ClusterModel make_model(const DescriptorTable& table, const ClusterConfig& config, const FilteredTable& filtered,
                        const UniqueRows& u) {
  check_hdbscan_pre(table.rows.size(), config.m_min);
  ClusterModel model;
  model.config = config;
  model.ids = table.ids;
  model.kept_descriptors = filtered.kept_columns;
  auto h = run_hdbscan(u, config.m_min);
  model.labels = std::move(h.labels);
  model.num_clusters = h.num_clusters;
  model.noise_fraction = static_cast<double>(model.noise_count()) / static_cast<double>(table.rows.size());
  const auto sil = silhouette_on(u, model.labels);
  model.sc_prime = sil.value;
  model.valid = sil.valid;
  return model;
}

}  // namespace

ClusterModel cluster_table(const DescriptorTable& table, const ClusterConfig& config) {
  config.validate();
  const auto filtered = filter_descriptors(table, config.sigma_d);
  return make_model(table, config, filtered, UniqueRows(filtered.rows));
}

GridSpec GridSpec::defaults(std::size_t n, int m_min_count, int sigma_d_count, double sigma_d_max, int m_min_lo,
                            int m_min_hi) {
  if (m_min_count < 1 || sigma_d_count < 1) throw ConfigError("grid counts must be positive");
  GridSpec g;
  const double nn = static_cast<double>(n);
  const int lo = m_min_lo > 0 ? m_min_lo : std::max(5, static_cast<int>(std::ceil(0.005 * nn)));
  const int hi = std::max(lo, m_min_hi > 0 ? m_min_hi : static_cast<int>(std::ceil(0.10 * nn)));
  for (int i = 0; i < m_min_count; ++i) {
    const double t = m_min_count == 1 ? 0.0 : static_cast<double>(i) / (m_min_count - 1);
    const int v = static_cast<int>(std::lround(lo + t * (hi - lo)));
    if (g.m_min_values.empty() || g.m_min_values.back() != v) g.m_min_values.push_back(v);
  }
  for (int i = 0; i < sigma_d_count; ++i) {
    const double t = sigma_d_count == 1 ? 0.0 : static_cast<double>(i) / (sigma_d_count - 1);
    g.sigma_d_values.push_back(t * sigma_d_max);
  }
  return g;
}

bool better_point(const GridPoint& a, const GridPoint& b) {
  if (a.valid != b.valid) return a.valid;
  if (a.sc_prime != b.sc_prime) return a.sc_prime > b.sc_prime;
  if (a.noise_fraction != b.noise_fraction) return a.noise_fraction < b.noise_fraction;
  if (a.num_clusters != b.num_clusters) return a.num_clusters < b.num_clusters;
  if (a.config.m_min != b.config.m_min) return a.config.m_min < b.config.m_min;
  return a.config.sigma_d < b.config.sigma_d;
}

GridSearchResult grid_search(const DescriptorTable& table, const GridSpec& grid, unsigned jobs) {
  if (grid.size() == 0) throw ConfigError("empty hyperparameter grid");
  if (table.rows.empty()) throw SchemaError("descriptor table has no rows");

  struct Prepared {
    std::optional<FilteredTable> filtered;
    std::optional<UniqueRows> unique;
    std::string error;
  };
  std::vector<Prepared> prepared(grid.sigma_d_values.size());
  parallel_for(prepared.size(), jobs, [&](std::size_t s) {
    try {
      prepared[s].filtered = filter_descriptors(table, grid.sigma_d_values[s]);
      prepared[s].unique.emplace(prepared[s].filtered->rows);
    } catch (const Error& e) {
      prepared[s].error = e.what();
    }
  });

  const std::size_t ns = grid.sigma_d_values.size();
  std::vector<GridPoint> points(grid.size());
  std::vector<std::optional<ClusterModel>> models(grid.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    const int m_min = grid.m_min_values[i / ns];
    const std::size_t s = i % ns;
    auto& pt = points[i];
    pt.config = {m_min, grid.sigma_d_values[s]};
    if (!prepared[s].filtered) {
      pt.error = prepared[s].error;
      return;
    }
    try {
      pt.config.validate();
      auto model = make_model(table, pt.config, *prepared[s].filtered, *prepared[s].unique);
      pt.sc_prime = model.sc_prime;
      pt.num_clusters = model.num_clusters;
      pt.noise_fraction = model.noise_fraction;
      pt.valid = model.valid;
      if (!pt.valid) pt.error = "fewer than two clusters";
      models[i] = std::move(model);
    } catch (const Error& e) {
      pt.error = e.what();
    }
  });

  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].valid && (best == points.size() || better_point(points[i], points[best]))) best = i;
  }
  if (best == points.size()) {
    std::string why;
    for (const auto& p : points) {
      if (!p.error.empty()) {
        why = p.error;
        break;
      }
    }
    throw NumericError("no grid point produced a valid clustering (" + std::to_string(points.size()) +
                       " evaluated; e.g. " + why + ")");
  }
  GridSearchResult result;
  result.best = std::move(*models[best]);
  result.evaluated = std::move(points);
  return result;
}

}  // namespace cardie
