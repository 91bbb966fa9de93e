#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cardie/csv.hpp"
#include "cardie_cli/cli.hpp"

namespace testing_support {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    auto p = fs::temp_directory_path() / ("cardie-test-" + std::to_string(rng() % 1000000000ULL));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, n] : joint) index += c2(n);
  for (const auto& [k, n] : ra) sa += c2(n);
  for (const auto& [k, n] : rb) sb += c2(n);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sa * sb / total;
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

namespace {

double jaccard_ref(const std::vector<std::uint8_t>& u, const std::vector<std::uint8_t>& v) {
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    inter += u[i] && v[i];
    uni += u[i] || v[i];
  }
  return uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / uni;
}

}  // namespace

PlantedTable planted_table(int groups, int rows, double min_separation, std::uint64_t seed, int signal_bits,
                           int nuisance_bits, double variant_rate) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::uint8_t>> protos;
  std::uniform_int_distribution<int> size_dist(3, 5);
  while (static_cast<int>(protos.size()) < groups) {
    std::vector<std::uint8_t> p(static_cast<std::size_t>(signal_bits), 0);
    std::vector<int> cols(static_cast<std::size_t>(signal_bits));
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    const int bits = size_dist(rng);
    for (int k = 0; k < bits; ++k) p[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])] = 1;
    bool ok = true;
    for (const auto& q : protos) ok = ok && jaccard_ref(p, q) >= min_separation;
    if (ok) protos.push_back(p);
  }

  // Group sizes: equal shares jittered by up to 20%, each at least 8.
  std::vector<int> sizes(static_cast<std::size_t>(groups));
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::vector<double> w(static_cast<std::size_t>(groups));
  for (auto& x : w) x = jitter(rng);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  int assigned = 0;
  for (int g = 0; g < groups; ++g) {
    sizes[static_cast<std::size_t>(g)] = std::max(8, static_cast<int>(std::floor(rows * w[static_cast<std::size_t>(g)] / wsum)));
    assigned += sizes[static_cast<std::size_t>(g)];
  }
  for (int g = 0; assigned < rows; g = (g + 1) % groups, ++assigned) ++sizes[static_cast<std::size_t>(g)];

  std::vector<std::pair<int, std::vector<std::uint8_t>>> items;
  std::bernoulli_distribution variant(variant_rate);
  std::uniform_int_distribution<int> nuisance(0, nuisance_bits - 1);
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(g)]; ++i) {
      auto row = protos[static_cast<std::size_t>(g)];
      row.resize(static_cast<std::size_t>(signal_bits + nuisance_bits), 0);
      if (nuisance_bits > 0 && variant(rng)) row[static_cast<std::size_t>(signal_bits + nuisance(rng))] = 1;
      items.emplace_back(g, std::move(row));
    }
  }
  std::shuffle(items.begin(), items.end(), rng);

  PlantedTable out;
  for (int c = 0; c < signal_bits; ++c) out.table.columns.push_back("s" + std::to_string(c));
  for (int c = 0; c < nuisance_bits; ++c) out.table.columns.push_back("n" + std::to_string(c));
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.table.ids.push_back("r" + std::to_string(i));
    out.table.rows.push_back(items[i].second);
    out.truth.push_back(items[i].first);
  }
  return out;
}

void hued_pixel(double gray, double chroma, double theta, double& r, double& g, double& b) {
  const double c = std::cos(theta), s = std::sin(theta);
  r = gray + chroma * (2.0 / 3.0) * c;
  g = gray + chroma * (-c / 3.0 + s / std::sqrt(3.0));
  b = gray + chroma * (-c / 3.0 - s / std::sqrt(3.0));
}

cardie::RgbImage ramp_image(int w, int h, double lo, double hi) {
  cardie::RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    const double v = h == 1 ? lo : lo + (hi - lo) * y / (h - 1);
    for (int x = 0; x < w; ++x) img.set(x, y, v, v, v);
  }
  return img;
}

fs::path write_dataset(const fs::path& dir, const std::vector<FixturePair>& pairs, int bits) {
  fs::create_directories(dir);
  cardie::csv::Row header{"id", "input_path", "gt_path"};
  if (!pairs.empty()) {
    for (const auto& [k, v] : pairs.front().labels) header.push_back("label_" + k);
  }
  cardie::csv::Writer w(header);
  for (const auto& p : pairs) {
    const std::string in = p.id + "_in.png", gt = p.gt ? p.id + "_gt.png" : "";
    cardie::save_png(p.input, dir / in, bits);
    if (p.gt) cardie::save_png(*p.gt, dir / gt, bits);
    cardie::csv::Row row{p.id, in, gt};
    for (const auto& [k, v] : p.labels) row.push_back(v);
    w.add(row);
  }
  w.save(dir / "manifest.csv");
  return dir / "manifest.csv";
}

int run_cli(const std::vector<std::string>& args, std::string* out, std::string* err) {
  std::ostringstream o, e;
  const int code = cardie::cli::run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).generic_string()] = read_text(entry.path());
  }
  return files;
}

}  // namespace testing_support
