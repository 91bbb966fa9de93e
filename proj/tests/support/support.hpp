#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardie/descriptor_table.hpp"
#include "cardie/image.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Pair-counting adjusted Rand index; every distinct label (noise included) is a class.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct PlantedTable {
  cardie::DescriptorTable table;
  std::vector<int> truth;
};

/// `groups` prototypes over `signal_bits` columns with pairwise Jaccard distance >= min_separation,
/// plus `nuisance_bits` extra columns. Rows copy their group's prototype; a fraction
/// `variant_rate` additionally set one random nuisance bit. Rows appear in shuffled order.
PlantedTable planted_table(int groups, int rows, double min_separation, std::uint64_t seed, int signal_bits = 12,
                           int nuisance_bits = 6, double variant_rate = 0.1);

/// Pixel with the given luminance-neutral gray level pushed by `chroma` toward the hexcone
/// hue angle theta (standard hue convention).
void hued_pixel(double gray, double chroma, double theta, double& r, double& g, double& b);

/// Image whose luminance is a vertical ramp from lo (top) to hi (bottom).
cardie::RgbImage ramp_image(int w, int h, double lo, double hi);

struct FixturePair {
  std::string id;
  cardie::RgbImage input;
  std::optional<cardie::RgbImage> gt;
  std::map<std::string, std::string> labels;
};

/// Writes <id>_in.png / <id>_gt.png under dir and a manifest.csv referencing them
/// relatively; returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, const std::vector<FixturePair>& pairs,
                                    int bits = 16);

/// Runs the command line in-process; stdout/stderr are captured into the given strings.
int run_cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr);

/// Relative path -> content of every regular file below dir.
std::map<std::string, std::string> snapshot(const std::filesystem::path& dir);

}  // namespace testing_support
