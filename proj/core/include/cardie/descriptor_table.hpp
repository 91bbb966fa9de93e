#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cardie/descriptors.hpp"
#include "cardie/manifest.hpp"

namespace cardie {

using BoolRow = std::vector<std::uint8_t>;

/// Boolean table keyed by id: the interchange point between descriptor extraction and
/// clustering. Externally produced flag tables (scene attributes, one-hot manual labels)
/// use the same shape.
struct DescriptorTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  std::vector<BoolRow> rows;
  /// Present for tables produced by descriptor extraction.
  std::optional<std::vector<double>> median_luminance;

  std::size_t size() const noexcept { return rows.size(); }
  int column(const std::string& name) const;
  /// Validates widths, 0/1 cell values and id uniqueness.
  void validate() const;
};

/// Columns lum_low, lum_avg, lum_high, color_<anchor>...
DescriptorTable to_table(const std::vector<DescriptorVector>& vectors, const ColorAnchors& anchors);

/// One-hot encoding of manifest label columns: one column "<key>=<value>" per distinct value.
DescriptorTable table_from_labels(const PairManifest& manifest, const std::vector<std::string>& keys = {});

/// Reads id[,median_luminance],flag... ; every other column must hold 0/1 (or true/false).
DescriptorTable read_descriptor_table(const std::filesystem::path& path);
DescriptorTable parse_descriptor_table(const std::string& text);
std::string descriptor_table_csv(const DescriptorTable& table);

/// Short tag of a flag column: lum_low -> Da, lum_avg -> Av, lum_high -> Br,
/// color_red -> R, key=value -> value, anything else verbatim.
std::string column_abbreviation(const std::string& column);
/// Long form used in reports: lum_low -> "dark lum", color_red -> "red".
std::string column_description(const std::string& column);

}  // namespace cardie
