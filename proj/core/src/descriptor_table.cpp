#include "cardie/descriptor_table.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"

namespace cardie {

int DescriptorTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

void DescriptorTable::validate() const {
  if (ids.size() != rows.size()) throw SchemaError("descriptor table ids/rows size mismatch");
  if (median_luminance && median_luminance->size() != rows.size()) {
    throw SchemaError("descriptor table median_luminance size mismatch");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != columns.size()) throw SchemaError("row '" + ids[i] + "' has wrong width");
    for (auto v : rows[i]) {
      if (v > 1) throw SchemaError("row '" + ids[i] + "' has a non-boolean cell");
    }
    if (!seen.insert(ids[i]).second) throw IntegrityError("duplicate id '" + ids[i] + "' in descriptor table");
  }
}

DescriptorTable to_table(const std::vector<DescriptorVector>& vectors, const ColorAnchors& anchors) {
  DescriptorTable t;
  t.columns = {"lum_low", "lum_avg", "lum_high"};
  for (const auto& a : anchors.anchors) t.columns.push_back("color_" + a.name);
  t.median_luminance.emplace();
  for (const auto& v : vectors) {
    if (v.colors.size() != anchors.size()) throw ArgumentError("descriptor '" + v.id + "' has wrong color count");
    BoolRow row(t.columns.size(), 0);
    row[static_cast<std::size_t>(v.luminosity)] = 1;
    for (std::size_t m = 0; m < v.colors.size(); ++m) row[3 + m] = v.colors[m] ? 1 : 0;
    t.ids.push_back(v.id);
    t.rows.push_back(std::move(row));
    t.median_luminance->push_back(v.median_luminance);
  }
  return t;
}

DescriptorTable table_from_labels(const PairManifest& manifest, const std::vector<std::string>& keys_in) {
  const auto keys = keys_in.empty() ? manifest.label_keys() : keys_in;
  if (keys.empty()) throw SchemaError("manifest carries no label columns to encode");
  DescriptorTable t;
  std::vector<std::vector<std::string>> values(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    std::set<std::string> distinct;
    for (const auto& e : manifest.entries()) {
      const auto it = e.labels.find(keys[k]);
      if (it == e.labels.end()) throw SchemaError("entry '" + e.id + "' lacks label '" + keys[k] + "'");
      distinct.insert(it->second);
    }
    values[k].assign(distinct.begin(), distinct.end());
    for (const auto& v : values[k]) t.columns.push_back(keys[k] + "=" + v);
  }
  for (const auto& e : manifest.entries()) {
    BoolRow row;
    row.reserve(t.columns.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto& v = e.labels.at(keys[k]);
      for (const auto& candidate : values[k]) row.push_back(candidate == v ? 1 : 0);
    }
    t.ids.push_back(e.id);
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::uint8_t parse_flag(const std::string& cell, const std::string& id, const std::string& column) {
  if (cell == "0" || cell == "false" || cell == "False") return 0;
  if (cell == "1" || cell == "true" || cell == "True") return 1;
  throw SchemaError("cell (" + id + ", " + column + ") = '" + cell + "' is not a 0/1 flag");
}

DescriptorTable from_document(const csv::Document& doc, const std::string& where) {
  const int id_col = doc.column("id");
  if (id_col < 0) throw SchemaError(where + ": descriptor table requires an 'id' column");
  const int med_col = doc.column("median_luminance");
  DescriptorTable t;
  std::vector<int> flag_cols;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (static_cast<int>(c) == id_col || static_cast<int>(c) == med_col) continue;
    flag_cols.push_back(static_cast<int>(c));
    t.columns.push_back(doc.header[c]);
  }
  if (doc.rows.empty()) throw SchemaError(where + ": descriptor table has no rows");
  if (t.columns.empty()) throw SchemaError(where + ": descriptor table has no flag columns");
  if (med_col >= 0) t.median_luminance.emplace();
  for (const auto& row : doc.rows) {
    t.ids.push_back(row[id_col]);
    BoolRow flags;
    flags.reserve(flag_cols.size());
    for (std::size_t k = 0; k < flag_cols.size(); ++k) {
      flags.push_back(parse_flag(row[flag_cols[k]], row[id_col], t.columns[k]));
    }
    t.rows.push_back(std::move(flags));
    if (med_col >= 0) t.median_luminance->push_back(csv::parse_double(row[med_col]));
  }
  t.validate();
  return t;
}

}  // namespace

DescriptorTable read_descriptor_table(const std::filesystem::path& path) {
  return from_document(csv::read_file(path), path.string());
}

DescriptorTable parse_descriptor_table(const std::string& text) {
  return from_document(csv::parse(text), "<descriptor table>");
}

std::string descriptor_table_csv(const DescriptorTable& table) {
  csv::Row header{"id"};
  if (table.median_luminance) header.push_back("median_luminance");
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  csv::Writer w(header);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    csv::Row row{table.ids[i]};
    if (table.median_luminance) row.push_back(csv::format_double((*table.median_luminance)[i]));
    for (auto v : table.rows[i]) row.push_back(v ? "1" : "0");
    w.add(std::move(row));
  }
  return w.str();
}

std::string column_abbreviation(const std::string& column) {
  if (column == "lum_low") return "Da";
  if (column == "lum_avg") return "Av";
  if (column == "lum_high") return "Br";
  if (column.rfind("color_", 0) == 0 && column.size() > 6) {
    return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(column[6]))));
  }
  if (const auto eq = column.find('='); eq != std::string::npos) return column.substr(eq + 1);
  return column;
}

std::string column_description(const std::string& column) {
  if (column == "lum_low") return "dark lum";
  if (column == "lum_avg") return "average lum";
  if (column == "lum_high") return "bright lum";
  if (column.rfind("color_", 0) == 0) return column.substr(6);
  return column;
}

}  // namespace cardie
