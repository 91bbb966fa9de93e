#include "cardie/cluster_report.hpp"

#include <set>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"

namespace cardie {

Assignment Assignment::from_model(const ClusterModel& model) { return {model.ids, model.labels}; }

std::optional<int> Assignment::label_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return labels[i];
  }
  return std::nullopt;
}

std::map<std::string, int> Assignment::as_map() const {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < ids.size(); ++i) m[ids[i]] = labels[i];
  return m;
}

std::map<int, std::size_t> Assignment::cluster_counts() const {
  std::map<int, std::size_t> counts;
  for (int l : labels) {
    if (l != kNoise) ++counts[l];
  }
  return counts;
}

std::string assignment_csv(const Assignment& a) {
  csv::Writer w({"id", "cluster_label", "is_noise"});
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    w.add({a.ids[i], std::to_string(a.labels[i]), a.labels[i] == kNoise ? "1" : "0"});
  }
  return w.str();
}

namespace {

Assignment from_document(const csv::Document& doc) {
  const int id_col = doc.column("id");
  const int label_col = doc.column("cluster_label");
  if (id_col < 0 || label_col < 0) throw SchemaError("assignment table requires id,cluster_label");
  const int noise_col = doc.column("is_noise");
  Assignment a;
  std::set<std::string> seen;
  for (const auto& row : doc.rows) {
    int label = 0;
    try {
      label = std::stoi(row[label_col]);
    } catch (const std::exception&) {
      throw SchemaError("cluster_label '" + row[label_col] + "' is not an integer");
    }
    if (noise_col >= 0 && row[noise_col] == "1") label = kNoise;
    if (label < kNoise) throw SchemaError("negative cluster label other than -1");
    if (!seen.insert(row[id_col]).second) throw IntegrityError("duplicate id '" + row[id_col] + "' in assignment");
    a.ids.push_back(row[id_col]);
    a.labels.push_back(label);
  }
  return a;
}

}  // namespace

Assignment read_assignment(const std::filesystem::path& path) { return from_document(csv::read_file(path)); }
Assignment parse_assignment(const std::string& text) { return from_document(csv::parse(text)); }

std::string sweep_csv(const GridSearchResult& result) {
  csv::Writer w({"m_min", "sigma_d", "num_clusters", "sc_prime", "noise_fraction", "valid"});
  for (const auto& p : result.evaluated) {
    w.add({std::to_string(p.config.m_min), csv::format_double(p.config.sigma_d), std::to_string(p.num_clusters),
           csv::format_double(p.sc_prime), csv::format_double(p.noise_fraction), p.valid ? "1" : "0"});
  }
  return w.str();
}

std::vector<ClusterStat> cluster_stats(const DescriptorTable& table, const Assignment& assignment) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < table.ids.size(); ++i) row_of[table.ids[i]] = i;

  std::map<int, std::vector<std::size_t>> members;
  std::size_t noise = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment.labels[i] == kNoise) {
      ++noise;
      continue;
    }
    const auto it = row_of.find(assignment.ids[i]);
    if (it == row_of.end()) throw PreconditionError("id '" + assignment.ids[i] + "' missing from descriptor table");
    members[assignment.labels[i]].push_back(it->second);
  }

  const double total = static_cast<double>(assignment.size());
  std::vector<ClusterStat> out;
  std::set<std::string> used;
  for (const auto& [label, rows] : members) {
    ClusterStat s;
    s.label = label;
    s.size = rows.size();
    s.share_pct = 100.0 * static_cast<double>(rows.size()) / total;
    std::string desc;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::size_t ones = 0;
      for (auto r : rows) ones += table.rows[r][c];
      if (2 * ones > rows.size()) {
        s.name += column_abbreviation(table.columns[c]);
        if (!desc.empty()) desc += ", ";
        desc += column_description(table.columns[c]);
      }
    }
    if (s.name.empty()) s.name = "none";
    if (!used.insert(s.name).second) s.name += "#" + std::to_string(label);
    s.description = "{" + desc + "}";
    out.push_back(std::move(s));
  }
  if (noise > 0) {
    out.push_back({kNoise, "noise", "{}", noise, 100.0 * static_cast<double>(noise) / total});
  }
  return out;
}

std::string cluster_stats_csv(const std::vector<ClusterStat>& stats) {
  csv::Writer w({"cluster_label", "name", "labels", "size", "share_pct"});
  for (const auto& s : stats) {
    w.add({std::to_string(s.label), s.name, s.description, std::to_string(s.size), csv::format_double(s.share_pct)});
  }
  return w.str();
}

std::vector<LuminosityCrossTab> luminosity_crosstab(const Assignment& assignment, const DescriptorTable& lum,
                                                    const std::vector<ClusterStat>& names) {
  const int c_low = lum.column("lum_low"), c_avg = lum.column("lum_avg"), c_high = lum.column("lum_high");
  if (c_low < 0 || c_avg < 0 || c_high < 0) {
    throw SchemaError("luminosity cross-tab needs lum_low, lum_avg and lum_high columns");
  }
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < lum.ids.size(); ++i) row_of[lum.ids[i]] = i;

  std::map<int, LuminosityCrossTab> acc;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int label = assignment.labels[i];
    if (label == kNoise) continue;
    const auto it = row_of.find(assignment.ids[i]);
    if (it == row_of.end()) throw PreconditionError("id '" + assignment.ids[i] + "' missing from luminosity table");
    auto& row = acc[label];
    row.label = label;
    ++row.count;
    const auto& flags = lum.rows[it->second];
    row.frac_low += flags[c_low];
    row.frac_avg += flags[c_avg];
    row.frac_high += flags[c_high];
  }
  std::vector<LuminosityCrossTab> out;
  for (auto& [label, row] : acc) {
    const double n = static_cast<double>(row.count);
    row.frac_low /= n;
    row.frac_avg /= n;
    row.frac_high /= n;
    row.name = std::to_string(label);
    for (const auto& s : names) {
      if (s.label == label) row.name = s.name;
    }
    out.push_back(row);
  }
  return out;
}

std::string crosstab_csv(const std::vector<LuminosityCrossTab>& rows) {
  csv::Writer w({"cluster_label", "name", "count", "frac_low", "frac_avg", "frac_high"});
  for (const auto& r : rows) {
    w.add({std::to_string(r.label), r.name, std::to_string(r.count), csv::format_double(r.frac_low),
           csv::format_double(r.frac_avg), csv::format_double(r.frac_high)});
  }
  return w.str();
}

}  // namespace cardie
