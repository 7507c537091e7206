#include "fconn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace fconn {

RoiTimeSeries load_time_series(const std::filesystem::path& path,
                               double tr_seconds) {
  const auto lines = detail::read_lines(path);

  // skip fully blank trailing/interior lines but keep row accounting simple:
  // blank lines are ignored wherever they appear.
  std::vector<std::string_view> rows;
  for (const auto& line : lines) {
    if (!detail::trim(line).empty()) rows.push_back(line);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::too_few_rows, path.string() + " is empty");
  }

  auto labels = detail::split(rows.front(), ',');
  for (auto& label : labels) label = std::string(detail::trim(label));
  const std::size_t n_regions = labels.size();
  if (n_regions < 2) {
    throw Error(ErrorCode::too_few_rows,
                path.string() + " has fewer than 2 regions");
  }
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second) {
      throw Error(ErrorCode::duplicate_region_label,
                  "region '" + label + "' appears twice in " + path.string());
    }
  }

  const std::size_t n_rows = rows.size() - 1;
  if (n_rows < 2) {
    throw Error(ErrorCode::too_few_rows,
                path.string() + " has " + std::to_string(n_rows) +
                    " data rows; need at least 2");
  }

  RoiTimeSeries ts;
  ts.subject_id = path.stem().string();
  ts.region_labels = std::move(labels);
  ts.tr_seconds = tr_seconds;
  ts.data.resize(static_cast<Eigen::Index>(n_rows),
                 static_cast<Eigen::Index>(n_regions));

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto cells = detail::split(rows[r + 1], ',');
    if (cells.size() != n_regions) {
      throw Error(ErrorCode::ragged_rows,
                  path.string() + " row " + std::to_string(r + 2) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(n_regions));
    }
    for (std::size_t c = 0; c < n_regions; ++c) {
      const auto value = detail::parse_double(cells[c]);
      if (!value || !std::isfinite(*value)) {
        throw Error(ErrorCode::non_numeric_cell,
                    path.string() + " row " + std::to_string(r + 2) +
                        ", column '" + ts.region_labels[c] + "': '" +
                        cells[c] + "'");
      }
      ts.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          *value;
    }
  }
  return ts;
}

void write_time_series(const RoiTimeSeries& ts,
                       const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (std::size_t c = 0; c < ts.regions(); ++c) {
    if (c) out << ',';
    out << ts.region_labels[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < ts.timepoints(); ++r) {
    for (std::size_t c = 0; c < ts.regions(); ++c) {
      if (c) out << ',';
      out << detail::format_double(ts.data(static_cast<Eigen::Index>(r),
                                           static_cast<Eigen::Index>(c)));
    }
    out << '\n';
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const auto base_dir = path.has_parent_path()
                            ? path.parent_path()
                            : std::filesystem::path(".");

  DatasetManifest manifest;
  std::set<std::string> seen_ids;
  std::size_t line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    // directive lines: key=value
    if (const auto eq = line.find('='); eq != std::string_view::npos &&
                                        line.find(',') == std::string_view::npos) {
      const auto key = detail::trim(line.substr(0, eq));
      const auto value = detail::trim(line.substr(eq + 1));
      if (key == "tr") {
        const auto tr = detail::parse_double(value);
        if (!tr || *tr <= 0.0) {
          throw Error(ErrorCode::spec_invalid,
                      path.string() + " line " + std::to_string(line_no) +
                          ": bad tr directive");
        }
        manifest.tr_seconds = *tr;
      } else if (key == "label0") {
        manifest.label_names[0] = std::string(value);
      } else if (key == "label1") {
        manifest.label_names[1] = std::string(value);
      } else {
        throw Error(ErrorCode::spec_invalid,
                    path.string() + " line " + std::to_string(line_no) +
                        ": unknown directive '" + std::string(key) + "'");
      }
      continue;
    }

    const auto cells = detail::split(line, ',');
    if (cells.size() != 3) {
      throw Error(ErrorCode::spec_invalid,
                  path.string() + " line " + std::to_string(line_no) +
                      ": expected subject_id,label,path");
    }
    ManifestEntry entry;
    entry.subject_id = std::string(detail::trim(cells[0]));
    const auto label = detail::parse_long(cells[1]);
    if (!label || (*label != 0 && *label != 1)) {
      throw Error(ErrorCode::unknown_label,
                  path.string() + " line " + std::to_string(line_no) +
                      ": label '" + cells[1] + "' is not 0 or 1");
    }
    entry.label = static_cast<int>(*label);
    std::filesystem::path file(std::string(detail::trim(cells[2])));
    entry.path = file.is_absolute() ? file : base_dir / file;
    if (!seen_ids.insert(entry.subject_id).second) {
      throw Error(ErrorCode::duplicate_subject,
                  "subject '" + entry.subject_id + "' listed twice in " +
                      path.string());
    }
    manifest.entries.push_back(std::move(entry));
  }

  std::size_t counts[2] = {0, 0};
  for (const auto& entry : manifest.entries) ++counts[entry.label];
  if (counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorCode::class_underpopulated,
                path.string() + ": class counts are " +
                    std::to_string(counts[0]) + "/" + std::to_string(counts[1]) +
                    "; need at least 2 subjects per class");
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "tr=" << detail::format_double(manifest.tr_seconds) << '\n';
  for (const auto& [label, name] : manifest.label_names) {
    out << "label" << label << '=' << name << '\n';
  }
  for (const auto& entry : manifest.entries) {
    out << entry.subject_id << ',' << entry.label << ','
        << entry.path.generic_string() << '\n';
  }
}

CohortSummary check_cohort(std::span<const RoiTimeSeries> series) {
  if (series.empty()) {
    throw Error(ErrorCode::spec_invalid, "empty cohort");
  }
  const auto& first = series.front();
  CohortSummary summary;
  summary.regions = first.regions();
  summary.t_min = summary.t_max = first.timepoints();
  summary.subjects = series.size();
  for (const auto& ts : series) {
    if (ts.region_labels != first.region_labels) {
      throw Error(ErrorCode::region_mismatch,
                  "subject '" + ts.subject_id +
                      "' has a different region list than '" +
                      first.subject_id + "'");
    }
    if (ts.tr_seconds != first.tr_seconds) {
      throw Error(ErrorCode::tr_mismatch,
                  "subject '" + ts.subject_id + "' has tr " +
                      detail::format_double(ts.tr_seconds) + ", expected " +
                      detail::format_double(first.tr_seconds));
    }
    summary.t_min = std::min(summary.t_min, ts.timepoints());
    summary.t_max = std::max(summary.t_max, ts.timepoints());
  }
  return summary;
}

}  // namespace fconn
