#include "orderspec/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "orderspec/errors.hpp"

namespace orderspec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Splits one CSV record; double quotes group commas, "" escapes a quote.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool is_missing(const std::string& cell) {
  std::string lower = cell;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null" || lower == "n/a";
}

bool parse_double(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

/// Sortable key for a time stamp, or false when it is neither an ISO date
/// (YYYY-MM-DD, optionally followed by 'T' or ' ' and a time) nor an integer.
bool time_key(const std::string& s, bool& is_integer, std::string& key, long long& number) {
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-' && all_digits(s, 0, 4) && all_digits(s, 5, 7) &&
      all_digits(s, 8, 10)) {
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return false;
    is_integer = false;
    key = s;
    return true;
  }
  const char* first = s.data();
  const auto [ptr, ec] = std::from_chars(first, first + s.size(), number);
  if (ec == std::errc() && ptr == first + s.size() && !s.empty()) {
    is_integer = true;
    return true;
  }
  return false;
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(winsor_low >= 0.0 && winsor_high <= 1.0 && winsor_low < winsor_high)) {
    throw ConfigError("winsorization needs 0 <= low < high <= 1");
  }
}

TimeSeriesPanel ingest_csv(const std::string& path, std::vector<std::string>& warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 3) {
    throw DataError("'" + path + "' needs a time column and at least 2 series columns");
  }
  const std::size_t k = header.size() - 1;
  std::vector<std::string> labels(header.begin() + 1, header.end());

  struct Row {
    std::string time;
    std::string key;
    long long number = 0;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::size_t dropped = 0;
  int kind = -1;  // 0 dates, 1 integers
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    Row r;
    r.time = cells[0];
    bool is_int = false;
    if (!time_key(r.time, is_int, r.key, r.number)) {
      throw DataError("row " + std::to_string(line_no) + ", column 1 ('" + header[0] +
                      "'): cannot parse time stamp '" + r.time + "'");
    }
    if (kind < 0) kind = is_int ? 1 : 0;
    if (kind != (is_int ? 1 : 0)) {
      throw DataError("row " + std::to_string(line_no) + ": time stamp '" + r.time +
                      "' mixes dates and integer indices");
    }
    bool missing = false;
    r.values.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const std::string& cell = cells[c + 1];
      if (is_missing(cell)) {
        missing = true;
        continue;
      }
      if (!parse_double(cell, r.values[c])) {
        throw DataError("row " + std::to_string(line_no) + ", column " + std::to_string(c + 2) +
                        " ('" + labels[c] + "'): cannot parse '" + cell + "'");
      }
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(r));
  }
  if (dropped > 0) {
    warnings.push_back("dropped " + std::to_string(dropped) + " row(s) with missing values from '" +
                       path + "'");
  }
  auto less = [&](const Row& a, const Row& b) {
    return kind == 1 ? a.number < b.number : a.key < b.key;
  };
  if (!std::is_sorted(rows.begin(), rows.end(), less)) {
    std::stable_sort(rows.begin(), rows.end(), less);
    warnings.push_back("rows of '" + path + "' were not in time order and have been sorted");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!less(rows[i - 1], rows[i])) {
      throw DataError("duplicate time stamp '" + rows[i].time + "' in '" + path + "'");
    }
  }
  if (rows.size() < 2) throw DataError("'" + path + "' has fewer than 2 complete rows");
  Matrix values(static_cast<Index>(rows.size()), static_cast<Index>(k));
  std::vector<std::string> times;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    times.push_back(rows[i].time);
    for (std::size_t c = 0; c < k; ++c) values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i].values[c];
  }
  return TimeSeriesPanel(std::move(labels), std::move(times), std::move(values));
}

TimeSeriesPanel preprocess(const TimeSeriesPanel& panel, const PreprocessConfig& config,
                           std::vector<std::string>& warnings) {
  config.validate();
  const Index t = panel.length();
  Matrix v = panel.values();
  bool winsorize = config.winsorize;
  if (winsorize && t < 10) {
    warnings.push_back("winsorization skipped: fewer than 10 observations");
    winsorize = false;
  }
  std::vector<Index> kept;
  for (Index c = 0; c < v.cols(); ++c) {
    if (winsorize) {
      std::vector<double> col(v.col(c).data(), v.col(c).data() + t);
      const double lo = quantile(col, config.winsor_low);
      const double hi = quantile(col, config.winsor_high);
      v.col(c) = v.col(c).cwiseMax(lo).cwiseMin(hi);
    }
    const double mean = v.col(c).mean();
    const double var = (v.col(c).array() - mean).square().mean();
    const double scale = std::max(1.0, std::abs(mean));
    if (!(var > 1e-24 * scale * scale)) {
      warnings.push_back("dropped constant column '" + panel.labels()[c] + "'");
      continue;
    }
    if (config.standardize) v.col(c) = (v.col(c).array() - mean) / std::sqrt(var);
    kept.push_back(c);
  }
  if (kept.size() < 2) throw DataError("fewer than 2 non-constant columns after preprocessing");
  Matrix out(t, static_cast<Index>(kept.size()));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.col(static_cast<Index>(i)) = v.col(kept[i]);
    labels.push_back(panel.labels()[kept[i]]);
  }
  return TimeSeriesPanel(std::move(labels), panel.times(), std::move(out));
}

std::string format_number(double x) {
  if (std::isnan(x)) return "NA";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel) {
  auto out = open_out(path);
  out << "time";
  for (const auto& l : panel.labels()) out << ',' << l;
  out << '\n';
  for (Index t = 0; t < panel.length(); ++t) {
    out << panel.times()[t];
    for (Index c = 0; c < panel.width(); ++c) out << ',' << format_number(panel.values()(t, c));
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels) {
  auto out = open_out(path);
  out << "target";
  for (const auto& l : col_labels) out << ',' << l;
  out << '\n';
  for (Index j = 0; j < m.rows(); ++j) {
    out << row_labels[j];
    for (Index i = 0; i < m.cols(); ++i) out << ',' << format_number(m(j, i));
    out << '\n';
  }
}

std::vector<Cluster> read_clusters_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open clusters file '" + path + "'");
  std::vector<Cluster> clusters;
  std::map<std::string, std::size_t> position;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw DataError("clusters file rows must read 'driver,cluster'");
    if (first && cells[0] == "driver") {
      first = false;
      continue;
    }
    first = false;
    auto [it, fresh] = position.try_emplace(cells[1], clusters.size());
    if (fresh) clusters.push_back({cells[1], {}});
    clusters[it->second].members.push_back(cells[0]);
  }
  return clusters;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace orderspec
