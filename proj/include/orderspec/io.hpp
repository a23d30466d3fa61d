#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orderspec/monitor.hpp"
#include "orderspec/panel.hpp"

namespace orderspec {

struct PreprocessConfig {
  double winsor_low = 0.005;
  double winsor_high = 0.995;
  bool winsorize = true;
  bool standardize = true;

  void validate() const;
};

/// Reads a CSV panel: header row, a time column (ISO date/datetime or
/// integer index), then numeric columns. Rows with a missing value (empty,
/// NA, NaN, null) are dropped and reported through `warnings`.
TimeSeriesPanel ingest_csv(const std::string& path, std::vector<std::string>& warnings);

/// Per column: clip to the empirical [q_low, q_high] quantiles, then center
/// and scale to unit variance. Constant columns are dropped with a warning.
TimeSeriesPanel preprocess(const TimeSeriesPanel& panel, const PreprocessConfig& config,
                           std::vector<std::string>& warnings);

/// Shortest round-trip text form of a double; NaN becomes "NA".
std::string format_number(double x);

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel);

/// K x K matrix with row and column labels; NaN written as NA.
void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels);

/// Reads "driver,cluster" rows (header optional) into clusters in first-seen order.
std::vector<Cluster> read_clusters_csv(const std::string& path);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(const std::string& text);

}  // namespace orderspec
