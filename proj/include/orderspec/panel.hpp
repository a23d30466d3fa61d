#pragma once

#include <string>
#include <vector>

#include "orderspec/linalg.hpp"

namespace orderspec {

/// Aligned multivariate series: T rows (time) by K columns (components).
/// Time stamps are kept as their original text so that outputs reproduce
/// the input index verbatim; ordering is enforced by the ingestion code.
class TimeSeriesPanel {
 public:
  TimeSeriesPanel() = default;
  TimeSeriesPanel(std::vector<std::string> labels, std::vector<std::string> times, Matrix values);

  /// Panel with labels x0..x{K-1} and integer time stamps 0..T-1.
  static TimeSeriesPanel from_matrix(Matrix values);

  [[nodiscard]] Index length() const { return values_.rows(); }
  [[nodiscard]] Index width() const { return values_.cols(); }
  [[nodiscard]] const Matrix& values() const { return values_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::vector<std::string>& times() const { return times_; }

  /// Position of a column label; throws ConfigError if absent.
  [[nodiscard]] Index column(const std::string& label) const;

  /// Contiguous block of rows [first, first + count).
  [[nodiscard]] TimeSeriesPanel rows(Index first, Index count) const;

  /// Subset of columns, in the given order.
  [[nodiscard]] TimeSeriesPanel select(const std::vector<Index>& columns) const;

  bool operator==(const TimeSeriesPanel& other) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> times_;
  Matrix values_;
};

}  // namespace orderspec
