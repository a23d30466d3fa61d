#include "orderspec/panel.hpp"

#include <algorithm>

#include "orderspec/errors.hpp"

namespace orderspec {

TimeSeriesPanel::TimeSeriesPanel(std::vector<std::string> labels, std::vector<std::string> times,
                                 Matrix values)
    : labels_(std::move(labels)), times_(std::move(times)), values_(std::move(values)) {
  if (static_cast<Index>(labels_.size()) != values_.cols()) {
    throw DimensionError("panel: " + std::to_string(labels_.size()) + " labels for " +
                         std::to_string(values_.cols()) + " columns");
  }
  if (static_cast<Index>(times_.size()) != values_.rows()) {
    throw DimensionError("panel: " + std::to_string(times_.size()) + " time stamps for " +
                         std::to_string(values_.rows()) + " rows");
  }
  if (values_.cols() < 2) throw InputError("panel: need at least 2 components");
  if (values_.rows() < 2) throw InsufficientDataError("panel: need at least 2 observations");
  require_finite(values_, "panel");
}

TimeSeriesPanel TimeSeriesPanel::from_matrix(Matrix values) {
  std::vector<std::string> labels(values.cols());
  for (Index k = 0; k < values.cols(); ++k) labels[k] = "x" + std::to_string(k);
  std::vector<std::string> times(values.rows());
  for (Index t = 0; t < values.rows(); ++t) times[t] = std::to_string(t);
  return TimeSeriesPanel(std::move(labels), std::move(times), std::move(values));
}

Index TimeSeriesPanel::column(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ConfigError("unknown series label '" + label + "'");
  return static_cast<Index>(it - labels_.begin());
}

TimeSeriesPanel TimeSeriesPanel::rows(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > length()) {
    throw DimensionError("panel: row range out of bounds");
  }
  std::vector<std::string> times(times_.begin() + first, times_.begin() + first + count);
  return TimeSeriesPanel(labels_, std::move(times), values_.middleRows(first, count));
}

TimeSeriesPanel TimeSeriesPanel::select(const std::vector<Index>& columns) const {
  Matrix sub(length(), static_cast<Index>(columns.size()));
  std::vector<std::string> labels;
  labels.reserve(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= width()) throw DimensionError("panel: column out of range");
    sub.col(static_cast<Index>(c)) = values_.col(columns[c]);
    labels.push_back(labels_[columns[c]]);
  }
  return TimeSeriesPanel(std::move(labels), times_, std::move(sub));
}

}  // namespace orderspec
