#include "orderspec/embedding.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "orderspec/errors.hpp"

namespace orderspec {

namespace {

// Index tuples i1 <= i2 <= ... <= ik for every degree k in [1, max_degree].
std::vector<std::vector<Index>> monomial_terms(Index n, int max_degree) {
  std::vector<std::vector<Index>> terms;
  std::vector<Index> current;
  std::function<void(Index, int)> extend = [&](Index start, int remaining) {
    if (remaining == 0) {
      terms.push_back(current);
      return;
    }
    for (Index i = start; i < n; ++i) {
      current.push_back(i);
      extend(i, remaining - 1);
      current.pop_back();
    }
  };
  for (int degree = 1; degree <= max_degree; ++degree) extend(0, degree);
  return terms;
}

Index binomial(Index n, Index k) {
  Index r = 1;
  for (Index i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

FeatureMap FeatureMap::identity() { return FeatureMap(); }

FeatureMap FeatureMap::monomials(int max_degree) {
  if (max_degree < 1) throw ConfigError("monomials: max_degree must be >= 1");
  FeatureMap f;
  f.kind_ = max_degree == 1 ? Kind::Identity : Kind::Monomials;
  f.max_degree_ = max_degree;
  return f;
}

FeatureMap FeatureMap::custom(std::vector<ScalarTransform> transforms, bool pairwise_products) {
  if (transforms.empty() && !pairwise_products) {
    throw ConfigError("custom feature map needs at least one transform or pairwise products");
  }
  FeatureMap f;
  f.kind_ = Kind::Custom;
  f.transforms_ = std::move(transforms);
  f.pairwise_ = pairwise_products;
  return f;
}

Index FeatureMap::output_dim(Index input_dim) const {
  switch (kind_) {
    case Kind::Identity:
      return input_dim;
    case Kind::Monomials:
      return binomial(input_dim + max_degree_, max_degree_) - 1;
    case Kind::Custom:
      return static_cast<Index>(transforms_.size()) * input_dim +
             (pairwise_ ? input_dim * (input_dim - 1) / 2 : 0);
  }
  return input_dim;
}

Matrix FeatureMap::apply(const Matrix& block) const {
  const Index n = block.cols();
  switch (kind_) {
    case Kind::Identity:
      return block;
    case Kind::Monomials: {
      const auto terms = monomial_terms(n, max_degree_);
      Matrix out(block.rows(), static_cast<Index>(terms.size()));
      for (std::size_t c = 0; c < terms.size(); ++c) {
        Vector col = block.col(terms[c][0]);
        for (std::size_t k = 1; k < terms[c].size(); ++k) {
          col.array() *= block.col(terms[c][k]).array();
        }
        out.col(static_cast<Index>(c)) = col;
      }
      return out;
    }
    case Kind::Custom: {
      Matrix out(block.rows(), output_dim(n));
      Index c = 0;
      for (const auto& g : transforms_) {
        for (Index i = 0; i < n; ++i, ++c) {
          out.col(c) = block.col(i).unaryExpr([&g](double x) { return g(x); });
        }
      }
      if (pairwise_) {
        for (Index i = 0; i < n; ++i) {
          for (Index j = i + 1; j < n; ++j, ++c) {
            out.col(c) = block.col(i).cwiseProduct(block.col(j));
          }
        }
      }
      require_finite(out, "custom feature map");
      return out;
    }
  }
  return block;
}

DeformationSet::DeformationSet(std::vector<int> lags, std::vector<double> weights) {
  if (lags.empty()) throw ConfigError("deformation set must contain at least one lag");
  if (weights.empty()) weights.assign(lags.size(), 1.0);
  if (weights.size() != lags.size()) {
    throw ConfigError("deformation set: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(lags.size()) + " lags");
  }
  std::vector<std::size_t> order(lags.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lags[a] < lags[b]; });
  for (std::size_t i : order) {
    if (lags[i] < 0) throw ConfigError("deformation set: lags must be nonnegative");
    if (!(weights[i] > 0.0)) throw ConfigError("deformation set: weights must be positive");
    if (!lags_.empty() && lags_.back() == lags[i]) {
      throw ConfigError("deformation set: duplicate lag " + std::to_string(lags[i]));
    }
    lags_.push_back(lags[i]);
    weights_.push_back(weights[i]);
  }
}

DeformationSet DeformationSet::range(int lo, int hi) {
  if (hi < lo) throw ConfigError("deformation range: hi < lo");
  std::vector<int> lags(static_cast<std::size_t>(hi - lo + 1));
  std::iota(lags.begin(), lags.end(), lo);
  return DeformationSet(std::move(lags));
}

void EmbeddingSpec::validate(Index width) const {
  auto check = [width](const std::vector<Index>& idx, const char* what) {
    std::set<Index> seen;
    for (Index i : idx) {
      if (i < 0 || i >= width) {
        throw ConfigError(std::string(what) + " index " + std::to_string(i) + " out of range");
      }
      if (!seen.insert(i).second) {
        throw ConfigError(std::string(what) + " index " + std::to_string(i) + " repeated");
      }
    }
  };
  if (source_indices.empty()) throw ConfigError("embedding: source set is empty");
  if (target_indices.empty()) throw ConfigError("embedding: target set is empty");
  check(source_indices, "source");
  check(target_indices, "target");
  check(conditioning_indices, "conditioning");
  if (source_depth < 1) throw ConfigError("embedding: source depth must be >= 1");
  if (target_depth < 0) throw ConfigError("embedding: target depth must be >= 0");
  if (conditioning_depth < 0) throw ConfigError("embedding: conditioning depth must be >= 0");
  if (!allow_overlap) {
    for (Index i : source_indices) {
      if (std::find(target_indices.begin(), target_indices.end(), i) != target_indices.end()) {
        throw ConfigError("embedding: component " + std::to_string(i) +
                          " is both source and target (set allow_overlap to permit)");
      }
    }
  }
}

Index EmbeddingSpec::source_dim() const {
  return source_map.output_dim(static_cast<Index>(source_indices.size()) * source_depth);
}

Index EmbeddingSpec::target_dim() const {
  return target_map.output_dim(static_cast<Index>(target_indices.size()) *
                               effective_target_depth());
}

namespace {

int conditioning_reach(const EmbeddingSpec& spec, int max_lag) {
  if (spec.conditioning_indices.empty()) return 0;
  if (spec.conditioning_depth > 0) return spec.conditioning_depth;
  return std::max(max_lag + spec.source_depth, spec.effective_target_depth());
}

}  // namespace

Index required_history(const EmbeddingSpec& spec, int max_lag) {
  Index h = std::max<Index>(max_lag + spec.source_depth - 1, spec.effective_target_depth() - 1);
  const int reach = conditioning_reach(spec, max_lag);
  if (reach > 0) h = std::max<Index>(h, reach - 1);
  return h;
}

Matrix lag_block(const Matrix& values, const std::vector<Index>& indices, int lag, int depth,
                 Index first_time) {
  const Index n = values.rows() - first_time;
  const Index k = static_cast<Index>(indices.size());
  Matrix out(n, k * depth);
  for (int l = 0; l < depth; ++l) {
    const Index start = first_time - lag - l;
    for (Index c = 0; c < k; ++c) {
      out.col(l * k + c) = values.col(indices[c]).segment(start, n);
    }
  }
  return out;
}

EmbeddedRows embed_aligned(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag,
                           Index history) {
  spec.validate(panel.width());
  if (lag < 0) throw ConfigError("embed: lag must be nonnegative");
  const Index needed = required_history(spec, lag);
  if (history < needed) history = needed;
  if (history + 1 >= panel.length()) {
    throw InsufficientDataError("embed: series of length " + std::to_string(panel.length()) +
                                " too short for lag " + std::to_string(lag) + " (needs more than " +
                                std::to_string(history + 1) + " observations)");
  }
  EmbeddedRows out;
  out.first_time = history;
  out.effective_length = panel.length() - history;
  out.target = spec.target_map.apply(
      lag_block(panel.values(), spec.target_indices, 0, spec.effective_target_depth(), history));
  out.source = spec.source_map.apply(
      lag_block(panel.values(), spec.source_indices, lag, spec.source_depth, history));
  return out;
}

EmbeddedRows embed(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int lag) {
  return embed_aligned(panel, spec, lag, 0);
}

Matrix conditioning_rows(const TimeSeriesPanel& panel, const EmbeddingSpec& spec, int max_lag,
                         Index history) {
  const int reach = conditioning_reach(spec, max_lag);
  if (reach == 0) return {};
  return lag_block(panel.values(), spec.conditioning_indices, 0, reach, history);
}

void circular_shift_columns(const Matrix& values, const std::vector<Index>& indices, Index k,
                            Matrix& out) {
  const Index t = values.rows();
  k %= t;
  if (k < 0) k += t;
  out = values;
  if (k == 0) return;
  for (Index c : indices) {
    out.col(c).tail(t - k) = values.col(c).head(t - k);
    out.col(c).head(k) = values.col(c).tail(k);
  }
}

TimeSeriesPanel circular_shift(const TimeSeriesPanel& panel, const std::vector<Index>& indices,
                               Index k) {
  for (Index c : indices) {
    if (c < 0 || c >= panel.width()) throw ConfigError("circular_shift: column out of range");
  }
  Matrix shifted;
  circular_shift_columns(panel.values(), indices, k, shifted);
  return TimeSeriesPanel(panel.labels(), panel.times(), std::move(shifted));
}

Residualizer::Residualizer(const Matrix& conditioning_rows) {
  const Index n = conditioning_rows.rows();
  Matrix design(n, conditioning_rows.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(conditioning_rows.cols()) = conditioning_rows;
  require_finite(design, "residualize");
  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double tol = std::max<double>(static_cast<double>(n), static_cast<double>(design.cols())) *
                     std::numeric_limits<double>::epsilon() * (s.size() ? s[0] : 0.0);
  Index rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  basis_ = svd.matrixU().leftCols(rank);
}

Matrix Residualizer::apply(const Matrix& rows) const {
  if (rows.rows() != basis_.rows()) {
    throw DimensionError("residualize: " + std::to_string(rows.rows()) + " rows vs " +
                         std::to_string(basis_.rows()) + " conditioning rows");
  }
  Matrix coef = basis_.transpose() * rows;
  Matrix out = rows;
  out.noalias() -= basis_ * coef;
  return out;
}

Matrix residualize(const Matrix& rows, const Matrix& conditioning_rows) {
  if (rows.rows() != conditioning_rows.rows()) {
    throw DimensionError("residualize: row counts differ");
  }
  return Residualizer(conditioning_rows).apply(rows);
}

}  // namespace orderspec
