#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orderspec/embedding.hpp"
#include "orderspec/inference.hpp"
#include "orderspec/operators.hpp"
#include "orderspec/panel.hpp"

namespace orderspec {

enum class DgpKind {
  Null,
  EdgeRankOne,
  Bulk,
  RankR,
  ManyToOne,
  GroupToGroup,
  NonlinearQuadratic,
  Confounded,
};

std::string dgp_kind_name(DgpKind kind);
DgpKind parse_dgp_kind(const std::string& name);

/// Independent AR(1) components plus a signal injected at lag tau_star.
/// `strength` is the variance of the injected signal relative to the unit
/// innovation variance.
struct DgpSpec {
  DgpKind kind = DgpKind::Null;
  Index length = 500;
  /// Observed process components (the confounder column is extra).
  Index width = 20;
  double rho = 0.3;
  int tau_star = 2;
  double strength = 0.0;
  /// RankR / GroupToGroup loading rank.
  int rank = 1;
  /// ManyToOne / GroupToGroup source count M.
  int group_sources = 1;
  /// GroupToGroup receiving target count N.
  int group_targets = 1;
  /// Confounded: direct source -> target coefficient at tau_star.
  double theta_direct = 0.0;
  double confounder_rho = 0.5;
  /// Confounded: append the confounder as a final column named "h".
  bool observe_confounder = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which panel columns act as sources, targets and conditioning variables.
struct Layout {
  std::vector<Index> sources;
  std::vector<Index> targets;
  std::vector<Index> confounders;
};

Layout layout(const DgpSpec& dgp);

/// Targets x sources coefficient matrix applied to the lagged sources
/// (linear kinds only; the nonlinear and confounded kinds return their
/// scalar coefficient as a 1 x 1 matrix).
Matrix signal_loadings(const DgpSpec& dgp);

/// Stationary AR(1) variance 1 / (1 - rho^2).
double ar1_variance(double rho);

TimeSeriesPanel generate(const DgpSpec& dgp);

/// F-test p-value for adding `order` lags of `source` to an AR(`order`)
/// regression of `target` with intercept.
double granger_f_test(const TimeSeriesPanel& panel, Index source, Index target, int order);

struct PipelineConfig {
  int source_depth = 5;
  int target_depth = 5;
  std::vector<int> lags{1, 2, 3, 4, 5};
  OperatorKind kind = OperatorKind::DirectedCoherenceGram;
  double ridge = kDefaultRidge;
  FeatureMap source_map = FeatureMap::identity();
  /// Residualize on the observed confounder column when present.
  bool condition = false;
  std::vector<std::string> statistics{"trace"};
  int num_shifts = 100;
  ShiftSampler sampler;
  double alpha = 0.05;
  /// Granger baseline order; 0 disables it.
  int granger_order = 0;
  unsigned threads = 1;

  [[nodiscard]] EmbeddingSpec embedding(const DgpSpec& dgp) const;
};

struct McResult {
  std::vector<std::string> statistics;
  /// Per statistic, per replication.
  std::vector<std::vector<double>> p_values;
  std::vector<std::vector<double>> observed;
  std::vector<double> rejection_rate;
  std::vector<double> granger_p;
  std::optional<double> granger_rejection_rate;
  int reps = 0;
  double alpha = 0.05;

  [[nodiscard]] double rate(const std::string& statistic) const;
  [[nodiscard]] static double standard_error(double rate, int reps);
};

/// Replication r uses dgp.seed' = derive_seed(dgp.seed, r) and shift seed
/// derive_seed(dgp.seed', 1); replications run in parallel.
McResult run_mc(const DgpSpec& dgp, const PipelineConfig& config, int reps);

struct McCell {
  std::string label;
  DgpSpec dgp;
  PipelineConfig pipeline;
  int reps = 200;
};

/// Named experiment grids: table1, table2, table3, bulk, rank, edge,
/// m-to-1, m-to-n.
std::vector<McCell> preset_cells(const std::string& preset);
std::vector<std::string> preset_names();

}  // namespace orderspec
