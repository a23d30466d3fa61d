#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orderspec/linalg.hpp"
#include "orderspec/operators.hpp"
#include "orderspec/panel.hpp"

namespace orderspec {

struct MonitorConfig {
  Index window = 252;
  Index step = 21;
  /// Driver embedding depth p; targets are contemporaneous.
  int depth = 3;
  std::vector<int> lags{1, 2, 3, 5};
  double ridge = kDefaultRidge;
  /// Circular shifts per window.
  int num_shifts = 20;
  /// Window significance level (episodes, network window selection).
  double alpha = 0.05;
  /// Level for masking network entries against their null replicates.
  double network_alpha = 0.05;
  int top_k_hubs = 20;
  /// Hub projector rank; 0 picks the smallest m capturing 80% of the trace, capped at 10.
  int hub_rank = 0;
  std::vector<int> early_lags{1, 2};
  std::vector<int> late_lags{3, 5};
  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Throws ConfigError on inconsistent settings or a series shorter than W.
  void validate(Index length) const;
  [[nodiscard]] Index window_count(Index length) const;
};

struct WindowStats {
  Index start = 0;
  std::string window_end;
  double lambda1 = 0.0;
  double trace = 0.0;
  double eff_rank = 0.0;
  double p_lambda1 = 1.0;
  double p_trace = 1.0;
  double p_effrank = 1.0;
  /// E_tau = ||A_tau||_F^2, aligned with the configured lags.
  std::vector<double> lag_energy;
  std::optional<double> tau_com;
  std::optional<double> dominance;
  int hub_rank = 0;
  Vector hub_target;  // K entries
  Vector hub_source;  // K entries
  std::vector<Index> top_hubs;
  /// M(j, i): squared loadings of driver i on target j, summed over lags.
  Matrix driver_matrix;
  Matrix driver_early;
  Matrix driver_late;
  /// Columns dropped as constant in this window.
  std::vector<Index> dropped;
};

struct Cluster {
  std::string name;
  std::vector<std::string> members;
};

struct MacroHubIndices {
  std::vector<std::string> names;
  /// series[c][w]: summed target hub score of cluster c in window w.
  std::vector<std::vector<double>> series;
  /// Name of the largest cluster per window (first on ties).
  std::vector<std::string> dominant;
};

struct RollingReport {
  std::vector<std::string> labels;
  std::vector<int> lags;
  std::vector<WindowStats> windows;
  /// Runs of windows with p_lambda1 < alpha, as window-index intervals.
  std::vector<std::pair<Index, Index>> episodes;
  /// 1 - Jaccard between consecutive top-k hub sets (windows - 1 entries).
  std::vector<double> turnover;
  /// Mean M over significant windows (all NaN when there are none).
  Matrix episode_network;
  /// episode_network with entries at or below the null quantile set to NaN.
  Matrix null_threshold_network;
  /// Per-edge (late - early) / total energy, averaged over significant windows
  /// (all windows when none are significant). NaN where an edge carries no energy.
  Matrix signed_dominance_map;
  MacroHubIndices macro;
  std::vector<std::string> warnings;
};

enum class HubSide { Target, Source };

/// Energy-weighted mean lag; empty when every energy is zero.
std::optional<double> lag_center_of_mass(const std::vector<int>& lags,
                                         const std::vector<double>& energy);

/// (late - early) / total energy; empty when the total is zero.
std::optional<double> signed_dominance(const std::vector<int>& lags,
                                       const std::vector<double>& energy,
                                       const std::vector<int>& early_lags,
                                       const std::vector<int>& late_lags);

/// Sum over lags and embedding positions of squared entries of A_tau
/// (K rows, depth*K lag-major columns) into a K x K matrix.
Matrix driver_matrix(const std::vector<Matrix>& per_lag, int depth, Index k);

/// Smallest m whose leading eigenvalues reach `share` of the trace, capped.
int default_hub_rank(const Vector& eigenvalues, double share = 0.8, int cap = 10);

/// Diagonal of the rank-m eigenprojector of C = sum A A^T.
Vector hub_scores_target(const SymMatrix& c, int m);
/// Diagonal of the rank-m eigenprojector of sum A^T A folded over embedding
/// positions onto the K drivers.
Vector hub_scores_source(const std::vector<Matrix>& per_lag, int m, int depth);
Vector hub_scores(const SymMatrix& c, int m, HubSide side, const std::vector<Matrix>& per_lag,
                  int depth);

/// Indices of the k largest scores, ties to the lower index.
std::vector<Index> top_k(const Vector& scores, int k);

/// 1 - |S_t ∩ S_{t+1}| / |S_t ∪ S_{t+1}| for consecutive sets.
std::vector<double> turnover(const std::vector<std::vector<Index>>& sets);

/// observed[w] and replicates[w][b] for the selected windows. Returns the
/// window-averaged observed matrix with entries kept only where they exceed
/// the (1 - alpha) quantile of the window-averaged replicate matrices.
/// Masked entries are NaN. alpha >= 1 keeps every entry.
Matrix null_threshold_network(const std::vector<Matrix>& observed,
                              const std::vector<std::vector<Matrix>>& replicates, double alpha);

/// Linear-interpolation sample quantile (type 7).
double quantile(std::vector<double> values, double q);

MacroHubIndices macro_hub_indices(const std::vector<Vector>& hub_series,
                                  const std::vector<std::string>& labels,
                                  const std::vector<Cluster>& clusters);

RollingReport run_monitor(const TimeSeriesPanel& panel, const MonitorConfig& config,
                          const std::vector<Cluster>& clusters = {});

}  // namespace orderspec
