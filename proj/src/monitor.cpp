#include "orderspec/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "orderspec/errors.hpp"
#include "orderspec/inference.hpp"
#include "orderspec/parallel.hpp"
#include "orderspec/rng.hpp"
#include "orderspec/spectral.hpp"

namespace orderspec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_lags(const std::vector<int>& lags) {
  std::string s;
  for (int l : lags) s += (s.empty() ? "" : ",") + std::to_string(l);
  return s;
}

}  // namespace

void MonitorConfig::validate(Index length) const {
  if (lags.empty()) throw ConfigError("monitor: lag set is empty");
  if (depth < 1) throw ConfigError("monitor: embedding depth must be >= 1");
  if (step < 1) throw ConfigError("monitor: step must be >= 1");
  if (num_shifts < 1) throw ConfigError("monitor: need at least one shift per window");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("monitor: alpha must lie in (0, 1)");
  if (!(network_alpha > 0.0)) throw ConfigError("monitor: network alpha must be positive");
  if (!(ridge >= 0.0)) throw ConfigError("monitor: ridge must be nonnegative");
  if (top_k_hubs < 1) throw ConfigError("monitor: top_k_hubs must be >= 1");
  if (hub_rank < 0) throw ConfigError("monitor: hub rank must be >= 0");
  const DeformationSet d(lags);
  if (window <= depth + d.max_lag()) {
    throw ConfigError("monitor: window " + std::to_string(window) +
                      " must exceed depth + max lag = " + std::to_string(depth + d.max_lag()));
  }
  std::vector<int> early = early_lags;
  std::vector<int> late = late_lags;
  std::sort(early.begin(), early.end());
  std::sort(late.begin(), late.end());
  std::vector<int> both;
  std::set_intersection(early.begin(), early.end(), late.begin(), late.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw ConfigError("monitor: early and late lag sets overlap");
  std::vector<int> all;
  std::merge(early.begin(), early.end(), late.begin(), late.end(), std::back_inserter(all));
  if (all != d.lags()) {
    throw ConfigError("monitor: early {" + join_lags(early) + "} and late {" + join_lags(late) +
                      "} must partition the lag set {" + join_lags(d.lags()) + "}");
  }
  if (length < window) {
    throw ConfigError("monitor: series length " + std::to_string(length) +
                      " shorter than window " + std::to_string(window));
  }
}

Index MonitorConfig::window_count(Index length) const {
  if (length < window) return 0;
  return (length - window) / step + 1;
}

std::optional<double> lag_center_of_mass(const std::vector<int>& lags,
                                         const std::vector<double>& energy) {
  if (lags.size() != energy.size()) throw DimensionError("lag_center_of_mass: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    num += lags[i] * energy[i];
    den += energy[i];
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

std::optional<double> signed_dominance(const std::vector<int>& lags,
                                       const std::vector<double>& energy,
                                       const std::vector<int>& early_lags,
                                       const std::vector<int>& late_lags) {
  if (lags.size() != energy.size()) throw DimensionError("signed_dominance: size mismatch");
  double early = 0.0, late = 0.0, total = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    total += energy[i];
    if (std::find(early_lags.begin(), early_lags.end(), lags[i]) != early_lags.end()) {
      early += energy[i];
    }
    if (std::find(late_lags.begin(), late_lags.end(), lags[i]) != late_lags.end()) {
      late += energy[i];
    }
  }
  if (!(total > 0.0)) return std::nullopt;
  return (late - early) / total;
}

Matrix driver_matrix(const std::vector<Matrix>& per_lag, int depth, Index k) {
  Matrix m = Matrix::Zero(k, k);
  for (const auto& a : per_lag) {
    if (a.rows() != k || a.cols() != depth * k) {
      throw DimensionError("driver_matrix: A is " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + ", expected " + std::to_string(k) + "x" +
                           std::to_string(depth * k));
    }
    for (int l = 0; l < depth; ++l) m += a.middleCols(l * k, k).array().square().matrix();
  }
  return m;
}

int default_hub_rank(const Vector& eigenvalues, double share, int cap) {
  const Index d = eigenvalues.size();
  if (d == 0) throw DimensionError("default_hub_rank: empty spectrum");
  const Vector lambda = clip_psd_spectrum(eigenvalues);
  const double total = lambda.sum();
  int m = 1;
  if (total > 0.0) {
    double acc = 0.0;
    for (Index i = 0; i < d; ++i) {
      acc += lambda[i];
      if (acc >= share * total) {
        m = static_cast<int>(i + 1);
        break;
      }
    }
  }
  return std::min<int>(std::min<Index>(m, cap), d);
}

Vector hub_scores_target(const SymMatrix& c, int m) {
  if (m < 1 || m > c.dim()) {
    throw ConfigError("hub rank " + std::to_string(m) + " outside [1, " + std::to_string(c.dim()) +
                      "]");
  }
  const auto es = sym_eig(c);
  return es.vectors.leftCols(m).array().square().rowwise().sum();
}

Vector hub_scores_source(const std::vector<Matrix>& per_lag, int m, int depth) {
  if (per_lag.empty()) throw DimensionError("hub_scores_source: no operators");
  const Index cols = per_lag.front().cols();
  if (depth < 1 || cols % depth != 0) throw DimensionError("hub_scores_source: bad depth");
  Matrix g = Matrix::Zero(cols, cols);
  for (const auto& a : per_lag) {
    if (a.cols() != cols) throw DimensionError("hub_scores_source: column mismatch");
    g.noalias() += a.transpose() * a;
  }
  const Vector diag = hub_scores_target(SymMatrix(g), m);
  const Index k = cols / depth;
  Vector folded = Vector::Zero(k);
  for (int l = 0; l < depth; ++l) folded += diag.segment(l * k, k);
  return folded;
}

Vector hub_scores(const SymMatrix& c, int m, HubSide side, const std::vector<Matrix>& per_lag,
                  int depth) {
  return side == HubSide::Target ? hub_scores_target(c, m) : hub_scores_source(per_lag, m, depth);
}

std::vector<Index> top_k(const Vector& scores, int k) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<double> turnover(const std::vector<std::vector<Index>>& sets) {
  std::vector<double> out;
  for (std::size_t t = 0; t + 1 < sets.size(); ++t) {
    std::set<Index> a(sets[t].begin(), sets[t].end());
    std::set<Index> b(sets[t + 1].begin(), sets[t + 1].end());
    std::vector<Index> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    out.push_back(uni.empty() ? 0.0
                              : 1.0 - static_cast<double>(inter.size()) /
                                          static_cast<double>(uni.size()));
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DimensionError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  q = std::clamp(q, 0.0, 1.0);
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Matrix null_threshold_network(const std::vector<Matrix>& observed,
                              const std::vector<std::vector<Matrix>>& replicates, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("network alpha must be positive");
  if (observed.empty()) return {};
  if (replicates.size() != observed.size()) {
    throw DimensionError("null_threshold_network: one replicate set per window required");
  }
  const Index k = observed.front().rows();
  const std::size_t b_count = replicates.front().size();
  Matrix mean_obs = Matrix::Zero(k, observed.front().cols());
  std::vector<Matrix> mean_null(b_count, Matrix::Zero(mean_obs.rows(), mean_obs.cols()));
  for (std::size_t w = 0; w < observed.size(); ++w) {
    mean_obs += observed[w];
    if (replicates[w].size() != b_count) {
      throw DimensionError("null_threshold_network: replicate counts differ across windows");
    }
    for (std::size_t b = 0; b < b_count; ++b) mean_null[b] += replicates[w][b];
  }
  const double inv = 1.0 / static_cast<double>(observed.size());
  mean_obs *= inv;
  if (alpha >= 1.0) return mean_obs;
  if (b_count == 0) throw ConfigError("null_threshold_network: no null replicates");
  for (auto& m : mean_null) m *= inv;
  Matrix out = mean_obs;
  std::vector<double> sample(b_count);
  for (Index j = 0; j < out.rows(); ++j) {
    for (Index i = 0; i < out.cols(); ++i) {
      for (std::size_t b = 0; b < b_count; ++b) sample[b] = mean_null[b](j, i);
      if (!(mean_obs(j, i) > quantile(sample, 1.0 - alpha))) out(j, i) = kNaN;
    }
  }
  return out;
}

MacroHubIndices macro_hub_indices(const std::vector<Vector>& hub_series,
                                  const std::vector<std::string>& labels,
                                  const std::vector<Cluster>& clusters) {
  std::unordered_map<std::string, Index> position;
  for (std::size_t i = 0; i < labels.size(); ++i) position[labels[i]] = static_cast<Index>(i);
  MacroHubIndices out;
  std::vector<std::vector<Index>> members;
  for (const auto& c : clusters) {
    out.names.push_back(c.name);
    std::vector<Index> idx;
    for (const auto& label : c.members) {
      const auto it = position.find(label);
      if (it == position.end()) {
        throw ConfigError("cluster '" + c.name + "' names unknown driver '" + label + "'");
      }
      idx.push_back(it->second);
    }
    members.push_back(std::move(idx));
  }
  out.series.assign(clusters.size(), std::vector<double>(hub_series.size(), 0.0));
  for (std::size_t w = 0; w < hub_series.size(); ++w) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      double s = 0.0;
      for (Index i : members[c]) s += hub_series[w][i];
      out.series[c][w] = s;
      if (s > out.series[best][w]) best = c;
    }
    if (!clusters.empty()) out.dominant.push_back(clusters[best].name);
  }
  return out;
}

namespace {

struct Summary {
  double lambda1 = 0.0;
  double trace = 0.0;
  double eff_rank = 0.0;
};

Summary summarize(const Matrix& c) {
  const Vector ev = clip_psd_spectrum(sym_eigenvalues(SymMatrix(c)));
  return {ev.size() ? ev[0] : 0.0, ev.sum(), effective_rank(ev)};
}

Matrix aggregate_gram(const std::vector<DirectedCoherence>& dcs, Index k) {
  Matrix c = Matrix::Zero(k, k);
  for (const auto& dc : dcs) c.noalias() += dc.matrix * dc.matrix.transpose();
  return c;
}

std::vector<Matrix> matrices(const std::vector<DirectedCoherence>& dcs) {
  std::vector<Matrix> out;
  out.reserve(dcs.size());
  for (const auto& dc : dcs) out.push_back(dc.matrix);
  return out;
}

Matrix scatter(const Matrix& small, const std::vector<Index>& kept, Index k) {
  Matrix full = Matrix::Zero(k, k);
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = 0; b < kept.size(); ++b)
      full(kept[a], kept[b]) = small(static_cast<Index>(a), static_cast<Index>(b));
  return full;
}

Vector scatter(const Vector& small, const std::vector<Index>& kept, Index k) {
  Vector full = Vector::Zero(k);
  for (std::size_t a = 0; a < kept.size(); ++a) full[kept[a]] = small[static_cast<Index>(a)];
  return full;
}

std::vector<Index> non_constant_columns(const Matrix& values) {
  std::vector<Index> kept;
  for (Index c = 0; c < values.cols(); ++c) {
    const double lo = values.col(c).minCoeff();
    const double hi = values.col(c).maxCoeff();
    const double scale = std::max(1.0, values.col(c).cwiseAbs().maxCoeff());
    if (hi - lo > 1e-12 * scale) kept.push_back(c);
  }
  return kept;
}

struct WindowOutcome {
  WindowStats stats;
  std::vector<Index> kept;
};

WindowOutcome analyze_window(const TimeSeriesPanel& panel, const MonitorConfig& cfg, Index widx,
                             const std::vector<Index>& shifts) {
  const Index k = panel.width();
  const Index start = widx * cfg.step;
  const TimeSeriesPanel win = panel.rows(start, cfg.window);
  WindowOutcome out;
  WindowStats& s = out.stats;
  s.start = start;
  s.window_end = win.times().back();

  const std::vector<Index> kept = non_constant_columns(win.values());
  if (kept.empty()) {
    throw DataError("window ending " + s.window_end + " has no non-constant columns");
  }
  for (Index c = 0, j = 0; c < k; ++c) {
    if (j < static_cast<Index>(kept.size()) && kept[j] == c) {
      ++j;
    } else {
      s.dropped.push_back(c);
    }
  }
  const Index kk = static_cast<Index>(kept.size());

  EmbeddingSpec spec;
  spec.source_indices = kept;
  spec.target_indices = kept;
  spec.source_depth = cfg.depth;
  spec.target_depth = 0;
  spec.allow_overlap = true;
  const DeformationSet def(cfg.lags);
  OperatorEngine engine(win, spec, def, OperatorKind::DirectedCoherenceGram, cfg.ridge);

  const auto observed = engine.coherences(0);
  const std::vector<Matrix> a = matrices(observed);
  const Matrix c = aggregate_gram(observed, kk);
  const Summary obs = summarize(c);
  s.lambda1 = obs.lambda1;
  s.trace = obs.trace;
  s.eff_rank = obs.eff_rank;

  std::vector<double> rep_l1, rep_tr, rep_er;
  for (Index shift : shifts) {
    const auto dcs = engine.coherences(shift);
    const Summary r = summarize(aggregate_gram(dcs, kk));
    rep_l1.push_back(r.lambda1);
    rep_tr.push_back(r.trace);
    rep_er.push_back(r.eff_rank);
  }
  s.p_lambda1 = upper_p(s.lambda1, rep_l1);
  s.p_trace = upper_p(s.trace, rep_tr);
  s.p_effrank = two_sided_p(s.eff_rank, rep_er);

  std::vector<Matrix> early, late;
  for (std::size_t i = 0; i < def.size(); ++i) {
    s.lag_energy.push_back(a[i].squaredNorm());
    const int lag = def.lags()[i];
    const bool is_early =
        std::find(cfg.early_lags.begin(), cfg.early_lags.end(), lag) != cfg.early_lags.end();
    (is_early ? early : late).push_back(a[i]);
  }
  s.tau_com = lag_center_of_mass(def.lags(), s.lag_energy);
  s.dominance = signed_dominance(def.lags(), s.lag_energy, cfg.early_lags, cfg.late_lags);
  s.driver_early = scatter(driver_matrix(early, cfg.depth, kk), kept, k);
  s.driver_late = scatter(driver_matrix(late, cfg.depth, kk), kept, k);
  s.driver_matrix = s.driver_early + s.driver_late;

  const SymMatrix csym(c);
  const Vector ev = sym_eigenvalues(csym);
  const int m = cfg.hub_rank > 0 ? std::min<int>(cfg.hub_rank, static_cast<int>(kk))
                                 : default_hub_rank(ev);
  s.hub_rank = m;
  s.hub_target = scatter(hub_scores_target(csym, m), kept, k);
  s.hub_source = scatter(hub_scores_source(a, m, cfg.depth), kept, k);
  s.top_hubs = top_k(s.hub_target, cfg.top_k_hubs);
  out.kept = kept;
  return out;
}

// Driver matrices of window `start` with the driver series rotated by each
// shift over the whole panel. Targets stay in place, so every window pairs
// target t with driver t - shift, as the observed matrices pair t with t.
std::vector<Matrix> network_replicates(const TimeSeriesPanel& panel, const MonitorConfig& cfg,
                                       Index start, const std::vector<Index>& kept,
                                       const std::vector<Index>& shifts) {
  const Index k = panel.width();
  const Index kk = static_cast<Index>(kept.size());
  const Index len = panel.length();
  const Matrix& x = panel.values();
  Matrix block(cfg.window, 2 * kk);
  for (Index a = 0; a < kk; ++a) block.col(a) = x.col(kept[a]).segment(start, cfg.window);
  EmbeddingSpec spec;
  for (Index a = 0; a < kk; ++a) {
    spec.target_indices.push_back(a);
    spec.source_indices.push_back(kk + a);
  }
  spec.source_depth = cfg.depth;
  spec.target_depth = 0;
  const DeformationSet def(cfg.lags);
  std::vector<Matrix> out;
  out.reserve(shifts.size());
  for (Index shift : shifts) {
    for (Index t = 0; t < cfg.window; ++t) {
      const Index from = ((start + t - shift) % len + len) % len;
      for (Index a = 0; a < kk; ++a) block(t, kk + a) = x(from, kept[a]);
    }
    OperatorEngine engine(TimeSeriesPanel::from_matrix(block), spec, def,
                          OperatorKind::DirectedCoherenceGram, cfg.ridge);
    out.push_back(scatter(driver_matrix(matrices(engine.coherences(0)), cfg.depth, kk), kept, k));
  }
  return out;
}

}  // namespace

RollingReport run_monitor(const TimeSeriesPanel& panel, const MonitorConfig& config,
                          const std::vector<Cluster>& clusters) {
  config.validate(panel.length());
  const Index k = panel.width();
  const Index n = config.window_count(panel.length());
  const Index min_offset = DeformationSet(config.lags).max_lag() + config.depth;
  RandomizationPlan plan;
  plan.num_shifts = config.num_shifts;
  std::vector<WindowOutcome> outcomes(static_cast<std::size_t>(n));
  parallel_for(outcomes.size(), config.threads, [&](std::size_t w) {
    RandomizationPlan wplan = plan;
    wplan.seed = derive_seed(config.seed, w);
    outcomes[w] = analyze_window(panel, config, static_cast<Index>(w),
                                 draw_shifts(wplan, config.window, min_offset));
  });

  std::vector<std::size_t> selected;
  for (std::size_t w = 0; w < outcomes.size(); ++w) {
    if (outcomes[w].stats.p_lambda1 < config.alpha) selected.push_back(w);
  }
  std::vector<std::vector<Matrix>> sig_null(selected.size());
  if (!selected.empty() && config.network_alpha < 1.0) {
    RandomizationPlan nplan = plan;
    nplan.seed = derive_seed(config.seed, static_cast<std::uint64_t>(n));
    const auto global_shifts = draw_shifts(nplan, panel.length(), min_offset);
    parallel_for(selected.size(), config.threads, [&](std::size_t i) {
      const WindowOutcome& o = outcomes[selected[i]];
      sig_null[i] = network_replicates(panel, config, o.stats.start, o.kept, global_shifts);
    });
  }

  RollingReport report;
  report.labels = panel.labels();
  report.lags = DeformationSet(config.lags).lags();
  std::vector<double> p_l1;
  std::vector<std::vector<Index>> tops;
  std::vector<Vector> hubs;
  std::vector<Matrix> sig_obs;
  Matrix early_sum = Matrix::Zero(k, k), late_sum = Matrix::Zero(k, k);
  Matrix early_all = Matrix::Zero(k, k), late_all = Matrix::Zero(k, k);
  for (auto& o : outcomes) {
    WindowStats& s = o.stats;
    if (!s.dropped.empty()) {
      std::string names;
      for (Index c : s.dropped) names += (names.empty() ? "" : ", ") + panel.labels()[c];
      report.warnings.push_back("window ending " + s.window_end + ": dropped constant column(s) " +
                                names);
    }
    p_l1.push_back(s.p_lambda1);
    tops.push_back(s.top_hubs);
    hubs.push_back(s.hub_target);
    early_all += s.driver_early;
    late_all += s.driver_late;
    if (s.p_lambda1 < config.alpha) {
      sig_obs.push_back(s.driver_matrix);
      early_sum += s.driver_early;
      late_sum += s.driver_late;
    }
    report.windows.push_back(std::move(s));
  }
  report.episodes = detect_episodes(p_l1, config.alpha);
  report.turnover = turnover(tops);
  if (sig_obs.empty()) {
    report.episode_network = Matrix::Constant(k, k, kNaN);
    report.null_threshold_network = report.episode_network;
    early_sum = early_all;
    late_sum = late_all;
  } else {
    report.episode_network = null_threshold_network(sig_obs, sig_null, 1.0);
    report.null_threshold_network = null_threshold_network(sig_obs, sig_null, config.network_alpha);
  }
  report.signed_dominance_map = Matrix::Constant(k, k, kNaN);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < k; ++i) {
      const double total = early_sum(j, i) + late_sum(j, i);
      if (total > 0.0) report.signed_dominance_map(j, i) = (late_sum(j, i) - early_sum(j, i)) / total;
    }
  }
  if (!clusters.empty()) report.macro = macro_hub_indices(hubs, panel.labels(), clusters);
  return report;
}

}  // namespace orderspec
