#include "orderspec/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/math/distributions/fisher_f.hpp>

#include "orderspec/errors.hpp"
#include "orderspec/parallel.hpp"
#include "orderspec/rng.hpp"
#include "orderspec/spectral.hpp"

namespace orderspec {

namespace {

struct KindName {
  DgpKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {DgpKind::Null, "null"},
    {DgpKind::EdgeRankOne, "edge"},
    {DgpKind::Bulk, "bulk"},
    {DgpKind::RankR, "rank"},
    {DgpKind::ManyToOne, "many-to-one"},
    {DgpKind::GroupToGroup, "group-to-group"},
    {DgpKind::NonlinearQuadratic, "nonlinear"},
    {DgpKind::Confounded, "confounded"},
};

/// d x r matrix with orthonormal columns.
Matrix random_frame(Index d, Index r, Rng& rng) {
  std::normal_distribution<double> n01;
  Matrix g(d, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < d; ++i) g(i, j) = n01(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, r);
}

/// Stationary AR(1) path of length n started from its marginal law.
void ar1_path(Eigen::Ref<Vector> out, double rho, Rng& rng) {
  std::normal_distribution<double> n01;
  double x = n01(rng) * std::sqrt(ar1_variance(rho));
  for (Index t = 0; t < out.size(); ++t) {
    if (t > 0) x = rho * x + n01(rng);
    out[t] = x;
  }
}

}  // namespace

std::string dgp_kind_name(DgpKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "?";
}

DgpKind parse_dgp_kind(const std::string& name) {
  for (const auto& k : kKindNames)
    if (name == k.name) return k.kind;
  throw ConfigError("unknown process kind '" + name + "'");
}

double ar1_variance(double rho) { return 1.0 / (1.0 - rho * rho); }

void DgpSpec::validate() const {
  if (!(std::abs(rho) < 1.0)) throw ConfigError("process: |rho| must be < 1");
  if (!(std::abs(confounder_rho) < 1.0)) throw ConfigError("process: |confounder rho| must be < 1");
  if (width < 2) throw ConfigError("process: need at least 2 components");
  if (length < 10) throw ConfigError("process: length must be >= 10");
  if (tau_star < 1 || tau_star >= length / 2) throw ConfigError("process: tau_star out of range");
  if (!(strength >= 0.0)) throw ConfigError("process: strength must be nonnegative");
  const Layout l = layout(*this);
  const auto ns = static_cast<int>(l.sources.size());
  const auto nt = static_cast<int>(l.targets.size());
  if (kind == DgpKind::RankR && (rank < 1 || rank > std::min(ns, nt))) {
    throw ConfigError("process: rank must lie in [1, " + std::to_string(std::min(ns, nt)) + "]");
  }
  if (kind == DgpKind::ManyToOne && (group_sources < 1 || group_sources >= width)) {
    throw ConfigError("process: many-to-one needs 1 <= M < K");
  }
  if (kind == DgpKind::GroupToGroup) {
    if (group_sources < 1 || group_targets < 1 || group_sources + group_targets > width) {
      throw ConfigError("process: group-to-group needs M, N >= 1 and M + N <= K");
    }
    if (rank < 1 || rank > std::min(group_sources, group_targets)) {
      throw ConfigError("process: group rank must lie in [1, min(M, N)]");
    }
  }
}

Layout layout(const DgpSpec& dgp) {
  Layout l;
  Index first_target = 1;
  if (dgp.kind == DgpKind::RankR) first_target = dgp.width / 2;
  if (dgp.kind == DgpKind::ManyToOne || dgp.kind == DgpKind::GroupToGroup) {
    first_target = dgp.group_sources;
  }
  first_target = std::clamp<Index>(first_target, 1, dgp.width - 1);
  for (Index i = 0; i < first_target; ++i) l.sources.push_back(i);
  for (Index j = first_target; j < dgp.width; ++j) l.targets.push_back(j);
  if (dgp.kind == DgpKind::Confounded && dgp.observe_confounder) l.confounders.push_back(dgp.width);
  return l;
}

Matrix signal_loadings(const DgpSpec& dgp) {
  const Layout l = layout(dgp);
  const auto nt = static_cast<Index>(l.targets.size());
  const auto ns = static_cast<Index>(l.sources.size());
  const double var_x = ar1_variance(dgp.rho);
  // ||B||_F^2 var_x equals the injected variance for independent sources.
  const double frob2 = dgp.strength / var_x;
  Rng rng = make_rng(dgp.seed, 1);
  Matrix b = Matrix::Zero(nt, ns);
  switch (dgp.kind) {
    case DgpKind::Null:
      break;
    case DgpKind::EdgeRankOne:
      b(0, 0) = std::sqrt(frob2);
      break;
    case DgpKind::Bulk: {
      const Index hit = std::min<Index>((dgp.width + 1) / 2, nt);
      b.col(0).head(hit).setConstant(std::sqrt(frob2 / static_cast<double>(hit)));
      break;
    }
    case DgpKind::RankR: {
      const Matrix u = random_frame(nt, dgp.rank, rng);
      const Matrix v = random_frame(ns, dgp.rank, rng);
      b = std::sqrt(frob2 / dgp.rank) * u * v.transpose();
      break;
    }
    case DgpKind::ManyToOne:
      b.row(0).setConstant(std::sqrt(frob2 / static_cast<double>(ns)));
      break;
    case DgpKind::GroupToGroup: {
      const Matrix u = random_frame(dgp.group_targets, dgp.rank, rng);
      const Matrix v = random_frame(ns, dgp.rank, rng);
      b.topRows(dgp.group_targets) = std::sqrt(frob2 / dgp.rank) * u * v.transpose();
      break;
    }
    case DgpKind::NonlinearQuadratic:
      // Var(x^2) = 2 var_x^2 for Gaussian x.
      b = Matrix::Constant(1, 1, std::sqrt(dgp.strength / (2.0 * var_x * var_x)));
      break;
    case DgpKind::Confounded:
      b = Matrix::Constant(1, 1, dgp.theta_direct);
      break;
  }
  return b;
}

TimeSeriesPanel generate(const DgpSpec& dgp) {
  dgp.validate();
  const Index lag = dgp.tau_star;
  const Index n = dgp.length + lag;
  const Layout l = layout(dgp);
  Rng rng = make_rng(dgp.seed, 0);
  Matrix x(n, dgp.width);
  for (Index c = 0; c < dgp.width; ++c) ar1_path(x.col(c), dgp.rho, rng);

  Vector h;
  if (dgp.kind == DgpKind::Confounded) {
    Rng hrng = make_rng(dgp.seed, 2);
    h.resize(n);
    ar1_path(h, dgp.confounder_rho, hrng);
    x.col(l.sources[0]) += h;
    x.col(l.targets[0]) += h;
  }

  const Matrix b = signal_loadings(dgp);
  const Index src = l.sources[0];
  const Index tgt = l.targets[0];
  switch (dgp.kind) {
    case DgpKind::NonlinearQuadratic: {
      const double theta = b(0, 0);
      const double var_x = ar1_variance(dgp.rho);
      for (Index t = lag; t < n; ++t) x(t, tgt) += theta * (x(t - lag, src) * x(t - lag, src) - var_x);
      break;
    }
    case DgpKind::Confounded:
      for (Index t = n - 1; t >= lag; --t) x(t, tgt) += b(0, 0) * x(t - lag, src);
      break;
    default:
      if (dgp.strength > 0.0) {
        Matrix src_block(n, static_cast<Index>(l.sources.size()));
        for (std::size_t i = 0; i < l.sources.size(); ++i) {
          src_block.col(static_cast<Index>(i)) = x.col(l.sources[i]);
        }
        const Matrix signal = src_block.topRows(n - lag) * b.transpose();
        for (std::size_t j = 0; j < l.targets.size(); ++j) {
          x.col(l.targets[j]).tail(n - lag) += signal.col(static_cast<Index>(j));
        }
      }
      break;
  }

  const bool with_h = dgp.kind == DgpKind::Confounded && dgp.observe_confounder;
  Matrix values(dgp.length, dgp.width + (with_h ? 1 : 0));
  values.leftCols(dgp.width) = x.bottomRows(dgp.length);
  std::vector<std::string> labels;
  for (Index c = 0; c < dgp.width; ++c) labels.push_back("x" + std::to_string(c));
  if (with_h) {
    values.col(dgp.width) = h.tail(dgp.length);
    labels.push_back("h");
  }
  std::vector<std::string> times;
  for (Index t = 0; t < dgp.length; ++t) times.push_back(std::to_string(t));
  return TimeSeriesPanel(std::move(labels), std::move(times), std::move(values));
}

double granger_f_test(const TimeSeriesPanel& panel, Index source, Index target, int order) {
  if (order < 1) throw ConfigError("granger: order must be >= 1");
  if (source < 0 || source >= panel.width() || target < 0 || target >= panel.width()) {
    throw ConfigError("granger: column out of range");
  }
  const Index t = panel.length();
  if (t <= 2 * (2 * order + 1)) {
    throw InsufficientDataError("granger: series of length " + std::to_string(t) +
                                " too short for order " + std::to_string(order));
  }
  const Index n = t - order;
  const Matrix& v = panel.values();
  Matrix full(n, 1 + 2 * order);
  full.col(0).setOnes();
  for (int l = 1; l <= order; ++l) {
    full.col(l) = v.col(target).segment(order - l, n);
    full.col(order + l) = v.col(source).segment(order - l, n);
  }
  const Vector y = v.col(target).tail(n);
  auto rss = [&](const Matrix& design) {
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < design.cols()) throw NumericalError("granger: singular design matrix");
    return (y - design * qr.solve(y)).squaredNorm();
  };
  const double rss_r = rss(full.leftCols(1 + order));
  const double rss_u = rss(full);
  const double df1 = order;
  const double df2 = static_cast<double>(n - 1 - 2 * order);
  if (!(rss_u > 0.0)) return rss_r > 0.0 ? 0.0 : 1.0;
  const double f = std::max(0.0, (rss_r - rss_u) / df1) / (rss_u / df2);
  boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

EmbeddingSpec PipelineConfig::embedding(const DgpSpec& dgp) const {
  const Layout l = layout(dgp);
  EmbeddingSpec spec;
  spec.source_indices = l.sources;
  spec.target_indices = l.targets;
  spec.source_depth = source_depth;
  spec.target_depth = target_depth;
  spec.source_map = source_map;
  if (condition) spec.conditioning_indices = l.confounders;
  return spec;
}

double McResult::rate(const std::string& statistic) const {
  for (std::size_t s = 0; s < statistics.size(); ++s)
    if (statistics[s] == statistic) return rejection_rate[s];
  throw ConfigError("statistic '" + statistic + "' was not run");
}

double McResult::standard_error(double rate, int reps) {
  return reps > 0 ? std::sqrt(rate * (1.0 - rate) / reps) : 0.0;
}

McResult run_mc(const DgpSpec& dgp, const PipelineConfig& config, int reps) {
  if (reps < 1) throw ConfigError("Monte Carlo needs at least one replication");
  dgp.validate();
  std::vector<DispersionStatistic> stats;
  for (const auto& s : config.statistics) stats.push_back(DispersionStatistic::parse(s));
  if (stats.empty()) throw ConfigError("no statistics requested");
  const DeformationSet def(config.lags);
  const Layout lay = layout(dgp);

  McResult result;
  result.reps = reps;
  result.alpha = config.alpha;
  for (const auto& s : stats) result.statistics.push_back(s.name());
  result.p_values.assign(stats.size(), std::vector<double>(static_cast<std::size_t>(reps)));
  result.observed = result.p_values;
  if (config.granger_order > 0) result.granger_p.assign(static_cast<std::size_t>(reps), 1.0);

  parallel_for(static_cast<std::size_t>(reps), config.threads, [&](std::size_t r) {
    DgpSpec rep = dgp;
    rep.seed = derive_seed(dgp.seed, r);
    const TimeSeriesPanel panel = generate(rep);
    OperatorEngine engine(panel, config.embedding(rep), def, config.kind, config.ridge);
    RandomizationPlan plan;
    plan.num_shifts = config.num_shifts;
    plan.sampler = config.sampler;
    plan.seed = derive_seed(rep.seed, 1);
    const auto tests = randomization_tests(engine, stats, plan, 1);
    for (std::size_t s = 0; s < tests.size(); ++s) {
      result.p_values[s][r] = tests[s].p_value;
      result.observed[s][r] = tests[s].observed;
    }
    if (config.granger_order > 0) {
      result.granger_p[r] = granger_f_test(panel, lay.sources[0], lay.targets[0], config.granger_order);
    }
  });

  auto rate = [&](const std::vector<double>& p) {
    return static_cast<double>(std::count_if(p.begin(), p.end(),
                                             [&](double x) { return x < config.alpha; })) /
           reps;
  };
  for (const auto& p : result.p_values) result.rejection_rate.push_back(rate(p));
  if (config.granger_order > 0) result.granger_rejection_rate = rate(result.granger_p);
  return result;
}

namespace {

std::string fmt(double x) {
  std::string s = std::to_string(x);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table1", "table2", "table3", "bulk", "rank", "edge", "m-to-1", "m-to-n"};
}

std::vector<McCell> preset_cells(const std::string& preset) {
  std::vector<McCell> cells;
  PipelineConfig base;
  base.statistics = {"trace", "frobenius", "logdet"};
  if (preset == "table1") {
    for (Index t : {500, 1000}) {
      McCell c;
      c.label = "T=" + std::to_string(t) + ",K=20";
      c.dgp.length = t;
      c.dgp.width = 20;
      c.pipeline = base;
      cells.push_back(c);
    }
  } else if (preset == "table2") {
    for (bool quadratic : {true, false}) {
      McCell c;
      c.label = quadratic ? "embedding=quadratic" : "embedding=linear";
      c.dgp.kind = DgpKind::NonlinearQuadratic;
      c.dgp.width = 2;
      c.dgp.length = 500;
      c.dgp.strength = 0.2;
      c.pipeline = base;
      if (quadratic) c.pipeline.source_map = FeatureMap::monomials(2);
      c.pipeline.granger_order = 1;
      cells.push_back(c);
    }
  } else if (preset == "table3") {
    for (double theta : {0.0, 0.25}) {
      for (bool cond : {false, true}) {
        McCell c;
        c.label = "theta=" + fmt(theta) + (cond ? ",conditional" : ",unconditional");
        c.dgp.kind = DgpKind::Confounded;
        c.dgp.width = 2;
        c.dgp.length = 500;
        c.dgp.theta_direct = theta;
        c.dgp.observe_confounder = true;
        c.pipeline = base;
        c.pipeline.statistics = {"trace"};
        c.pipeline.condition = cond;
        c.pipeline.granger_order = 1;
        cells.push_back(c);
      }
    }
  } else if (preset == "bulk") {
    for (double s : {0.05, 0.1, 0.2, 0.4}) {
      McCell c;
      c.label = "strength=" + fmt(s);
      c.dgp.kind = DgpKind::Bulk;
      c.dgp.width = 20;
      c.dgp.strength = s;
      c.pipeline = base;
      cells.push_back(c);
    }
  } else if (preset == "rank") {
    for (int r : {1, 4, 8, 16}) {
      McCell c;
      c.label = "rank=" + std::to_string(r);
      c.dgp.kind = DgpKind::RankR;
      c.dgp.width = 32;
      c.dgp.length = 250;
      c.dgp.strength = 3.0;
      c.dgp.rank = r;
      c.pipeline = base;
      c.pipeline.statistics = {"frobenius", "trace"};
      cells.push_back(c);
    }
  } else if (preset == "edge") {
    for (double s : {0.0, 0.02, 0.05, 0.1}) {
      McCell c;
      c.label = "strength=" + fmt(s);
      c.dgp.kind = DgpKind::EdgeRankOne;
      c.dgp.width = 10;
      c.dgp.strength = s;
      c.pipeline = base;
      c.pipeline.statistics = {"trace", "frobenius", "logdet", "wasserstein"};
      cells.push_back(c);
    }
  } else if (preset == "m-to-1") {
    for (int m : {1, 2, 4, 8}) {
      McCell c;
      c.label = "M=" + std::to_string(m);
      c.dgp.kind = DgpKind::ManyToOne;
      c.dgp.width = 12;
      c.dgp.group_sources = m;
      c.dgp.strength = 0.1;
      c.pipeline = base;
      cells.push_back(c);
    }
  } else if (preset == "m-to-n") {
    for (int n : {1, 2, 4, 8}) {
      McCell c;
      c.label = "M=4,N=" + std::to_string(n);
      c.dgp.kind = DgpKind::GroupToGroup;
      c.dgp.width = 12;
      c.dgp.group_sources = 4;
      c.dgp.group_targets = n;
      c.dgp.rank = std::min(4, n);
      c.dgp.strength = 0.2;
      c.pipeline = base;
      cells.push_back(c);
    }
  } else {
    throw ConfigError("unknown simulation preset '" + preset + "'");
  }
  return cells;
}

}  // namespace orderspec
