// orderspec command-line tool: simulate, test, monitor.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orderspec/errors.hpp"
#include "orderspec/inference.hpp"
#include "orderspec/io.hpp"
#include "orderspec/monitor.hpp"
#include "orderspec/parallel.hpp"
#include "orderspec/rng.hpp"
#include "orderspec/simulation.hpp"
#include "orderspec/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace orderspec;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output;
};

struct SimulateArgs {
  std::optional<std::string> preset;
  std::optional<std::string> cell;
  std::optional<int> reps;
  std::optional<int> shifts;
  std::optional<std::string> op;
  std::optional<std::string> statistics;
  std::optional<double> alpha;
};

struct PreprocessArgs {
  std::optional<double> winsor_low;
  std::optional<double> winsor_high;
  bool raw = false;
};

struct TestArgs {
  std::optional<std::string> input;
  std::optional<std::string> source;
  std::optional<std::string> target;
  std::optional<std::string> condition;
  std::optional<std::string> lags;
  std::optional<int> source_depth;
  std::optional<int> target_depth;
  std::optional<int> source_degree;
  std::optional<std::string> summary;
  std::optional<int> shifts;
  std::optional<std::string> op;
  std::optional<double> ridge;
  std::optional<std::string> tail;
  std::optional<std::string> sampler;
  std::optional<long long> min_offset;
  PreprocessArgs pre;
};

struct MonitorArgs {
  std::optional<std::string> input;
  std::optional<std::string> preset;
  std::optional<long long> window;
  std::optional<long long> step;
  std::optional<int> depth;
  std::optional<std::string> lags;
  std::optional<std::string> early;
  std::optional<std::string> late;
  std::optional<int> shifts;
  std::optional<double> alpha;
  std::optional<double> network_alpha;
  std::optional<int> top_k;
  std::optional<int> hub_rank;
  std::optional<double> ridge;
  std::optional<std::string> clusters;
  PreprocessArgs pre;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

json section(const json& config, const char* name) {
  if (!config.contains(name)) return json::object();
  if (!config.at(name).is_object()) throw ConfigError(std::string("config '") + name + "' must be an object");
  return config.at(name);
}

/// Flag value, else config value, else fallback.
template <class T>
T pick(const std::optional<T>& flag, const json& sec, const char* key, T fallback) {
  if (flag) return *flag;
  if (!sec.contains(key)) return fallback;
  try {
    return sec.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "'");
  }
}

/// "1..5", "1,2,3,5" or a mix such as "1..3,5".
std::vector<int> parse_lags(const std::string& text) {
  std::vector<int> lags;
  for (const auto& part : split(text)) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      lags.push_back(parse_int(part, "lag"));
    } else {
      const int lo = parse_int(part.substr(0, dots), "lag");
      const int hi = parse_int(part.substr(dots + 2), "lag");
      if (hi < lo) throw ConfigError("lag range '" + part + "' is empty");
      for (int l = lo; l <= hi; ++l) lags.push_back(l);
    }
  }
  if (lags.empty()) throw ConfigError("empty lag list");
  return lags;
}

/// Lag lists may be given as strings or JSON arrays in the config file.
std::vector<int> pick_lags(const std::optional<std::string>& flag, const json& sec, const char* key,
                           const std::vector<int>& fallback) {
  if (flag) return parse_lags(*flag);
  if (!sec.contains(key)) return fallback;
  const json& v = sec.at(key);
  if (v.is_string()) return parse_lags(v.get<std::string>());
  try {
    return v.get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' must be a lag string or integer array");
  }
}

std::vector<std::string> pick_list(const std::optional<std::string>& flag, const json& sec,
                                   const char* key, const std::vector<std::string>& fallback) {
  if (flag) return split(*flag);
  if (!sec.contains(key)) return fallback;
  const json& v = sec.at(key);
  if (v.is_string()) return split(v.get<std::string>());
  try {
    return v.get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' must be a string or string array");
  }
}

OperatorKind parse_operator(const std::string& s) {
  if (s == "gram" || s == "coherence") return OperatorKind::DirectedCoherenceGram;
  if (s == "stacked" || s == "covariance") return OperatorKind::StackedCovariance;
  throw ConfigError("unknown operator '" + s + "' (use gram or stacked)");
}

std::string operator_name(OperatorKind k) {
  return k == OperatorKind::DirectedCoherenceGram ? "gram" : "stacked";
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunContext {
  std::string command;
  fs::path out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (out_dir / name).string();
  }
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_manifest(RunContext& ctx, const json& effective) {
  json m;
  m["tool"] = "orderspec";
  m["version"] = ORDERSPEC_VERSION;
  m["command"] = ctx.command;
  m["seed"] = ctx.seed;
  m["threads"] = ctx.threads;
  m["config"] = effective;
  m["config_hash"] = hex64(fnv1a(effective.dump()));
  m["created"] = utc_now();
  m["outputs"] = ctx.outputs;
  m["warnings"] = ctx.warnings;
  write_json((ctx.out_dir / "manifest.json").string(), m);
}

RunContext make_context(const std::string& command, const Common& common, const json& config) {
  RunContext ctx;
  ctx.command = command;
  ctx.seed = pick(common.seed, config, "seed", std::uint64_t{0});
  ctx.threads = resolve_threads(pick(common.threads, config, "threads", 0u));
  ctx.out_dir = pick(common.output, config, "output", std::string("orderspec-out"));
  return ctx;
}

void prepare_output(const RunContext& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
}

PreprocessConfig preprocess_config(const PreprocessArgs& a, const json& config, json& effective) {
  const json sec = section(config, "preprocess");
  PreprocessConfig p;
  p.winsor_low = pick(a.winsor_low, sec, "winsor_low", p.winsor_low);
  p.winsor_high = pick(a.winsor_high, sec, "winsor_high", p.winsor_high);
  const bool raw = a.raw || (sec.contains("raw") && sec.at("raw").get<bool>());
  p.winsorize = !raw;
  p.standardize = !raw;
  p.validate();
  effective["preprocess"] = {{"winsor_low", p.winsor_low},
                             {"winsor_high", p.winsor_high},
                             {"raw", raw}};
  return p;
}

TimeSeriesPanel load_panel(const std::string& input, const PreprocessConfig& p, RunContext& ctx) {
  TimeSeriesPanel panel = ingest_csv(input, ctx.warnings);
  if (p.winsorize || p.standardize) panel = preprocess(panel, p, ctx.warnings);
  return panel;
}

std::vector<Index> resolve_labels(const TimeSeriesPanel& panel, const std::vector<std::string>& labels) {
  std::vector<Index> idx;
  for (const auto& l : labels) idx.push_back(panel.column(l));
  return idx;
}

bool cell_matches(const std::string& label, const std::string& filter) {
  const auto have = split(label);
  for (const auto& token : split(filter)) {
    if (std::find(have.begin(), have.end(), token) == have.end()) return false;
  }
  return true;
}

void print_warnings(const RunContext& ctx) {
  for (const auto& w : ctx.warnings) std::cerr << "warning: " << w << '\n';
}

int run_simulate(const Common& common, const SimulateArgs& a, const json& config) {
  const json sec = section(config, "simulate");
  RunContext ctx = make_context("simulate", common, config);
  const std::string preset = pick(a.preset, sec, "preset", std::string());
  if (preset.empty()) throw ConfigError("simulate needs --preset (one of table1, table2, table3, bulk, rank, edge, m-to-1, m-to-n)");
  const std::string filter = pick(a.cell, sec, "cell", std::string());
  std::vector<McCell> cells;
  for (auto& c : preset_cells(preset)) {
    if (filter.empty() || cell_matches(c.label, filter)) cells.push_back(std::move(c));
  }
  if (cells.empty()) throw ConfigError("no cell of preset '" + preset + "' matches '" + filter + "'");

  const int reps_override = pick(a.reps, sec, "reps", 0);
  for (auto& c : cells) {
    if (reps_override != 0) c.reps = reps_override;
    c.pipeline.num_shifts = pick(a.shifts, sec, "shifts", c.pipeline.num_shifts);
    c.pipeline.alpha = pick(a.alpha, sec, "alpha", c.pipeline.alpha);
    c.pipeline.kind = parse_operator(pick(a.op, sec, "operator", operator_name(c.pipeline.kind)));
    c.pipeline.statistics = pick_list(a.statistics, sec, "statistics", c.pipeline.statistics);
    for (const auto& s : c.pipeline.statistics) (void)DispersionStatistic::parse(s);
    c.pipeline.threads = ctx.threads;
    c.dgp.seed = derive_seed(ctx.seed, fnv1a(preset + "/" + c.label));
    c.dgp.validate();
    if (c.reps < 1) throw ConfigError("reps must be >= 1");
    if (c.pipeline.num_shifts < 1) throw ConfigError("shifts must be >= 1");
  }
  json effective = {{"preset", preset}, {"cell", filter}, {"seed", ctx.seed}};
  json cell_echo = json::array();
  for (const auto& c : cells) {
    cell_echo.push_back({{"label", c.label},
                         {"process", dgp_kind_name(c.dgp.kind)},
                         {"T", c.dgp.length},
                         {"K", c.dgp.width},
                         {"rho", c.dgp.rho},
                         {"tau_star", c.dgp.tau_star},
                         {"strength", c.dgp.strength},
                         {"rank", c.dgp.rank},
                         {"theta_direct", c.dgp.theta_direct},
                         {"conditional", c.pipeline.condition},
                         {"operator", operator_name(c.pipeline.kind)},
                         {"statistics", c.pipeline.statistics},
                         {"lags", c.pipeline.lags},
                         {"source_depth", c.pipeline.source_depth},
                         {"target_depth", c.pipeline.target_depth},
                         {"source_map_degree", c.pipeline.source_map.max_degree()},
                         {"shifts", c.pipeline.num_shifts},
                         {"alpha", c.pipeline.alpha},
                         {"granger_order", c.pipeline.granger_order},
                         {"reps", c.reps},
                         {"cell_seed", c.dgp.seed}});
  }
  effective["cells"] = cell_echo;
  prepare_output(ctx);

  std::ofstream summary(ctx.path("simulate_" + preset + ".csv"));
  summary << "preset,cell,process,T,K,strength,statistic,reps,shifts,alpha,rejection_rate,mc_se\n";
  std::ofstream pvals(ctx.path("simulate_" + preset + "_pvalues.csv"));
  pvals << "cell,rep,statistic,observed,p_value\n";
  for (const auto& c : cells) {
    const McResult r = run_mc(c.dgp, c.pipeline, c.reps);
    auto row = [&](const std::string& stat, double rate) {
      summary << preset << ",\"" << c.label << "\"," << dgp_kind_name(c.dgp.kind) << ','
              << c.dgp.length << ',' << c.dgp.width << ',' << format_number(c.dgp.strength) << ','
              << stat << ',' << c.reps << ',' << c.pipeline.num_shifts << ','
              << format_number(c.pipeline.alpha) << ',' << format_number(rate) << ','
              << format_number(McResult::standard_error(rate, c.reps)) << '\n';
      std::printf("%-28s %-12s %.3f\n", c.label.c_str(), stat.c_str(), rate);
    };
    for (std::size_t s = 0; s < r.statistics.size(); ++s) {
      row(r.statistics[s], r.rejection_rate[s]);
      for (int k = 0; k < r.reps; ++k) {
        pvals << '"' << c.label << "\"," << k << ',' << r.statistics[s] << ','
              << format_number(r.observed[s][k]) << ',' << format_number(r.p_values[s][k]) << '\n';
      }
    }
    if (r.granger_rejection_rate) {
      row("granger", *r.granger_rejection_rate);
      for (int k = 0; k < r.reps; ++k) {
        pvals << '"' << c.label << "\"," << k << ",granger,NA," << format_number(r.granger_p[k]) << '\n';
      }
    }
  }
  write_manifest(ctx, effective);
  return kOk;
}

int run_test(const Common& common, const TestArgs& a, const json& config) {
  const json sec = section(config, "test");
  RunContext ctx = make_context("test", common, config);
  json effective;
  const std::string input = pick(a.input, sec, "input", std::string());
  if (input.empty()) throw ConfigError("test needs --input");
  const auto sources = pick_list(a.source, sec, "source", {});
  const auto targets = pick_list(a.target, sec, "target", {});
  const auto conditioning = pick_list(a.condition, sec, "condition", {});
  if (sources.empty() || targets.empty()) throw ConfigError("test needs --source and --target");
  const DeformationSet def(pick_lags(a.lags, sec, "lags", {1, 2, 3, 4, 5}));
  EmbeddingSpec spec;
  spec.source_depth = pick(a.source_depth, sec, "source_depth", 5);
  spec.target_depth = pick(a.target_depth, sec, "target_depth", 5);
  const int degree = pick(a.source_degree, sec, "source_degree", 1);
  spec.source_map = FeatureMap::monomials(degree);
  const auto stat_names = pick_list(a.summary, sec, "summary", {"trace"});
  std::vector<DispersionStatistic> stats;
  for (const auto& s : stat_names) stats.push_back(DispersionStatistic::parse(s));
  const OperatorKind kind = parse_operator(pick(a.op, sec, "operator", std::string("gram")));
  const double ridge = pick(a.ridge, sec, "ridge", kDefaultRidge);
  RandomizationPlan plan;
  plan.num_shifts = pick(a.shifts, sec, "shifts", 100);
  const std::string tail = pick(a.tail, sec, "tail", std::string("upper"));
  if (tail == "upper") {
    plan.tail = Tail::Upper;
  } else if (tail == "two-sided") {
    plan.tail = Tail::TwoSided;
  } else {
    throw ConfigError("tail must be 'upper' or 'two-sided'");
  }
  const std::string sampler = pick(a.sampler, sec, "sampler", std::string("uniform"));
  if (sampler == "uniform") {
    plan.sampler.kind = ShiftSampler::Kind::UniformOffsets;
  } else if (sampler == "even") {
    plan.sampler.kind = ShiftSampler::Kind::EvenlySpaced;
  } else {
    throw ConfigError("sampler must be 'uniform' or 'even'");
  }
  plan.sampler.min_offset = pick(a.min_offset, sec, "min_offset", 0LL);
  plan.seed = ctx.seed;
  if (plan.num_shifts < 1) throw ConfigError("shifts must be >= 1");
  if (spec.source_depth < 1 || spec.target_depth < 0) throw ConfigError("bad embedding depth");
  const PreprocessConfig pre = preprocess_config(a.pre, config, effective);

  effective["input"] = input;
  effective["source"] = sources;
  effective["target"] = targets;
  effective["condition"] = conditioning;
  effective["lags"] = def.lags();
  effective["source_depth"] = spec.source_depth;
  effective["target_depth"] = spec.target_depth;
  effective["source_degree"] = degree;
  effective["summary"] = stat_names;
  effective["operator"] = operator_name(kind);
  effective["ridge"] = ridge;
  effective["shifts"] = plan.num_shifts;
  effective["tail"] = tail;
  effective["sampler"] = sampler;
  effective["min_offset"] = plan.sampler.min_offset;
  effective["seed"] = ctx.seed;

  const TimeSeriesPanel panel = load_panel(input, pre, ctx);
  spec.source_indices = resolve_labels(panel, sources);
  spec.target_indices = resolve_labels(panel, targets);
  spec.conditioning_indices = resolve_labels(panel, conditioning);
  OperatorEngine engine(panel, spec, def, kind, ridge);
  prepare_output(ctx);
  const auto results = randomization_tests(engine, stats, plan, ctx.threads);

  json out;
  out["input"] = input;
  out["source"] = sources;
  out["target"] = targets;
  out["condition"] = conditioning;
  out["lags"] = def.lags();
  out["operator"] = operator_name(kind);
  out["sample_size"] = engine.sample_size();
  out["dimension"] = engine.dim();
  out["shifts"] = plan.num_shifts;
  out["tail"] = tail;
  out["results"] = json::array();
  std::ofstream lags_csv(ctx.path("test_lags.csv"));
  lags_csv << "statistic,lag,value\n";
  for (const auto& r : results) {
    json jr;
    jr["statistic"] = r.statistic;
    jr["observed"] = r.observed;
    jr["p_value"] = r.p_value;
    jr["sup_lag"] = r.observed_detail.sup_lag;
    jr["inf_lag"] = r.observed_detail.inf_lag;
    jr["replicates"] = r.replicates;
    if (r.observed_detail.kind == DispersionResult::Kind::Scalar) {
      jr["per_lag"] = r.observed_detail.per_lag_values;
      for (std::size_t i = 0; i < r.observed_detail.lags.size(); ++i) {
        lags_csv << r.statistic << ',' << r.observed_detail.lags[i] << ','
                 << format_number(r.observed_detail.per_lag_values[i]) << '\n';
      }
    }
    out["results"].push_back(jr);
    std::printf("%-12s observed %.6g  p = %.6g\n", r.statistic.c_str(), r.observed, r.p_value);
  }
  write_json(ctx.path("test.json"), out);

  std::ofstream spectra_csv(ctx.path("test_spectra.csv"));
  spectra_csv << "lag,index,eigenvalue\n";
  const auto spectra = engine.spectra(0);
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (Index r = 0; r < spectra[i].size(); ++r) {
      spectra_csv << def.lags()[i] << ',' << r + 1 << ',' << format_number(spectra[i][r]) << '\n';
    }
  }
  print_warnings(ctx);
  write_manifest(ctx, effective);
  return kOk;
}

MonitorConfig monitor_config(const MonitorArgs& a, const json& sec, const RunContext& ctx) {
  MonitorConfig c;  // defaults are the empirical preset
  const std::string preset = pick(a.preset, sec, "preset", std::string("empirical"));
  if (preset != "empirical" && preset != "paper-empirical") {
    throw ConfigError("unknown monitor preset '" + preset + "'");
  }
  c.window = pick(a.window, sec, "window", static_cast<long long>(c.window));
  c.step = pick(a.step, sec, "step", static_cast<long long>(c.step));
  c.depth = pick(a.depth, sec, "depth", c.depth);
  c.lags = pick_lags(a.lags, sec, "lags", c.lags);
  c.early_lags = pick_lags(a.early, sec, "early", c.early_lags);
  c.late_lags = pick_lags(a.late, sec, "late", c.late_lags);
  c.num_shifts = pick(a.shifts, sec, "shifts", c.num_shifts);
  c.alpha = pick(a.alpha, sec, "alpha", c.alpha);
  c.network_alpha = pick(a.network_alpha, sec, "network_alpha", c.network_alpha);
  c.top_k_hubs = pick(a.top_k, sec, "top_k", c.top_k_hubs);
  c.hub_rank = pick(a.hub_rank, sec, "hub_rank", c.hub_rank);
  c.ridge = pick(a.ridge, sec, "ridge", c.ridge);
  c.seed = ctx.seed;
  c.threads = ctx.threads;
  return c;
}

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

int run_monitor_cmd(const Common& common, const MonitorArgs& a, const json& config) {
  const json sec = section(config, "monitor");
  RunContext ctx = make_context("monitor", common, config);
  json effective;
  const std::string input = pick(a.input, sec, "input", std::string());
  if (input.empty()) throw ConfigError("monitor needs --input");
  const MonitorConfig cfg = monitor_config(a, sec, ctx);
  cfg.validate(std::numeric_limits<Index>::max());
  const std::string clusters_path = pick(a.clusters, sec, "clusters", std::string());
  const PreprocessConfig pre = preprocess_config(a.pre, config, effective);
  effective["input"] = input;
  effective["window"] = cfg.window;
  effective["step"] = cfg.step;
  effective["depth"] = cfg.depth;
  effective["lags"] = cfg.lags;
  effective["early"] = cfg.early_lags;
  effective["late"] = cfg.late_lags;
  effective["shifts"] = cfg.num_shifts;
  effective["alpha"] = cfg.alpha;
  effective["network_alpha"] = cfg.network_alpha;
  effective["top_k"] = cfg.top_k_hubs;
  effective["hub_rank"] = cfg.hub_rank;
  effective["ridge"] = cfg.ridge;
  effective["clusters"] = clusters_path;
  effective["seed"] = ctx.seed;

  const std::vector<Cluster> clusters =
      clusters_path.empty() ? std::vector<Cluster>{} : read_clusters_csv(clusters_path);
  const TimeSeriesPanel panel = load_panel(input, pre, ctx);
  cfg.validate(panel.length());
  prepare_output(ctx);
  const RollingReport report = run_monitor(panel, cfg, clusters);
  ctx.warnings.insert(ctx.warnings.end(), report.warnings.begin(), report.warnings.end());

  {
    std::ofstream out(ctx.path("monitor_windows.csv"));
    out << "window_end,lambda1,p_lambda1,trace,p_trace,eff_rank,p_effrank,tau_com,D,hub_rank";
    for (int l : report.lags) out << ",E_tau_" << l;
    out << '\n';
    for (const auto& w : report.windows) {
      out << w.window_end << ',' << format_number(w.lambda1) << ',' << format_number(w.p_lambda1)
          << ',' << format_number(w.trace) << ',' << format_number(w.p_trace) << ','
          << format_number(w.eff_rank) << ',' << format_number(w.p_effrank) << ','
          << opt_number(w.tau_com) << ',' << opt_number(w.dominance) << ',' << w.hub_rank;
      for (double e : w.lag_energy) out << ',' << format_number(e);
      out << '\n';
    }
  }
  auto hub_csv = [&](const std::string& name, bool target) {
    std::ofstream out(ctx.path(name));
    out << "window_end";
    for (const auto& l : report.labels) out << ',' << l;
    out << '\n';
    for (const auto& w : report.windows) {
      out << w.window_end;
      const Vector& h = target ? w.hub_target : w.hub_source;
      for (Index i = 0; i < h.size(); ++i) out << ',' << format_number(h[i]);
      out << '\n';
    }
  };
  hub_csv("monitor_hubs_target.csv", true);
  hub_csv("monitor_hubs_source.csv", false);
  {
    std::ofstream out(ctx.path("monitor_turnover.csv"));
    out << "window_end,turnover\n";
    for (std::size_t t = 0; t < report.turnover.size(); ++t) {
      out << report.windows[t + 1].window_end << ',' << format_number(report.turnover[t]) << '\n';
    }
  }
  write_matrix_csv(ctx.path("network_episode.csv"), report.episode_network, report.labels, report.labels);
  write_matrix_csv(ctx.path("network_null_threshold.csv"), report.null_threshold_network,
                   report.labels, report.labels);
  write_matrix_csv(ctx.path("dominance_map.csv"), report.signed_dominance_map, report.labels,
                   report.labels);
  if (!clusters.empty()) {
    std::ofstream out(ctx.path("macro_hub.csv"));
    out << "window_end";
    for (const auto& n : report.macro.names) out << ',' << n;
    out << ",dominant\n";
    for (std::size_t w = 0; w < report.windows.size(); ++w) {
      out << report.windows[w].window_end;
      for (const auto& s : report.macro.series) out << ',' << format_number(s[w]);
      out << ',' << report.macro.dominant[w] << '\n';
    }
  }
  json episodes = json::array();
  for (const auto& [s, e] : report.episodes) {
    episodes.push_back({{"start_window", s},
                        {"end_window", e},
                        {"start", report.windows[s].window_end},
                        {"end", report.windows[e].window_end},
                        {"windows", e - s + 1}});
  }
  json index;
  index["windows"] = report.windows.size();
  index["alpha"] = cfg.alpha;
  index["episodes"] = episodes;
  index["dominant_clusters"] = report.macro.dominant;
  index["warnings"] = report.warnings;
  write_json(ctx.path("monitor_episodes.json"), index);
  std::printf("%zu windows, %zu episode(s)\n", report.windows.size(), report.episodes.size());
  for (const auto& e : episodes) {
    std::printf("  %s .. %s (%d windows)\n", e["start"].get<std::string>().c_str(),
                e["end"].get<std::string>().c_str(), e["windows"].get<int>());
  }
  print_warnings(ctx);
  write_manifest(ctx, effective);
  return kOk;
}

void add_preprocess_flags(CLI::App* cmd, PreprocessArgs& p) {
  cmd->add_option("--winsor-low", p.winsor_low, "Lower winsorization quantile (default 0.005)");
  cmd->add_option("--winsor-high", p.winsor_high, "Upper winsorization quantile (default 0.995)");
  cmd->add_flag("--raw", p.raw, "Skip winsorization and standardization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-constrained spectral causality: simulation, testing and monitoring"};
  app.set_version_flag("--version", std::string(ORDERSPEC_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "JSON config file; flags override it");
  app.add_option("--seed", common.seed, "Master seed (default 0)");
  app.add_option("--threads", common.threads, "Worker threads (default: all cores)");
  app.add_option("--output,-o", common.output, "Output directory (default orderspec-out)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiments");
  simulate->add_option("--preset", sim.preset, "table1, table2, table3, bulk, rank, edge, m-to-1, m-to-n");
  simulate->add_option("--cell", sim.cell, "Run only cells whose label has these tokens, e.g. T=1000,K=20");
  simulate->add_option("--reps", sim.reps, "Monte Carlo replications per cell");
  simulate->add_option("--shifts", sim.shifts, "Circular shifts per test");
  simulate->add_option("--operator", sim.op, "gram or stacked");
  simulate->add_option("--statistics", sim.statistics, "Comma-separated statistics");
  simulate->add_option("--alpha", sim.alpha, "Rejection level");

  TestArgs test;
  auto* testcmd = app.add_subcommand("test", "Randomization test on a CSV panel");
  testcmd->add_option("--input,-i", test.input, "CSV panel");
  testcmd->add_option("--source", test.source, "Source column label(s), comma-separated");
  testcmd->add_option("--target", test.target, "Target column label(s), comma-separated");
  testcmd->add_option("--condition", test.condition, "Conditioning column label(s)");
  testcmd->add_option("--lags", test.lags, "Lag set, e.g. 1..5 or 1,2,3,5");
  testcmd->add_option("--source-depth", test.source_depth, "Source embedding depth (default 5)");
  testcmd->add_option("--target-depth", test.target_depth, "Target embedding depth, 0 = contemporaneous (default 5)");
  testcmd->add_option("--source-degree", test.source_degree, "Monomial degree of the source feature map (default 1)");
  testcmd->add_option("--summary", test.summary, "trace, frobenius, logdet[:eps], power:q, lambda1, wasserstein");
  testcmd->add_option("--shifts", test.shifts, "Circular shifts (default 100)");
  testcmd->add_option("--operator", test.op, "gram (default) or stacked");
  testcmd->add_option("--ridge", test.ridge, "Ridge added before whitening (default 1e-8)");
  testcmd->add_option("--tail", test.tail, "upper (default) or two-sided");
  testcmd->add_option("--sampler", test.sampler, "uniform (default) or even");
  testcmd->add_option("--min-offset", test.min_offset, "Smallest shift offset (default max lag + source depth)");
  add_preprocess_flags(testcmd, test.pre);

  MonitorArgs mon;
  auto* monitor = app.add_subcommand("monitor", "Rolling-window operator monitoring");
  monitor->add_option("--input,-i", mon.input, "CSV panel");
  monitor->add_option("--preset", mon.preset, "empirical (default)");
  monitor->add_option("--window", mon.window, "Window length (default 252)");
  monitor->add_option("--step", mon.step, "Window step (default 21)");
  monitor->add_option("--depth", mon.depth, "Driver embedding depth (default 3)");
  monitor->add_option("--lags", mon.lags, "Lag set (default 1,2,3,5)");
  monitor->add_option("--early", mon.early, "Early lags (default 1,2)");
  monitor->add_option("--late", mon.late, "Late lags (default 3,5)");
  monitor->add_option("--shifts", mon.shifts, "Circular shifts per window (default 20)");
  monitor->add_option("--alpha", mon.alpha, "Window significance level (default 0.05)");
  monitor->add_option("--network-alpha", mon.network_alpha, "Network masking level (default 0.05)");
  monitor->add_option("--top-k", mon.top_k, "Hub set size for turnover (default 20)");
  monitor->add_option("--hub-rank", mon.hub_rank, "Hub projector rank, 0 = automatic");
  monitor->add_option("--ridge", mon.ridge, "Ridge added before whitening (default 1e-8)");
  monitor->add_option("--clusters", mon.clusters, "CSV of driver,cluster rows");
  add_preprocess_flags(monitor, mon.pre);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    const json config = load_config(common.config_path);
    if (simulate->parsed()) return run_simulate(common, sim, config);
    if (testcmd->parsed()) return run_test(common, test, config);
    if (monitor->parsed()) return run_monitor_cmd(common, mon, config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
