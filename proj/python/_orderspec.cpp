// Python bindings for the orderspec core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orderspec/errors.hpp"
#include "orderspec/inference.hpp"
#include "orderspec/linalg.hpp"
#include "orderspec/monitor.hpp"
#include "orderspec/operators.hpp"
#include "orderspec/simulation.hpp"
#include "orderspec/spectral.hpp"

namespace py = pybind11;
using namespace orderspec;

namespace {

OperatorKind parse_operator(const std::string& s) {
  if (s == "gram") return OperatorKind::DirectedCoherenceGram;
  if (s == "stacked") return OperatorKind::StackedCovariance;
  throw ConfigError("unknown operator '" + s + "' (use gram or stacked)");
}

TimeSeriesPanel make_panel(const Matrix& values, std::vector<std::string> labels,
                           std::vector<std::string> times) {
  if (labels.empty() && times.empty()) return TimeSeriesPanel::from_matrix(values);
  if (labels.empty()) {
    for (Index j = 0; j < values.cols(); ++j) labels.push_back("x" + std::to_string(j));
  }
  if (times.empty()) {
    for (Index t = 0; t < values.rows(); ++t) times.push_back(std::to_string(t));
  }
  return TimeSeriesPanel(std::move(labels), std::move(times), values);
}

std::vector<Index> to_index(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

OperatorEngine make_engine(const Matrix& values, const std::vector<long long>& source,
                           const std::vector<long long>& target,
                           const std::vector<long long>& condition, const std::vector<int>& lags,
                           int source_depth, int target_depth, int source_degree,
                           const std::string& op, double ridge) {
  EmbeddingSpec spec;
  spec.source_indices = to_index(source);
  spec.target_indices = to_index(target);
  spec.conditioning_indices = to_index(condition);
  spec.source_depth = source_depth;
  spec.target_depth = target_depth;
  spec.source_map = FeatureMap::monomials(source_degree);
  return OperatorEngine(TimeSeriesPanel::from_matrix(values), spec, DeformationSet(lags),
                        parse_operator(op), ridge);
}

py::dict window_dict(const WindowStats& w) {
  py::dict d;
  d["start"] = w.start;
  d["window_end"] = w.window_end;
  d["lambda1"] = w.lambda1;
  d["trace"] = w.trace;
  d["eff_rank"] = w.eff_rank;
  d["p_lambda1"] = w.p_lambda1;
  d["p_trace"] = w.p_trace;
  d["p_effrank"] = w.p_effrank;
  d["lag_energy"] = w.lag_energy;
  d["tau_com"] = w.tau_com;
  d["dominance"] = w.dominance;
  d["hub_rank"] = w.hub_rank;
  d["hub_target"] = w.hub_target;
  d["hub_source"] = w.hub_source;
  d["top_hubs"] = w.top_hubs;
  d["driver_matrix"] = w.driver_matrix;
  return d;
}

}  // namespace

PYBIND11_MODULE(_orderspec, m) {
  m.doc() = "Order-indexed spectral operators, dispersion tests and rolling monitoring";
  m.attr("__version__") = ORDERSPEC_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "sym_eig",
      [](const Matrix& a) {
        const EigenSystem es = sym_eig(SymMatrix(a));
        return py::make_tuple(es.values, es.vectors);
      },
      py::arg("a"), "Eigenvalues (descending) and eigenvectors of a symmetric matrix.");

  m.def(
      "lss",
      [](const Vector& eigenvalues, const std::string& summary) {
        return lss(eigenvalues, SpectralSummary::parse(summary));
      },
      py::arg("eigenvalues"), py::arg("summary") = "trace");

  m.def("effective_rank", py::overload_cast<const Vector&>(&effective_rank), py::arg("eigenvalues"));

  m.def(
      "dispersion",
      [](const std::vector<int>& lags, const std::vector<Vector>& spectra,
         const std::string& statistic) {
        const DispersionResult r = DispersionStatistic::parse(statistic).evaluate(lags, spectra);
        py::dict d;
        d["statistic"] = r.statistic;
        d["sup_lag"] = r.sup_lag;
        d["inf_lag"] = r.inf_lag;
        d["per_lag"] = r.per_lag_values;
        return d;
      },
      py::arg("lags"), py::arg("spectra"), py::arg("statistic") = "trace");

  m.def(
      "spectra",
      [](const Matrix& values, const std::vector<long long>& source,
         const std::vector<long long>& target, const std::vector<long long>& condition,
         const std::vector<int>& lags, int source_depth, int target_depth, int source_degree,
         const std::string& op, double ridge, long long shift) {
        return make_engine(values, source, target, condition, lags, source_depth, target_depth,
                           source_degree, op, ridge)
            .spectra(shift);
      },
      py::arg("values"), py::arg("source"), py::arg("target"),
      py::arg("condition") = std::vector<long long>{},
      py::arg("lags") = std::vector<int>{1, 2, 3, 4, 5}, py::arg("source_depth") = 5,
      py::arg("target_depth") = 5, py::arg("source_degree") = 1, py::arg("operator") = "gram",
      py::arg("ridge") = kDefaultRidge, py::arg("shift") = 0,
      "Per-lag operator spectra with the source block circularly shifted by `shift`.");

  m.def(
      "test",
      [](const Matrix& values, const std::vector<long long>& source,
         const std::vector<long long>& target, const std::vector<long long>& condition,
         const std::vector<int>& lags, int source_depth, int target_depth, int source_degree,
         const std::vector<std::string>& statistics, int shifts, const std::string& op,
         double ridge, const std::string& tail, std::uint64_t seed, unsigned threads) {
        const OperatorEngine engine = make_engine(values, source, target, condition, lags,
                                                  source_depth, target_depth, source_degree, op,
                                                  ridge);
        std::vector<DispersionStatistic> stats;
        for (const auto& s : statistics) stats.push_back(DispersionStatistic::parse(s));
        RandomizationPlan plan;
        plan.num_shifts = shifts;
        plan.seed = seed;
        if (tail == "two-sided") {
          plan.tail = Tail::TwoSided;
        } else if (tail != "upper") {
          throw ConfigError("tail must be 'upper' or 'two-sided'");
        }
        std::vector<TestResult> results;
        {
          py::gil_scoped_release release;
          results = randomization_tests(engine, stats, plan, threads);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["statistic"] = r.statistic;
          d["observed"] = r.observed;
          d["p_value"] = r.p_value;
          d["replicates"] = r.replicates;
          d["shifts"] = r.shifts;
          d["per_lag"] = r.observed_detail.per_lag_values;
          d["sup_lag"] = r.observed_detail.sup_lag;
          d["inf_lag"] = r.observed_detail.inf_lag;
          out.append(d);
        }
        return out;
      },
      py::arg("values"), py::arg("source"), py::arg("target"),
      py::arg("condition") = std::vector<long long>{},
      py::arg("lags") = std::vector<int>{1, 2, 3, 4, 5}, py::arg("source_depth") = 5,
      py::arg("target_depth") = 5, py::arg("source_degree") = 1,
      py::arg("statistics") = std::vector<std::string>{"trace"}, py::arg("shifts") = 100,
      py::arg("operator") = "gram", py::arg("ridge") = kDefaultRidge, py::arg("tail") = "upper",
      py::arg("seed") = 0, py::arg("threads") = 1,
      "Circular-shift randomization test of lag dispersion.");

  m.def(
      "generate",
      [](const std::string& kind, long long length, long long width, double strength,
         int tau_star, double rho, int rank, int group_sources, int group_targets,
         double theta_direct, bool observe_confounder, std::uint64_t seed) {
        DgpSpec dgp;
        dgp.kind = parse_dgp_kind(kind);
        dgp.length = length;
        dgp.width = width;
        dgp.strength = strength;
        dgp.tau_star = tau_star;
        dgp.rho = rho;
        dgp.rank = rank;
        dgp.group_sources = group_sources;
        dgp.group_targets = group_targets;
        dgp.theta_direct = theta_direct;
        dgp.observe_confounder = observe_confounder;
        dgp.seed = seed;
        dgp.validate();
        return generate(dgp).values();
      },
      py::arg("kind") = "null", py::arg("length") = 500, py::arg("width") = 20,
      py::arg("strength") = 0.0, py::arg("tau_star") = 2, py::arg("rho") = 0.3,
      py::arg("rank") = 1, py::arg("group_sources") = 1, py::arg("group_targets") = 1,
      py::arg("theta_direct") = 0.0, py::arg("observe_confounder") = false, py::arg("seed") = 0,
      "Simulated panel (T x K) from one of the built-in processes.");

  m.def(
      "monitor",
      [](const Matrix& values, const std::vector<std::string>& labels,
         const std::vector<std::string>& times, long long window, long long step, int depth,
         const std::vector<int>& lags, int shifts, double alpha, double network_alpha,
         std::uint64_t seed, unsigned threads) {
        MonitorConfig cfg;
        cfg.window = window;
        cfg.step = step;
        cfg.depth = depth;
        cfg.lags = lags;
        cfg.num_shifts = shifts;
        cfg.alpha = alpha;
        cfg.network_alpha = network_alpha;
        cfg.seed = seed;
        cfg.threads = threads;
        const TimeSeriesPanel panel = make_panel(values, labels, times);
        RollingReport report;
        {
          py::gil_scoped_release release;
          report = run_monitor(panel, cfg);
        }
        py::list windows;
        for (const auto& w : report.windows) windows.append(window_dict(w));
        py::dict d;
        d["labels"] = report.labels;
        d["lags"] = report.lags;
        d["windows"] = windows;
        d["episodes"] = report.episodes;
        d["turnover"] = report.turnover;
        d["episode_network"] = report.episode_network;
        d["null_threshold_network"] = report.null_threshold_network;
        d["signed_dominance_map"] = report.signed_dominance_map;
        d["warnings"] = report.warnings;
        return d;
      },
      py::arg("values"), py::arg("labels") = std::vector<std::string>{},
      py::arg("times") = std::vector<std::string>{}, py::arg("window") = 252,
      py::arg("step") = 21, py::arg("depth") = 3, py::arg("lags") = std::vector<int>{1, 2, 3, 5},
      py::arg("shifts") = 20, py::arg("alpha") = 0.05, py::arg("network_alpha") = 0.05,
      py::arg("seed") = 0, py::arg("threads") = 1, "Rolling-window monitoring report.");
}
