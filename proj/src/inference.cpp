#include "orderspec/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orderspec/errors.hpp"
#include "orderspec/parallel.hpp"
#include "orderspec/rng.hpp"

namespace orderspec {

double upper_p(double observed, const std::vector<double>& replicates) {
  const auto hits = std::count_if(replicates.begin(), replicates.end(),
                                  [observed](double r) { return r >= observed; });
  return (1.0 + static_cast<double>(hits)) / (static_cast<double>(replicates.size()) + 1.0);
}

double lower_p(double observed, const std::vector<double>& replicates) {
  const auto hits = std::count_if(replicates.begin(), replicates.end(),
                                  [observed](double r) { return r <= observed; });
  return (1.0 + static_cast<double>(hits)) / (static_cast<double>(replicates.size()) + 1.0);
}

double two_sided_p(double observed, const std::vector<double>& replicates) {
  if (replicates.empty()) throw ConfigError("two-sided p-value needs at least one replicate");
  return std::min(1.0, 2.0 * std::min(upper_p(observed, replicates), lower_p(observed, replicates)));
}

double tail_p(double observed, const std::vector<double>& replicates, Tail tail) {
  return tail == Tail::Upper ? upper_p(observed, replicates) : two_sided_p(observed, replicates);
}

std::vector<Index> draw_shifts(const RandomizationPlan& plan, Index length,
                               Index default_min_offset) {
  if (plan.num_shifts < 1) throw ConfigError("randomization needs at least one shift");
  const Index m = plan.sampler.min_offset > 0 ? plan.sampler.min_offset : default_min_offset;
  if (m < 1 || m >= length - m) {
    throw ConfigError("minimum shift offset " + std::to_string(m) +
                      " leaves no admissible offsets for series length " + std::to_string(length));
  }
  const Index range = length - 2 * m + 1;  // offsets m..length-m inclusive
  std::vector<Index> shifts(static_cast<std::size_t>(plan.num_shifts));
  for (int b = 0; b < plan.num_shifts; ++b) {
    if (plan.sampler.kind == ShiftSampler::Kind::UniformOffsets) {
      Rng rng = make_rng(plan.seed, static_cast<std::uint64_t>(b));
      std::uniform_int_distribution<Index> pick(m, length - m);
      shifts[b] = pick(rng);
    } else {
      shifts[b] = m + static_cast<Index>(std::floor((b + 0.5) * static_cast<double>(range) /
                                                    static_cast<double>(plan.num_shifts)));
    }
  }
  return shifts;
}

std::vector<TestResult> randomization_tests(const OperatorEngine& engine,
                                            const std::vector<DispersionStatistic>& statistics,
                                            const RandomizationPlan& plan, unsigned threads) {
  if (statistics.empty()) throw ConfigError("no statistics requested");
  const Index default_m = engine.deformation().max_lag() + engine.spec().source_depth;
  const std::vector<Index> shifts = draw_shifts(plan, engine.panel_length(), default_m);
  const auto& lags = engine.deformation().lags();

  const auto observed_spectra = engine.spectra(0);
  std::vector<TestResult> results(statistics.size());
  for (std::size_t s = 0; s < statistics.size(); ++s) {
    results[s].statistic = statistics[s].name();
    results[s].observed_detail = statistics[s].evaluate(lags, observed_spectra);
    results[s].observed = results[s].observed_detail.statistic;
    results[s].tail = plan.tail;
    results[s].shifts = shifts;
    results[s].replicates.assign(shifts.size(), 0.0);
  }

  parallel_for(shifts.size(), threads, [&](std::size_t b) {
    const auto spectra = engine.spectra(shifts[b]);
    for (std::size_t s = 0; s < statistics.size(); ++s) {
      results[s].replicates[b] = statistics[s].evaluate(lags, spectra).statistic;
    }
  });

  for (auto& r : results) r.p_value = tail_p(r.observed, r.replicates, r.tail);
  return results;
}

TestResult randomization_test(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                              const DeformationSet& deformation, OperatorKind kind,
                              const DispersionStatistic& statistic, const RandomizationPlan& plan,
                              double ridge, unsigned threads) {
  OperatorEngine engine(panel, spec, deformation, kind, ridge);
  return randomization_tests(engine, {statistic}, plan, threads).front();
}

std::vector<std::pair<Index, Index>> detect_episodes(const std::vector<double>& p_values,
                                                     double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("episode alpha must lie in (0, 1)");
  std::vector<std::pair<Index, Index>> episodes;
  Index start = -1;
  const Index n = static_cast<Index>(p_values.size());
  for (Index i = 0; i < n; ++i) {
    const bool hit = p_values[i] < alpha;
    if (hit && start < 0) start = i;
    if (!hit && start >= 0) {
      episodes.emplace_back(start, i - 1);
      start = -1;
    }
  }
  if (start >= 0) episodes.emplace_back(start, n - 1);
  return episodes;
}

}  // namespace orderspec
