#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "orderspec/operators.hpp"
#include "orderspec/spectral.hpp"

namespace orderspec {

enum class Tail { Upper, TwoSided };

struct ShiftSampler {
  enum class Kind {
    /// Offsets drawn uniformly from {m, ..., T - m}.
    UniformOffsets,
    /// B offsets spread evenly over {m, ..., T - m}.
    EvenlySpaced,
  };
  Kind kind = Kind::UniformOffsets;
  /// m; 0 selects max lag + source depth.
  Index min_offset = 0;
};

struct RandomizationPlan {
  int num_shifts = 100;
  ShiftSampler sampler;
  Tail tail = Tail::Upper;
  std::uint64_t seed = 0;
};

struct TestResult {
  std::string statistic;
  double observed = 0.0;
  std::vector<double> replicates;
  double p_value = 1.0;
  Tail tail = Tail::Upper;
  std::vector<Index> shifts;
  /// Per-lag breakdown of the observed statistic.
  DispersionResult observed_detail;
};

/// (1 + #{replicates >= observed}) / (B + 1).
double upper_p(double observed, const std::vector<double>& replicates);
/// (1 + #{replicates <= observed}) / (B + 1).
double lower_p(double observed, const std::vector<double>& replicates);
/// min(1, 2 min(upper, lower)).
double two_sided_p(double observed, const std::vector<double>& replicates);
double tail_p(double observed, const std::vector<double>& replicates, Tail tail);

/// Circular-shift offsets for a series of length `length`. `default_min_offset`
/// is used when the plan leaves min_offset at 0.
std::vector<Index> draw_shifts(const RandomizationPlan& plan, Index length,
                               Index default_min_offset);

/// Runs one randomization pass and evaluates several statistics on the same
/// replicates. Replicate b rotates all source columns jointly by shift k_b.
std::vector<TestResult> randomization_tests(const OperatorEngine& engine,
                                            const std::vector<DispersionStatistic>& statistics,
                                            const RandomizationPlan& plan, unsigned threads = 1);

TestResult randomization_test(const TimeSeriesPanel& panel, const EmbeddingSpec& spec,
                              const DeformationSet& deformation, OperatorKind kind,
                              const DispersionStatistic& statistic, const RandomizationPlan& plan,
                              double ridge = kDefaultRidge, unsigned threads = 1);

/// Maximal runs of consecutive p < alpha as closed index intervals.
std::vector<std::pair<Index, Index>> detect_episodes(const std::vector<double>& p_values,
                                                     double alpha);

}  // namespace orderspec
