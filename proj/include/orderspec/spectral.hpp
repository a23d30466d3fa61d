#pragma once

#include <string>
#include <vector>

#include "orderspec/linalg.hpp"
#include "orderspec/operators.hpp"

namespace orderspec {

inline constexpr double kDefaultLogDetEps = 1e-8;

/// Scalar function f applied to an operator spectrum. Every kind except
/// LargestEigenvalue is a linear spectral statistic: the mean of f(lambda).
class SpectralSummary {
 public:
  enum class Kind { Trace, Frobenius, LogDet, Power, LargestEigenvalue };

  static SpectralSummary trace() { return SpectralSummary(Kind::Trace, 0.0); }
  static SpectralSummary frobenius() { return SpectralSummary(Kind::Frobenius, 0.0); }
  static SpectralSummary log_det(double eps = kDefaultLogDetEps);
  static SpectralSummary power(double q);
  static SpectralSummary largest_eigenvalue() {
    return SpectralSummary(Kind::LargestEigenvalue, 0.0);
  }
  /// Parses "trace", "frobenius", "logdet[:eps]", "power:q", "lambda1".
  static SpectralSummary parse(const std::string& text);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double parameter() const { return param_; }
  [[nodiscard]] std::string name() const;

  /// f(lambda) for a single eigenvalue (not defined for LargestEigenvalue).
  [[nodiscard]] double apply(double lambda) const;

  bool operator==(const SpectralSummary&) const = default;

 private:
  SpectralSummary(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

/// Empirical spectral distribution: d eigenvalue atoms, sorted ascending,
/// negatives above round-off clipped to zero.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  explicit SpectralMeasure(const Vector& eigenvalues);

  [[nodiscard]] const Vector& atoms() const { return atoms_; }
  [[nodiscard]] Index size() const { return atoms_.size(); }

 private:
  Vector atoms_;
};

struct DispersionResult {
  enum class Kind { Scalar, Measure };

  Kind kind = Kind::Scalar;
  std::vector<int> lags;
  /// Scalar kind: L_f per lag, aligned with `lags`.
  std::vector<double> per_lag_values;
  /// Measure kind: spectral measure per lag, aligned with `lags`.
  std::vector<SpectralMeasure> per_lag_measures;
  double statistic = 0.0;
  /// Scalar kind: lags attaining the sup and inf. Measure kind: the pair
  /// attaining the largest distance.
  int sup_lag = 0;
  int inf_lag = 0;
  std::string summary;
};

/// Mean of f over the eigenvalues; LargestEigenvalue returns lambda_1.
double lss(const Vector& eigenvalues, const SpectralSummary& f);
double lss(const EigenSystem& es, const SpectralSummary& f);

/// sup_lag L_f - inf_lag L_f over precomputed per-lag values.
DispersionResult dispersion_from_values(const std::vector<int>& lags,
                                        const std::vector<double>& values);

/// Scalar dispersion from per-lag spectra.
DispersionResult dispersion_scalar(const std::vector<int>& lags, const std::vector<Vector>& spectra,
                                   const SpectralSummary& f);
DispersionResult dispersion_scalar(const OperatorFamily& family, const SpectralSummary& f);

/// 1-Wasserstein distance between equal-size empirical measures:
/// mean absolute difference of sorted atoms.
double spectral_measure_distance(const SpectralMeasure& a, const SpectralMeasure& b);

/// Largest pairwise spectral-measure distance across lags.
DispersionResult dispersion_measure(const std::vector<int>& lags,
                                    const std::vector<Vector>& spectra);
DispersionResult dispersion_measure(const OperatorFamily& family);

/// (sum lambda)^2 / sum lambda^2, or 0 when the trace vanishes.
double effective_rank(const Vector& eigenvalues);
double effective_rank(const EigenSystem& es);

/// Statistic evaluated on an operator family: either a spectral summary
/// dispersion or the spectral-measure dispersion.
class DispersionStatistic {
 public:
  static DispersionStatistic scalar(SpectralSummary f) { return DispersionStatistic(f, false); }
  static DispersionStatistic measure() {
    return DispersionStatistic(SpectralSummary::trace(), true);
  }
  /// "wasserstein" or any SpectralSummary spelling.
  static DispersionStatistic parse(const std::string& text);

  [[nodiscard]] bool is_measure() const { return measure_; }
  [[nodiscard]] const SpectralSummary& summary() const { return f_; }
  [[nodiscard]] std::string name() const;
  [[nodiscard]] DispersionResult evaluate(const std::vector<int>& lags,
                                          const std::vector<Vector>& spectra) const;

 private:
  DispersionStatistic(SpectralSummary f, bool measure) : f_(f), measure_(measure) {}
  SpectralSummary f_;
  bool measure_;
};

}  // namespace orderspec
