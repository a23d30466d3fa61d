#include "orderspec/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "orderspec/errors.hpp"

namespace orderspec {

SpectralSummary SpectralSummary::log_det(double eps) {
  if (!(eps > 0.0)) throw ConfigError("logdet summary needs eps > 0");
  return SpectralSummary(Kind::LogDet, eps);
}

SpectralSummary SpectralSummary::power(double q) {
  if (!(q >= 1.0)) throw ConfigError("power summary needs q >= 1");
  return SpectralSummary(Kind::Power, q);
}

SpectralSummary SpectralSummary::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const bool has_arg = colon != std::string::npos;
  auto arg = [&]() {
    try {
      return std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad summary parameter in '" + text + "'");
    }
  };
  if (head == "trace") return trace();
  if (head == "frobenius") return frobenius();
  if (head == "logdet") return has_arg ? log_det(arg()) : log_det();
  if (head == "power") {
    if (!has_arg) throw ConfigError("power summary needs an exponent, e.g. power:4");
    return power(arg());
  }
  if (head == "lambda1" || head == "largest") return largest_eigenvalue();
  throw ConfigError("unknown spectral summary '" + text + "'");
}

std::string SpectralSummary::name() const {
  switch (kind_) {
    case Kind::Trace:
      return "trace";
    case Kind::Frobenius:
      return "frobenius";
    case Kind::LogDet:
      return "logdet";
    case Kind::Power:
      return "power";
    case Kind::LargestEigenvalue:
      return "lambda1";
  }
  return "?";
}

double SpectralSummary::apply(double lambda) const {
  switch (kind_) {
    case Kind::Trace:
      return lambda;
    case Kind::Frobenius:
      return lambda * lambda;
    case Kind::LogDet:
      return std::log(lambda + param_);
    case Kind::Power:
      return std::pow(lambda, param_);
    case Kind::LargestEigenvalue:
      break;
  }
  throw ConfigError("largest eigenvalue is not a per-eigenvalue function");
}

SpectralMeasure::SpectralMeasure(const Vector& eigenvalues) : atoms_(clip_psd_spectrum(eigenvalues)) {
  std::sort(atoms_.begin(), atoms_.end());
}

double lss(const Vector& eigenvalues, const SpectralSummary& f) {
  if (eigenvalues.size() == 0) throw DimensionError("lss: empty spectrum");
  if (!eigenvalues.allFinite()) throw InputError("lss: non-finite eigenvalues");
  const Vector lambda = clip_psd_spectrum(eigenvalues);
  if (f.kind() == SpectralSummary::Kind::LargestEigenvalue) return lambda.maxCoeff();
  double total = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) total += f.apply(lambda[i]);
  return total / static_cast<double>(lambda.size());
}

double lss(const EigenSystem& es, const SpectralSummary& f) { return lss(es.values, f); }

DispersionResult dispersion_from_values(const std::vector<int>& lags,
                                        const std::vector<double>& values) {
  if (lags.empty() || lags.size() != values.size()) {
    throw DimensionError("dispersion: need one value per lag");
  }
  DispersionResult r;
  r.kind = DispersionResult::Kind::Scalar;
  r.lags = lags;
  r.per_lag_values = values;
  std::size_t hi = 0;
  std::size_t lo = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[hi]) hi = i;
    if (values[i] < values[lo]) lo = i;
  }
  r.sup_lag = lags[hi];
  r.inf_lag = lags[lo];
  r.statistic = values[hi] - values[lo];
  return r;
}

DispersionResult dispersion_scalar(const std::vector<int>& lags, const std::vector<Vector>& spectra,
                                   const SpectralSummary& f) {
  std::vector<double> values;
  values.reserve(spectra.size());
  for (const auto& s : spectra) values.push_back(lss(s, f));
  DispersionResult r = dispersion_from_values(lags, values);
  r.summary = f.name();
  return r;
}

namespace {

std::vector<int> family_lags(const OperatorFamily& family) {
  std::vector<int> lags;
  for (const auto& op : family.per_lag) lags.push_back(op.lag);
  return lags;
}

std::vector<Vector> family_spectra(const OperatorFamily& family) {
  std::vector<Vector> spectra;
  for (const auto& op : family.per_lag) spectra.push_back(op.eigenvalues);
  return spectra;
}

}  // namespace

DispersionResult dispersion_scalar(const OperatorFamily& family, const SpectralSummary& f) {
  return dispersion_scalar(family_lags(family), family_spectra(family), f);
}

double spectral_measure_distance(const SpectralMeasure& a, const SpectralMeasure& b) {
  if (a.size() != b.size()) {
    throw DimensionError("spectral measures have " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " atoms");
  }
  if (a.size() == 0) return 0.0;
  return (a.atoms() - b.atoms()).cwiseAbs().sum() / static_cast<double>(a.size());
}

DispersionResult dispersion_measure(const std::vector<int>& lags,
                                    const std::vector<Vector>& spectra) {
  if (lags.empty() || lags.size() != spectra.size()) {
    throw DimensionError("dispersion_measure: need one spectrum per lag");
  }
  DispersionResult r;
  r.kind = DispersionResult::Kind::Measure;
  r.lags = lags;
  r.summary = "wasserstein";
  for (const auto& s : spectra) r.per_lag_measures.emplace_back(s);
  r.sup_lag = r.inf_lag = lags.front();
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (std::size_t j = i + 1; j < spectra.size(); ++j) {
      const double d = spectral_measure_distance(r.per_lag_measures[i], r.per_lag_measures[j]);
      if (d > r.statistic) {
        r.statistic = d;
        r.sup_lag = lags[i];
        r.inf_lag = lags[j];
      }
    }
  }
  return r;
}

DispersionResult dispersion_measure(const OperatorFamily& family) {
  return dispersion_measure(family_lags(family), family_spectra(family));
}

double effective_rank(const Vector& eigenvalues) {
  const Vector lambda = clip_psd_spectrum(eigenvalues);
  const double tr = lambda.sum();
  const double tr2 = lambda.squaredNorm();
  if (!(tr > 0.0) || !(tr2 > 0.0)) return 0.0;
  return tr * tr / tr2;
}

double effective_rank(const EigenSystem& es) { return effective_rank(es.values); }

DispersionStatistic DispersionStatistic::parse(const std::string& text) {
  if (text == "wasserstein" || text == "w1" || text == "measure") return measure();
  return scalar(SpectralSummary::parse(text));
}

std::string DispersionStatistic::name() const { return measure_ ? "wasserstein" : f_.name(); }

DispersionResult DispersionStatistic::evaluate(const std::vector<int>& lags,
                                               const std::vector<Vector>& spectra) const {
  return measure_ ? dispersion_measure(lags, spectra) : dispersion_scalar(lags, spectra, f_);
}

}  // namespace orderspec
