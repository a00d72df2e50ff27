#include "krylov/thermo_probe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "krylov/csv.hpp"
#include "krylov/errors.hpp"

namespace krylov {

ObservableTrace observable_trace(const KrylovWavefunction& kw, const KrylovOperatorMatrix& kom,
                                 double thermal_value, double dia_value) {
  if (kom.entries.rows() != kw.amplitudes.rows()) {
    throw ConfigError("Krylov matrix and wavefunction dimensions differ");
  }
  ObservableTrace trace;
  trace.times = kw.times;
  trace.thermal_value = thermal_value;
  trace.dia_value = dia_value;
  const CMatrix o_phi = kom.entries * kw.amplitudes;
  trace.values.resize(kw.times.size());
  for (Index k = 0; k < kw.amplitudes.cols(); ++k) {
    trace.values[static_cast<std::size_t>(k)] = kw.amplitudes.col(k).dot(o_phi.col(k)).real();
  }
  return trace;
}

ObservableTrace observable_trace(const KrylovDecomposition& kd, const KrylovWavefunction& kw,
                                 const SparseHermitianOperator& o, double beta,
                                 const EigenSystem& eig, const DiagonalEnsemble& de) {
  const RVector diag = eigenbasis_diagonal(eig, o);
  return observable_trace(kw, krylov_matrix_elements(kd, o), thermal_expectation(eig, beta, diag),
                          diagonal_ensemble_expectation(eig, de, o, diag));
}

std::string to_string(ThermalizationLabel label) {
  switch (label) {
    case ThermalizationLabel::Strong:
      return "strong";
    case ThermalizationLabel::Weak:
      return "weak";
    case ThermalizationLabel::None:
      return "none";
  }
  return "none";
}

ThermalizationVerdict classify_thermalization(const ObservableTrace& trace,
                                              const ClassifierConfig& config) {
  const std::size_t n = trace.values.size();
  if (trace.times.size() != n || n < 3) throw ConfigError("trace needs at least three samples");
  if (config.smoothing_window < 1 || config.smoothing_window % 2 == 0) {
    throw ConfigError("smoothing window must be a positive odd number");
  }
  if (!(config.osc_start_fraction >= 0.0 && config.osc_start_fraction < 1.0)) {
    throw ConfigError("osc_start_fraction must lie in [0, 1)");
  }

  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = trace.values[i] - trace.thermal_value;

  // Centered moving average on interior points only; the ends keep raw values
  // so no artificial extremum appears near t = 0.
  const std::size_t half = static_cast<std::size_t>(config.smoothing_window / 2);
  std::vector<double> smooth = dev;
  for (std::size_t i = half; i + half < n; ++i) {
    double s = 0.0;
    for (std::size_t k = i - half; k <= i + half; ++k) s += dev[k];
    smooth[i] = s / static_cast<double>(config.smoothing_window);
  }

  std::size_t ext = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double left = smooth[i] - smooth[i - 1];
    const double right = smooth[i + 1] - smooth[i];
    if (left != 0.0 && left * right <= 0.0) {
      ext = i;
      break;
    }
  }
  if (ext == 0) throw NoExtremumFound("deviation from the thermal value has no extremum");

  const double t_end = trace.times.back();
  const double t_osc = trace.times.front() + config.osc_start_fraction * (t_end - trace.times.front());
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.times[i] < t_osc) continue;
    sum += dev[i];
    ++count;
  }
  const double mean = sum / static_cast<double>(count);
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.times[i] < t_osc) continue;
    sum_sq += (dev[i] - mean) * (dev[i] - mean);
  }

  ThermalizationVerdict v;
  v.relax_time = trace.times[ext];
  v.amplitude = std::abs(dev[ext]);
  v.oscillation = std::sqrt(sum_sq / static_cast<double>(count));
  v.ratio = v.oscillation / v.amplitude;
  if (v.ratio < config.strong_threshold) {
    v.label = ThermalizationLabel::Strong;
  } else if (v.ratio < config.weak_threshold) {
    v.label = ThermalizationLabel::Weak;
  } else {
    v.label = ThermalizationLabel::None;
  }
  return v;
}

double integrable_departure(const ObservableTrace& trace, double observable_range) {
  const double diff = std::abs(trace.thermal_value - trace.dia_value);
  // Both sides are sums over the spectrum; agreement to round-off counts as exact.
  const double scale = std::max({1.0, std::abs(trace.thermal_value), std::abs(trace.dia_value)});
  if (diff <= 1e-12 * scale) return 0.0;
  if (!(observable_range > 0.0)) throw ConfigError("observable range must be positive");
  return diff / observable_range;
}

void write_trace_csv(std::ostream& out, const ObservableTrace& trace) {
  out << "t,value,thermal_value\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_double(trace.times[i]) << ',' << format_double(trace.values[i]) << ','
        << format_double(trace.thermal_value) << '\n';
  }
}

void write_verdict_json(std::ostream& out, double theta, double phi,
                        const ThermalizationVerdict& verdict) {
  const nlohmann::json j = {{"theta", theta},
                            {"phi", phi},
                            {"ratio", verdict.ratio},
                            {"relax_time", verdict.relax_time},
                            {"label", to_string(verdict.label)}};
  out << j.dump(2) << '\n';
}

}  // namespace krylov
