#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "krylov/krylov_state.hpp"
#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"

namespace krylov {

struct ObservableTrace {
  std::vector<double> times;
  std::vector<double> values;  // <psi(t)|O|psi(t)>
  double thermal_value = 0.0;
  double dia_value = 0.0;
};

// <psi(t)|O|psi(t)> = sum_nm phi_n^* O_nm phi_m.
ObservableTrace observable_trace(const KrylovWavefunction& kw, const KrylovOperatorMatrix& kom,
                                 double thermal_value, double dia_value);
ObservableTrace observable_trace(const KrylovDecomposition& kd, const KrylovWavefunction& kw,
                                 const SparseHermitianOperator& o, double beta,
                                 const EigenSystem& eig, const DiagonalEnsemble& de);

enum class ThermalizationLabel { Strong, Weak, None };

std::string to_string(ThermalizationLabel label);

struct ClassifierConfig {
  int smoothing_window = 5;
  // Residual oscillations are measured on [fraction * t_end, t_end].
  double osc_start_fraction = 0.5;
  double strong_threshold = 0.15;
  double weak_threshold = 0.9;
};

struct ThermalizationVerdict {
  double ratio = 0.0;        // oscillation / amplitude
  double relax_time = 0.0;   // time of the first extremum of the smoothed deviation
  double amplitude = 0.0;    // |O(t) - O_th| at that extremum
  double oscillation = 0.0;  // standard deviation of O(t) over the late window
  ThermalizationLabel label = ThermalizationLabel::None;
};

// Throws NoExtremumFound when the smoothed deviation is monotone.
ThermalizationVerdict classify_thermalization(const ObservableTrace& trace,
                                              const ClassifierConfig& config = {});

// |O_th - O_DE| / range(O); zero when the two agree to round-off (1e-12 relative).
double integrable_departure(const ObservableTrace& trace, double observable_range);

// CSV "t,value,thermal_value".
void write_trace_csv(std::ostream& out, const ObservableTrace& trace);
// {"theta": ..., "phi": ..., "ratio": ..., "relax_time": ..., "label": ...}
void write_verdict_json(std::ostream& out, double theta, double phi,
                        const ThermalizationVerdict& verdict);

}  // namespace krylov
