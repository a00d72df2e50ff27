#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "krylov/krylov_state.hpp"
#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"
#include "krylov/thermo_probe.hpp"

namespace krylov {

enum class Quantity { Energy, Beta, VarA, VarB, Cbar, Ipr, Ratio, DimKrylov, OpVarBhat };

std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& name);
// Output columns contributed by a quantity.
std::vector<std::string> quantity_columns(Quantity q);

struct SweepConfig {
  SpinChainSpec spec{10, TiltedIsing{}};
  int n_theta = 21;
  int n_phi = 21;
  double phi_max = 3.141592653589793;
  std::vector<Quantity> quantities{Quantity::Energy, Quantity::Beta};
  double t_end = 50.0;
  double dt = 0.05;
  // Observable used by the oscillation-ratio classifier.
  Axis observable = Axis::Z;
  double b_threshold = 1e-8;
  ClassifierConfig classifier;
  int workers = 1;
  std::string out_dir = "out";

  // Throws ConfigError. Also sorts and deduplicates quantities.
  void validate();
  bool wants(Quantity q) const;
  double theta_at(int i) const;
  double phi_at(int j) const;
};

// JSON round trip; unknown keys are rejected.
std::string to_json(const SweepConfig& config, bool include_runtime = true);
SweepConfig sweep_config_from_json(const std::string& text);
SweepConfig load_sweep_config(const std::filesystem::path& file);

struct SweepRow {
  double theta = 0.0;
  double phi = 0.0;
  double energy = 0.0;
  double energy_density = 0.0;
  double beta = 0.0;
  double normalized_energy = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  long dim_krylov = -1;
  double cbar = 0.0;
  double lambda_ipr = 0.0;
  double log_lambda = 0.0;
  double osc_ratio = 0.0;
  std::string label = "n/a";
  double op_var_bhat = 0.0;
  // "ok", or "failed:" followed by the failed quantities joined with '+'.
  std::string status = "ok";
};

// Read-only artifacts shared by every grid point.
struct SweepContext {
  SweepConfig config;
  SparseHermitianOperator hamiltonian;
  EigenSystem eig;
  SparseHermitianOperator observable;
  RVector observable_diagonal;
  std::vector<double> times;

  explicit SweepContext(SweepConfig cfg);
};

// Every requested quantity at one (theta, phi). Failures set the affected
// fields to NaN (label "n/a") and are listed in status.
SweepRow compute_point(const SweepContext& ctx, double theta, double phi);

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;  // theta outer, phi inner
};

SweepResult run_sweep(const SweepConfig& config);
SweepResult run_sweep(const SweepContext& ctx);

// Wide CSV with theta, phi, the requested columns and status.
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_quantity_csv(std::ostream& out, const SweepResult& result, Quantity q);
// sweep.csv, one <quantity>.csv each, manifest.json.
std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result,
                                                       const std::filesystem::path& dir);

// Column of a row by output column name; label and status are not numeric.
double row_value(const SweepRow& row, const std::string& column);

// Spearman rank correlation with average ranks for ties; pairs with a NaN are skipped.
double spearman(std::span<const double> x, std::span<const double> y);

// Indices i with v[i-1] > v[i] < v[i+1].
std::vector<std::size_t> interior_local_minima(std::span<const double> values);

}  // namespace krylov
