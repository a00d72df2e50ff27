// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "krylov/krylov_state.hpp"
#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"
#include "krylov/sweep.hpp"
#include "krylov/thermo_probe.hpp"

using namespace krylov;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& text) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += text + (ok ? "" : " [miss]");
}

SpinChainSpec chaotic(int n) { return {n, TiltedIsing{}}; }

std::vector<double> uniform_times(double t_end, double dt) {
  std::vector<double> t;
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  for (long k = 0; k <= steps; ++k) t.push_back(static_cast<double>(k) * dt);
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Product-state energy against the closed forms.
Outcome analytic_energy_oracle() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> theta(0.0, kPi);
  std::uniform_real_distribution<double> phi(0.0, 2 * kPi);
  for (const int n : {4, 7, 10, 12}) {
    double worst_ising = 0.0;
    double worst_xy = 0.0;
    const SpinChainSpec ising = chaotic(n);
    const SpinChainSpec xy{n, XYModel{0.8}};
    const auto hi = build_hamiltonian(ising);
    const auto hx = build_hamiltonian(xy);
    for (int k = 0; k < 100; ++k) {
      const double t = theta(rng);
      const double p = phi(rng);
      const CVector psi = build_product_state(t, p, n).vector;
      worst_ising = std::max(worst_ising, std::abs(hi.expectation(psi) - analytic_energy(ising, t, p)));
      worst_xy = std::max(worst_xy, std::abs(hx.expectation(psi) - analytic_energy(xy, t, p)));
    }
    note(o, worst_ising < 1e-10 && worst_xy < 1e-10,
         fmt("N=%d max err ising %.1e xy %.1e", n, worst_ising, worst_xy));
  }
  return o;
}

// 2. Effective inverse temperatures at N = 7.
Outcome effective_beta_values() {
  Outcome o;
  const int n = 7;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  auto beta_of = [&](NamedState s) {
    return effective_beta(eig, h.expectation(build_product_state(s, n).vector));
  };
  const double z = beta_of(NamedState::ZPlus);
  const double x = beta_of(NamedState::XPlus);
  const double y = beta_of(NamedState::YPlus);
  note(o, std::abs(z - 0.7275) <= 0.02 * 0.7275, fmt("Z+ %.4f (0.7275 +-2%%)", z));
  note(o, std::abs(x + 0.7180) <= 0.02 * 0.7180, fmt("X+ %.4f (-0.7180 +-2%%)", x));
  note(o, std::abs(y) < 1e-9, fmt("Y+ %.1e (0 within 1e-9)", y));
  return o;
}

// 3. Krylov dimensions at N = 10.
Outcome krylov_dimensions() {
  Outcome o;
  const int n = 10;
  {
    const auto h = build_hamiltonian(chaotic(n));
    const EigenSystem eig = diagonalize(h);
    const auto d = lanczos(h, build_product_state(0.9, 2.3, n).vector, {}, &eig).dimension();
    note(o, d == 528, fmt("chaotic generic D=%ld (528)", static_cast<long>(d)));
  }
  const auto h = build_hamiltonian({n, TiltedIsing{1.0, -1.05, 0.0}});
  const EigenSystem eig = diagonalize(h);
  for (const auto& [state, expected] :
       {std::pair{NamedState::YPlus, 463L}, {NamedState::ZPlus, 463L}, {NamedState::XPlus, 253L}}) {
    const auto d = lanczos(h, build_product_state(state, n).vector, {}, &eig).dimension();
    note(o, d == expected,
         fmt("h=0 %s D=%ld (%ld)", to_string(state).c_str(), static_cast<long>(d), expected));
  }
  return o;
}

// 4. Krylov evolution against exact evolution.
Outcome evolution_oracle() {
  Outcome o;
  const int n = 8;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const auto times = uniform_times(50.0, 0.05);
  double worst = 0.0;
  double worst_norm = 0.0;
  for (const auto& [t, p] : {std::pair{kPi / 2, kPi / 2}, {0.0, 0.0}, {kPi / 2, 0.0}, {1.2, 2.5}}) {
    const CVector psi = build_product_state(t, p, n).vector;
    const auto kd = lanczos(h, psi, {}, &eig);
    const auto kw = evolve_krylov(kd, times);
    const auto exact = evolve_exact(eig, psi, times);
    const CMatrix states = kd.basis * kw.amplitudes;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto col = static_cast<Index>(k);
      worst = std::max(worst, (states.col(col) - exact[k]).norm());
      worst_norm = std::max(worst_norm, std::abs(kw.amplitudes.col(col).norm() - 1.0));
    }
  }
  note(o, worst < 1e-6, fmt("max |psi_K - psi_exact| %.1e (<1e-6)", worst));
  note(o, worst_norm < 1e-8, fmt("max norm drift %.1e (<1e-8)", worst_norm));
  return o;
}

// 5. Banded structure of observables in the Krylov basis.
Outcome kth_structure() {
  Outcome o;
  const int n = 10;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const std::vector<std::pair<std::string, SparseHermitianOperator>> observables{
      {"S_x", build_magnetization(Axis::X, n)}, {"S_z", build_magnetization(Axis::Z, n)}};
  for (const NamedState s : {NamedState::YPlus, NamedState::ZPlus}) {
    const auto kd = lanczos(h, build_product_state(s, n).vector, {}, &eig);
    const KthReport rh = kth_scan(krylov_matrix_elements(kd, h), kd, operator_norm(h));
    note(o, rh.fit_residual < 1e-8, fmt("%s H residual %.1e", to_string(s).c_str(), rh.fit_residual));
    for (const auto& [name, op] : observables) {
      const KthReport r = kth_scan(krylov_matrix_elements(kd, op), kd, operator_norm(op));
      note(o, r.far_band_max <= r.far_band_bound,
           fmt("%s %s far max %.3f <= %.3f", to_string(s).c_str(), name.c_str(), r.far_band_max,
               r.far_band_bound));
      note(o, r.band_dominance >= 10.0,
           fmt("%s %s band ratio %.2f >= 10", to_string(s).c_str(), name.c_str(), r.band_dominance));
    }
  }
  return o;
}

// 6. Spectral and quadrature time averages of the complexity.
Outcome complexity_identity() {
  Outcome o;
  const int n = 8;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  for (const NamedState s : {NamedState::XPlus, NamedState::YPlus, NamedState::ZPlus}) {
    const CVector psi = build_product_state(s, n).vector;
    const auto kd = lanczos(h, psi, {}, &eig);
    const double spectral = complexity_time_average(kd, eig, diagonal_ensemble(eig, psi));
    const double quad = complexity_quadrature_average(kd, 5000.0, 0.05);
    const double rel = std::abs(spectral - quad) / spectral;
    note(o, rel < 0.01, fmt("%s rel diff %.1e", to_string(s).c_str(), rel));
  }
  const auto z = build_magnetization(Axis::Z, 1);
  const EigenSystem toy = diagonalize(z);
  const CVector plus = build_product_state(NamedState::XPlus, 1).vector;
  const double c = complexity_time_average(lanczos(z, plus, {}, &toy), toy, diagonal_ensemble(toy, plus));
  note(o, std::abs(c - 0.5) < 1e-14, fmt("two-level %.16g", c));
  return o;
}

// 7. Oscillation ratio classifier for S_z at N = 10.
Outcome classifier_ratios() {
  Outcome o;
  const int n = 10;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const auto sz = build_magnetization(Axis::Z, n);
  const auto times = uniform_times(50.0, 0.05);
  struct Band {
    NamedState state;
    double lo, hi;
    ThermalizationLabel label;
  };
  for (const Band& b : {Band{NamedState::YPlus, 0.003, 0.05, ThermalizationLabel::Strong},
                        Band{NamedState::ZPlus, 0.3, 0.7, ThermalizationLabel::Weak},
                        Band{NamedState::XPlus, 0.5, 0.95, ThermalizationLabel::Weak}}) {
    const CVector psi = build_product_state(b.state, n).vector;
    const auto kd = lanczos(h, psi, {}, &eig);
    const double beta = effective_beta(eig, h.expectation(psi));
    const auto trace =
        observable_trace(kd, evolve_krylov(kd, times), sz, beta, eig, diagonal_ensemble(eig, psi));
    const ThermalizationVerdict v = classify_thermalization(trace);
    note(o, v.ratio >= b.lo && v.ratio <= b.hi && v.label == b.label,
         fmt("%s ratio %.3f in [%g, %g] %s", to_string(b.state).c_str(), v.ratio, b.lo, b.hi,
             to_string(v.label).c_str()));
  }
  return o;
}

// 8. IPR from the spectrum and from the return probability.
Outcome ipr_consistency() {
  Outcome o;
  {
    const int n = 8;
    const auto h = build_hamiltonian(chaotic(n));
    const EigenSystem eig = diagonalize(h);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> theta(0.0, kPi);
    std::uniform_real_distribution<double> phi(0.0, 2 * kPi);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const CVector psi = build_product_state(theta(rng), phi(rng), n).vector;
      const double spectral = inverse_participation_ratio(diagonal_ensemble(eig, psi));
      const double sampled = ipr_from_phi0(lanczos(h, psi, {}, &eig), 1e4, 0.05);
      worst = std::max(worst, std::abs(sampled - spectral) / spectral);
    }
    note(o, worst < 0.05, fmt("10 random N=8 states max rel diff %.3f (<5%%)", worst));
    const CVector eigenstate = eig.vectors.col(100);
    const double l_spec = inverse_participation_ratio(diagonal_ensemble(eig, eigenstate));
    const double l_time = ipr_from_phi0(lanczos(h, eigenstate, {}, &eig), 1e3, 0.05);
    note(o, std::abs(l_spec - 1.0) < 1e-12 && std::abs(l_time - 1.0) < 1e-12,
         fmt("eigenstate %.15g / %.15g", l_spec, l_time));
  }
  const int n = 10;
  const EigenSystem eig = diagonalize(build_hamiltonian(chaotic(n)));
  const double l = inverse_participation_ratio(
      diagonal_ensemble(eig, build_product_state(kPi / 6, kPi, n).vector));
  note(o, l < 1.5, fmt("N=10 (pi/6, pi) lambda %.3f (<1.5)", l));
  return o;
}

// 9. Ordering of complexity and Lanczos variances at N = 9.
Outcome ordering_property() {
  Outcome o;
  const int n = 9;
  const auto h = build_hamiltonian(chaotic(n));
  const EigenSystem eig = diagonalize(h);
  struct Stats {
    double cbar;
    LanczosVariance var;
  };
  auto stats = [&](NamedState s) {
    const CVector psi = build_product_state(s, n).vector;
    const auto kd = lanczos(h, psi, {}, &eig);
    return Stats{complexity_time_average(kd, eig, diagonal_ensemble(eig, psi)), lanczos_variance(kd)};
  };
  const Stats y = stats(NamedState::YPlus);
  const Stats z = stats(NamedState::ZPlus);
  const Stats x = stats(NamedState::XPlus);
  note(o, y.cbar > z.cbar && y.cbar > x.cbar,
       fmt("cbar Y+ %.2f Z+ %.2f X+ %.2f", y.cbar, z.cbar, x.cbar));
  note(o, y.var.var_a < z.var.var_a, fmt("var_a Y+ %.3f < Z+ %.3f", y.var.var_a, z.var.var_a));
  note(o, y.var.var_b > z.var.var_b, fmt("var_b Y+ %.3f > Z+ %.3f", y.var.var_b, z.var.var_b));
  return o;
}

// 10. Second IPR minimum on the phi = pi line.
Outcome ipr_slice_minimum() {
  Outcome o;
  const int points = 61;
  std::vector<double> thetas;
  for (int i = 0; i < points; ++i) thetas.push_back(i == points - 1 ? kPi : kPi * i / (points - 1));
  for (const auto& [n, expect_minimum] : {std::pair{10, true}, {11, false}}) {
    const EigenSystem eig = diagonalize(build_hamiltonian(chaotic(n)));
    std::vector<double> log_lambda;
    for (const double t : thetas) {
      log_lambda.push_back(std::log(
          inverse_participation_ratio(diagonal_ensemble(eig, build_product_state(t, kPi, n).vector))));
    }
    std::string found;
    bool any = false;
    for (const std::size_t k : interior_local_minima(log_lambda)) {
      if (thetas[k] >= 2 * kPi / 3 && thetas[k] < kPi) {
        any = true;
        found += fmt(" %.3f", thetas[k]);
      }
    }
    note(o, any == expect_minimum,
         fmt("N=%d minimum in [2pi/3, pi): %s%s", n, any ? "yes at" : "none", found.c_str()));
  }
  return o;
}

// 11. Byte-identical sweep output across worker counts.
Outcome determinism() {
  Outcome o;
  SweepConfig cfg;
  cfg.spec = chaotic(6);
  cfg.n_theta = 5;
  cfg.n_phi = 5;
  cfg.quantities = {Quantity::Energy, Quantity::Beta, Quantity::VarA,      Quantity::VarB,
                    Quantity::Cbar,   Quantity::Ipr,  Quantity::Ratio,     Quantity::DimKrylov,
                    Quantity::OpVarBhat};
  const auto root = std::filesystem::temp_directory_path() / "krylov_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<std::vector<std::filesystem::path>> runs;
  for (const int workers : {1, 4}) {
    cfg.workers = workers;
    runs.push_back(write_sweep_outputs(run_sweep(cfg), root / ("w" + std::to_string(workers))));
  }
  bool same = runs[0].size() == runs[1].size();
  for (std::size_t k = 0; same && k < runs[0].size(); ++k) {
    same = runs[0][k].filename() == runs[1][k].filename() && slurp(runs[0][k]) == slurp(runs[1][k]);
  }
  note(o, same, fmt("%zu files compared for workers 1 and 4", runs[0].size()));
  std::filesystem::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 analytic energy", analytic_energy_oracle},
      {"2 effective beta", effective_beta_values},
      {"3 Krylov dimensions", krylov_dimensions},
      {"4 evolution oracle", evolution_oracle},
      {"5 KTH structure", kth_structure},
      {"6 complexity identity", complexity_identity},
      {"7 thermalization classifier", classifier_ratios},
      {"8 IPR consistency", ipr_consistency},
      {"9 ordering property", ordering_property},
      {"10 finite-size IPR minimum", ipr_slice_minimum},
      {"11 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s %s (%.1fs): %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
