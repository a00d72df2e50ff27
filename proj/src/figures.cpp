#include "krylov/figures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "krylov/csv.hpp"
#include "krylov/errors.hpp"
#include "krylov/krylov_operator.hpp"
#include "krylov/thermo_probe.hpp"

namespace krylov {

namespace {

using nlohmann::json;

struct StatePoint {
  std::string tag;
  double theta;
  double phi;
};

class Writer {
 public:
  explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  std::ofstream open(const std::string& name) {
    written_.push_back(dir_ / name);
    std::ofstream out(written_.back(), std::ios::binary);
    if (!out) throw ConfigError("cannot write " + written_.back().string());
    return out;
  }
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

std::vector<int> sizes_of(const FigureOptions& o) {
  return o.sizes.empty() ? std::vector<int>{o.base.spec.n_sites} : o.sizes;
}

SpinChainSpec spec_for(const FigureOptions& o, int n) {
  SpinChainSpec spec = o.base.spec;
  spec.n_sites = n;
  spec.validate();
  return spec;
}

std::vector<StatePoint> states_of(const FigureOptions& o) {
  if (o.theta.has_value() != o.phi.has_value()) throw ConfigError("give both theta and phi");
  if (o.theta) {
    for (const NamedState s : {NamedState::XPlus, NamedState::YPlus, NamedState::ZPlus, NamedState::ZMinus}) {
      const auto [t, p] = bloch_angles(s);
      if (t == *o.theta && p == *o.phi) return {{to_string(s), t, p}};
    }
    char tag[64];
    std::snprintf(tag, sizeof tag, "theta%.6g_phi%.6g", *o.theta, *o.phi);
    return {{tag, *o.theta, *o.phi}};
  }
  std::vector<StatePoint> out;
  for (const NamedState s : {NamedState::XPlus, NamedState::YPlus, NamedState::ZPlus}) {
    const auto [t, p] = bloch_angles(s);
    out.push_back({to_string(s), t, p});
  }
  return out;
}

std::string suffix(int n) { return "_N" + std::to_string(n); }

double spectral_range(const SparseHermitianOperator& o) {
  const RVector ev =
      Eigen::SelfAdjointEigenSolver<CMatrix>(o.to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1) - ev(0);
}

json state_json(const StatePoint& s) { return {{"state", s.tag}, {"theta", s.theta}, {"phi", s.phi}}; }

// Runs a sweep per size and stores the wide table.
void sweep_figure(const std::string& name, std::vector<Quantity> quantities,
                  const FigureOptions& o, Writer& w, json& manifest,
                  const std::function<void(const SweepResult&, json&)>& extra = {}) {
  for (const int n : sizes_of(o)) {
    SweepConfig cfg = o.base;
    cfg.spec.n_sites = n;
    cfg.quantities = quantities;
    const SweepResult result = run_sweep(cfg);
    const std::string file = name + suffix(n) + ".csv";
    auto out = w.open(file);
    write_sweep_csv(out, result);
    json entry = {{"name", file}, {"n", n}, {"axes", {{"x", "phi"}, {"y", "theta"}}}};
    if (extra) extra(result, entry);
    manifest["files"].push_back(entry);
  }
  manifest["config"] = json::parse(to_json(o.base, false));
}

void energy_density_figure(const FigureOptions& o, Writer& w, json& manifest) {
  for (const int n : sizes_of(o)) {
    if (n < 2) throw ConfigError("need at least two sites");
    SpinChainSpec spec = o.base.spec;
    spec.n_sites = n;
    const std::string file = "energy_density" + suffix(n) + ".csv";
    auto out = w.open(file);
    out << "theta,phi,energy_density\n";
    for (int i = 0; i < o.base.n_theta; ++i) {
      for (int j = 0; j < o.base.n_phi; ++j) {
        const double theta = o.base.theta_at(i);
        const double phi = o.base.phi_at(j);
        out << format_double(theta) << ',' << format_double(phi) << ','
            << format_double(energy_density(spec, theta, phi)) << '\n';
      }
    }
    manifest["files"].push_back({{"name", file}, {"n", n}, {"source", "analytic product-state energy"}});
  }
}

void lanczos_figure(const FigureOptions& o, Writer& w, json& manifest) {
  for (const int n : sizes_of(o)) {
    const SpinChainSpec spec = spec_for(o, n);
    const auto h = build_hamiltonian(spec);
    const EigenSystem eig = diagonalize(h);
    LanczosOptions options;
    options.relative_b_threshold = o.base.b_threshold;
    for (const auto& s : states_of(o)) {
      const auto kd = lanczos(h, build_product_state(s.theta, s.phi, n).vector, options, &eig);
      const std::string file = "lanczos_" + s.tag + suffix(n) + ".csv";
      auto out = w.open(file);
      write_lanczos_csv(out, kd);
      json entry = state_json(s);
      entry["name"] = file;
      entry["n"] = n;
      entry["dim_krylov"] = kd.dimension();
      if (kd.dimension() >= 2) {
        const auto v = lanczos_variance(kd);
        entry["var_a"] = v.var_a;
        entry["var_b"] = v.var_b;
      }
      manifest["files"].push_back(entry);
    }
  }
}

void kth_figure(const FigureOptions& o, Writer& w, json& manifest) {
  for (const int n : sizes_of(o)) {
    const SpinChainSpec spec = spec_for(o, n);
    const auto h = build_hamiltonian(spec);
    const EigenSystem eig = diagonalize(h);
    const std::vector<std::pair<std::string, SparseHermitianOperator>> observables{
        {"sx", build_magnetization(Axis::X, n)}, {"sz", build_magnetization(Axis::Z, n)}, {"h", h}};
    std::vector<StatePoint> states = states_of(o);
    if (!o.theta) states.erase(states.begin());  // Y+ and Z+ by default
    for (const auto& s : states) {
      const auto kd = lanczos(h, build_product_state(s.theta, s.phi, n).vector, {}, &eig);
      for (const auto& [label, op] : observables) {
        const auto kom = krylov_matrix_elements(kd, op, label);
        const KthReport r = kth_scan(kom, kd, operator_norm(op));
        const std::string file = "kth_" + s.tag + "_" + label + suffix(n) + ".csv";
        auto out = w.open(file);
        write_operator_matrix_csv(out, kom);
        json entry = state_json(s);
        entry.update({{"name", file},
                      {"n", n},
                      {"observable", label},
                      {"dim_krylov", kd.dimension()},
                      {"band_dominance", r.band_dominance},
                      {"far_band_max", r.far_band_max},
                      {"far_band_bound", r.far_band_bound},
                      {"f_a0", r.f_a0},
                      {"f_prime_a0", r.f_prime_a0},
                      {"fit_residual", r.fit_residual},
                      {"consistent", r.consistent}});
        manifest["files"].push_back(entry);
      }
    }
  }
}

void traces_figure(const FigureOptions& o, Writer& w, json& manifest) {
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::llround(o.base.t_end / o.base.dt));
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(static_cast<double>(k) * o.base.dt);
  for (const int n : sizes_of(o)) {
    const SpinChainSpec spec = spec_for(o, n);
    const auto h = build_hamiltonian(spec);
    const EigenSystem eig = diagonalize(h);
    for (const auto& s : states_of(o)) {
      const CVector psi = build_product_state(s.theta, s.phi, n).vector;
      const auto kd = lanczos(h, psi, {}, &eig);
      const auto de = diagonal_ensemble(eig, psi);
      const auto kw = evolve_krylov(kd, times);
      const double beta = effective_beta(eig, h.expectation(psi));
      for (const Axis axis : {Axis::X, Axis::Z}) {
        const std::string label = axis == Axis::X ? "sx" : "sz";
        const auto op = build_magnetization(axis, n);
        const ObservableTrace trace = observable_trace(kd, kw, op, beta, eig, de);
        const std::string file = "trace_" + s.tag + "_" + label + suffix(n) + ".csv";
        auto out = w.open(file);
        write_trace_csv(out, trace);
        json entry = state_json(s);
        entry.update({{"name", file},
                      {"n", n},
                      {"observable", label},
                      {"beta", beta},
                      {"thermal_value", trace.thermal_value},
                      {"dia_value", trace.dia_value},
                      {"integrable_departure", integrable_departure(trace, spectral_range(op))}});
        try {
          const ThermalizationVerdict v = classify_thermalization(trace, o.base.classifier);
          const std::string vfile = "verdict_" + s.tag + "_" + label + suffix(n) + ".json";
          auto vout = w.open(vfile);
          write_verdict_json(vout, s.theta, s.phi, v);
          entry["verdict"] = vfile;
          entry["ratio"] = v.ratio;
          entry["label"] = to_string(v.label);
        } catch (const NoExtremumFound&) {
          entry["label"] = "n/a";
        }
        manifest["files"].push_back(entry);
      }
    }
  }
}

void ipr_slice_figure(const FigureOptions& o, Writer& w, json& manifest) {
  const double phi = o.phi.value_or(std::numbers::pi);
  if (o.slice_points < 3) throw ConfigError("ipr-slice needs at least three points");
  std::vector<double> thetas;
  for (int i = 0; i < o.slice_points; ++i) {
    thetas.push_back(i == o.slice_points - 1 ? std::numbers::pi
                                             : std::numbers::pi * i / (o.slice_points - 1));
  }
  std::vector<std::vector<double>> columns;
  json minima = json::object();
  for (const int n : sizes_of(o)) {
    const SpinChainSpec spec = spec_for(o, n);
    const EigenSystem eig = diagonalize(build_hamiltonian(spec));
    std::vector<double> values;
    for (const double theta : thetas) {
      const auto de = diagonal_ensemble(eig, build_product_state(theta, phi, n).vector);
      values.push_back(std::log(inverse_participation_ratio(de)));
    }
    json at = json::array();
    for (const std::size_t k : interior_local_minima(values)) at.push_back(thetas[k]);
    minima[std::to_string(n)] = at;
    columns.push_back(std::move(values));
  }
  const std::string file = "ipr_slice.csv";
  auto out = w.open(file);
  out << "theta";
  for (const int n : sizes_of(o)) out << ",log_lambda_N" << n;
  out << '\n';
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    out << format_double(thetas[k]);
    for (const auto& c : columns) out << ',' << format_double(c[k]);
    out << '\n';
  }
  manifest["files"].push_back({{"name", file}, {"phi", phi}, {"axes", {{"x", "theta"}}}});
  manifest["local_minima_theta"] = minima;
}

const std::map<std::string, std::string>& registry() {
  static const std::map<std::string, std::string> figures{
      {"energy-density", "energy density of product states on the (theta, phi) grid"},
      {"beta-map", "effective inverse temperature and normalized energy on the grid"},
      {"lanczos", "Lanczos coefficients a_n, b_n of the chosen states"},
      {"kth-matrix", "|O_nm| in the Krylov basis for S_x, S_z and H"},
      {"traces", "S_x and S_z against time with their canonical and diagonal-ensemble values"},
      {"variance-map", "variances of a_n and b_n on the grid"},
      {"complexity-map", "infinite-time average of the Krylov complexity on the grid"},
      {"ipr-map", "inverse participation ratio on the grid"},
      {"ipr-slice", "log of the inverse participation ratio along theta at fixed phi, one column per N"},
      {"op-variance", "variance of a_n next to the variance of the operator Lanczos coefficients"},
  };
  return figures;
}

}  // namespace

std::vector<std::string> figure_names() {
  std::vector<std::string> names;
  for (const auto& [name, description] : registry()) names.push_back(name);
  return names;
}

std::string figure_description(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown figure '" + name + "'");
  return it->second;
}

std::vector<std::filesystem::path> figure_command(const std::string& name,
                                                  const FigureOptions& options) {
  const std::string description = figure_description(name);
  FigureOptions o = options;
  o.base.validate();
  Writer w(o.out_dir);
  json manifest = {{"figure", name},
                   {"description", description},
                   {"model", o.base.spec.describe()},
                   {"sizes", sizes_of(o)},
                   {"files", json::array()}};
  if (name == "energy-density") {
    energy_density_figure(o, w, manifest);
  } else if (name == "beta-map") {
    sweep_figure("beta_map", {Quantity::Energy, Quantity::Beta}, o, w, manifest);
  } else if (name == "lanczos") {
    lanczos_figure(o, w, manifest);
  } else if (name == "kth-matrix") {
    kth_figure(o, w, manifest);
  } else if (name == "traces") {
    traces_figure(o, w, manifest);
  } else if (name == "variance-map") {
    sweep_figure("variance_map", {Quantity::VarA, Quantity::VarB}, o, w, manifest);
  } else if (name == "complexity-map") {
    sweep_figure("complexity_map", {Quantity::Cbar}, o, w, manifest);
  } else if (name == "ipr-map") {
    sweep_figure("ipr_map", {Quantity::Ipr}, o, w, manifest);
  } else if (name == "ipr-slice") {
    ipr_slice_figure(o, w, manifest);
  } else if (name == "op-variance") {
    sweep_figure("op_variance", {Quantity::VarA, Quantity::OpVarBhat}, o, w, manifest,
                 [](const SweepResult& r, json& entry) {
                   std::vector<double> a;
                   std::vector<double> b;
                   for (const auto& row : r.rows) {
                     a.push_back(row.var_a);
                     b.push_back(row.op_var_bhat);
                   }
                   try {
                     entry["spearman_var_a_op_var_bhat"] = spearman(a, b);
                   } catch (const ConfigError&) {
                     entry["spearman_var_a_op_var_bhat"] = nullptr;
                   }
                 });
  }
  auto out = w.open("manifest.json");
  out << manifest.dump(2) << '\n';
  return w.written();
}

}  // namespace krylov
