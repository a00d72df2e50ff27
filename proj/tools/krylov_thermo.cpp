// Command-line driver: sweeps, figure data and single-state diagnostics.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "krylov/csv.hpp"
#include "krylov/errors.hpp"
#include "krylov/figures.hpp"
#include "krylov/krylov_operator.hpp"
#include "krylov/krylov_state.hpp"
#include "krylov/spectral.hpp"
#include "krylov/sweep.hpp"
#include "krylov/thermo_probe.hpp"

namespace {

using namespace krylov;
using nlohmann::json;

// Accepts plain numbers and multiples of pi such as "pi", "pi/2", "5pi/6", "2*pi/3".
double parse_angle(const std::string& text) {
  static const std::regex pi_form(R"(^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pi_form)) {
    const double num = m[1].length() ? std::stod(m[1].str()) : 1.0;
    const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
    return num * std::numbers::pi / den;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("cannot parse angle '" + text + "'");
  return value;
}

struct Flags {
  std::vector<int> n;
  std::optional<std::string> model;
  std::optional<double> j, g, h;
  std::optional<std::string> theta, phi, state;
  std::optional<double> t_end, dt;
  std::optional<std::string> grid;
  std::optional<std::string> phi_max;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::string> observable;
  std::vector<std::string> quantities;
  std::optional<int> points;
};

void add_model_flags(CLI::App* app, Flags& f) {
  // -h stays free for the longitudinal field.
  app->set_help_flag("--help", "print help and exit");
  app->add_option("--n", f.n, "chain length (repeatable)");
  app->add_option("--model", f.model, "ising or xy")->check(CLI::IsMember({"ising", "xy"}));
  app->add_option("--j", f.j, "Ising coupling J");
  app->add_option("--g", f.g, "transverse field g (XY: field along y)");
  app->add_option("--h", f.h, "longitudinal field h");
  app->add_option("--config", f.config, "JSON config file; flags override it");
}

void add_state_flags(CLI::App* app, Flags& f) {
  app->add_option("--theta", f.theta, "polar angle (number or multiple of pi)");
  app->add_option("--phi", f.phi, "azimuthal angle (number or multiple of pi)");
  app->add_option("--state", f.state, "X+, Y+, Z+ or Z-");
}

void add_time_flags(CLI::App* app, Flags& f) {
  app->add_option("--t-end", f.t_end, "final time");
  app->add_option("--dt", f.dt, "time step");
}

SweepConfig base_config(const Flags& f) {
  SweepConfig c = f.config ? load_sweep_config(*f.config) : SweepConfig{};
  if (f.model) {
    const int n = c.spec.n_sites;
    if (*f.model == "xy" && !std::holds_alternative<XYModel>(c.spec.model)) c.spec.model = XYModel{};
    if (*f.model == "ising" && !std::holds_alternative<TiltedIsing>(c.spec.model)) c.spec.model = TiltedIsing{};
    c.spec.n_sites = n;
  }
  if (auto* ising = std::get_if<TiltedIsing>(&c.spec.model)) {
    if (f.j) ising->j = *f.j;
    if (f.g) ising->g = *f.g;
    if (f.h) ising->h = *f.h;
  } else {
    if (f.j || f.h) throw ConfigError("--j and --h apply to the ising model only");
    if (f.g) std::get<XYModel>(c.spec.model).g = *f.g;
  }
  if (!f.n.empty()) c.spec.n_sites = f.n.front();
  if (f.t_end) c.t_end = *f.t_end;
  if (f.dt) c.dt = *f.dt;
  if (f.grid) {
    static const std::regex grid_form(R"(^\s*(\d+)\s*[xX]\s*(\d+)\s*$)");
    std::smatch m;
    if (!std::regex_match(*f.grid, m, grid_form)) throw ConfigError("--grid expects NxM");
    c.n_theta = std::stoi(m[1].str());
    c.n_phi = std::stoi(m[2].str());
  }
  if (f.phi_max) c.phi_max = parse_angle(*f.phi_max);
  if (f.workers) c.workers = *f.workers;
  if (f.out) c.out_dir = *f.out;
  if (f.observable) {
    const auto& o = *f.observable;
    if (o == "sx") c.observable = Axis::X;
    else if (o == "sy") c.observable = Axis::Y;
    else if (o == "sz") c.observable = Axis::Z;
    else throw ConfigError("observable must be sx, sy or sz here");
  }
  if (!f.quantities.empty()) {
    c.quantities.clear();
    for (const auto& q : f.quantities) c.quantities.push_back(parse_quantity(q));
  }
  return c;
}

std::pair<double, double> state_angles(const Flags& f) {
  if (f.state) {
    if (f.theta || f.phi) throw ConfigError("use either --state or --theta/--phi");
    return bloch_angles(parse_named_state(*f.state));
  }
  if (!f.theta || !f.phi) throw ConfigError("a state is required: --state or --theta and --phi");
  return {parse_angle(*f.theta), parse_angle(*f.phi)};
}

struct Single {
  SweepConfig cfg;
  SparseHermitianOperator h;
  EigenSystem eig;
  double theta;
  double phi;
  CVector psi;
};

Single prepare(const Flags& f) {
  SweepConfig cfg = base_config(f);
  cfg.spec.validate();
  const auto [theta, phi] = state_angles(f);
  CVector psi = build_product_state(theta, phi, cfg.spec.n_sites).vector;
  auto h = build_hamiltonian(cfg.spec);
  EigenSystem eig = diagonalize(h);
  return {cfg, std::move(h), std::move(eig), theta, phi, std::move(psi)};
}

SparseHermitianOperator named_operator(const std::string& name, const Single& s) {
  const int n = s.cfg.spec.n_sites;
  if (name == "sx") return build_magnetization(Axis::X, n);
  if (name == "sy") return build_magnetization(Axis::Y, n);
  if (name == "sz") return build_magnetization(Axis::Z, n);
  if (name == "h") return s.h;
  throw ConfigError("unknown observable '" + name + "' (expected sx, sy, sz or h)");
}

std::vector<double> time_grid(const SweepConfig& c) {
  if (!(c.dt > 0.0) || !(c.t_end > c.dt)) throw ConfigError("need 0 < dt < t_end");
  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::llround(c.t_end / c.dt));
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(static_cast<double>(k) * c.dt);
  return times;
}

int run(int argc, char** argv) {
  CLI::App app{"Krylov-basis thermalization of product states in spin chains"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");
  Flags f;
  std::string figure_name;

  auto* sweep = app.add_subcommand("sweep", "evaluate quantities on a (theta, phi) grid");
  add_model_flags(sweep, f);
  add_time_flags(sweep, f);
  sweep->add_option("--grid", f.grid, "NxM grid (theta x phi)");
  sweep->add_option("--phi-max", f.phi_max, "upper end of the phi range");
  sweep->add_option("--workers", f.workers, "worker threads");
  sweep->add_option("--out", f.out, "output directory");
  sweep->add_option("--quantities", f.quantities, "energy, beta, var_a, var_b, cbar, ipr, ratio, dim_krylov, op_var_bhat")
      ->delimiter(',');
  sweep->add_option("--observable", f.observable, "classifier observable: sx, sy or sz");

  auto* figure = app.add_subcommand("figure", "write the data behind one figure class");
  figure->add_option("name", figure_name, "figure name")->required()->check(CLI::IsMember(figure_names()));
  add_model_flags(figure, f);
  add_state_flags(figure, f);
  add_time_flags(figure, f);
  figure->add_option("--grid", f.grid, "NxM grid (theta x phi)");
  figure->add_option("--phi-max", f.phi_max, "upper end of the phi range");
  figure->add_option("--workers", f.workers, "worker threads");
  figure->add_option("--out", f.out, "output directory");
  figure->add_option("--points", f.points, "theta samples for ipr-slice");

  auto* lanczos_cmd = app.add_subcommand("lanczos", "Lanczos coefficients of one state (CSV)");
  add_model_flags(lanczos_cmd, f);
  add_state_flags(lanczos_cmd, f);

  auto* evolve = app.add_subcommand("evolve", "Krylov amplitudes, or an observable trace, in time (CSV)");
  add_model_flags(evolve, f);
  add_state_flags(evolve, f);
  add_time_flags(evolve, f);
  evolve->add_option("--observable", f.observable, "print <O(t)> for sx, sy, sz or h instead");

  auto* beta = app.add_subcommand("beta", "energy and effective inverse temperature (JSON)");
  add_model_flags(beta, f);
  add_state_flags(beta, f);

  auto* kth = app.add_subcommand("kth", "Krylov-basis matrix structure of an observable (JSON)");
  add_model_flags(kth, f);
  add_state_flags(kth, f);
  kth->add_option("--observable", f.observable, "sx, sy, sz or h")->required();
  kth->add_option("--out", f.out, "also write |O_nm| CSV to this file");

  auto* complexity = app.add_subcommand("complexity", "infinite-time average of the Krylov complexity (JSON)");
  add_model_flags(complexity, f);
  add_state_flags(complexity, f);
  add_time_flags(complexity, f);

  auto* op = app.add_subcommand("op-lanczos", "operator Lanczos coefficients of the density operator (CSV)");
  add_model_flags(op, f);
  add_state_flags(op, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (f.n.size() > 1 && !figure->parsed()) throw ConfigError("only figure accepts several --n");

  if (sweep->parsed()) {
    const SweepResult result = run_sweep(base_config(f));
    const auto files = write_sweep_outputs(result, result.config.out_dir);
    for (const auto& p : files) std::cerr << "wrote " << p.string() << '\n';
    return 0;
  }

  if (figure->parsed()) {
    FigureOptions o;
    // Sizes travel separately so the analytic figures can go past the diagonalization limit.
    Flags without_n = f;
    without_n.n.clear();
    o.base = base_config(without_n);
    o.sizes = f.n;
    if (f.state || f.theta || f.phi) {
      if (figure_name == "ipr-slice") {
        if (f.state || f.theta) throw ConfigError("ipr-slice takes only --phi");
        o.phi = parse_angle(*f.phi);
      } else {
        const auto [t, p] = state_angles(f);
        o.theta = t;
        o.phi = p;
      }
    }
    if (f.points) o.slice_points = *f.points;
    o.out_dir = o.base.out_dir;
    const auto files = figure_command(figure_name, o);
    for (const auto& p : files) std::cerr << "wrote " << p.string() << '\n';
    return 0;
  }

  const Single s = prepare(f);
  std::cout.precision(17);

  if (lanczos_cmd->parsed()) {
    write_lanczos_csv(std::cout, lanczos(s.h, s.psi, {}, &s.eig));
  } else if (evolve->parsed()) {
    const auto kd = lanczos(s.h, s.psi, {}, &s.eig);
    const auto kw = evolve_krylov(kd, time_grid(s.cfg));
    if (f.observable) {
      const auto o = named_operator(*f.observable, s);
      const double b = effective_beta(s.eig, s.h.expectation(s.psi));
      write_trace_csv(std::cout,
                      observable_trace(kd, kw, o, b, s.eig, diagonal_ensemble(s.eig, s.psi)));
    } else {
      write_wavefunction_csv(std::cout, kw);
    }
  } else if (beta->parsed()) {
    const double e = s.h.expectation(s.psi);
    json j = {{"theta", s.theta},
              {"phi", s.phi},
              {"energy", e},
              {"energy_density", e / s.cfg.spec.n_sites},
              {"analytic_energy", analytic_energy(s.cfg.spec, s.theta, s.phi)},
              {"normalized_energy", normalized_energy(s.eig, e)},
              {"beta", effective_beta(s.eig, e)}};
    std::cout << j.dump(2) << '\n';
  } else if (kth->parsed()) {
    const auto kd = lanczos(s.h, s.psi, {}, &s.eig);
    const auto o = named_operator(*f.observable, s);
    const auto kom = krylov_matrix_elements(kd, o, *f.observable);
    const KthReport r = kth_scan(kom, kd, operator_norm(o));
    if (f.out) {
      std::ofstream out(*f.out);
      if (!out) throw ConfigError("cannot write " + *f.out);
      write_operator_matrix_csv(out, kom);
    }
    json j = {{"observable", *f.observable},
              {"dim_krylov", kd.dimension()},
              {"band_dominance", r.band_dominance},
              {"far_band_max", r.far_band_max},
              {"far_band_bound", r.far_band_bound},
              {"f_a0", r.f_a0},
              {"f_prime_a0", r.f_prime_a0},
              {"fit_residual", r.fit_residual},
              {"consistent", r.consistent}};
    std::cout << j.dump(2) << '\n';
  } else if (complexity->parsed()) {
    const auto kd = lanczos(s.h, s.psi, {}, &s.eig);
    const auto de = diagonal_ensemble(s.eig, s.psi);
    json j = {{"dim_krylov", kd.dimension()},
              {"cbar_spectral", complexity_time_average(kd, s.eig, de)},
              {"cbar_quadrature", complexity_quadrature_average(kd, s.cfg.t_end, s.cfg.dt)},
              {"t_end", s.cfg.t_end},
              {"dt", s.cfg.dt}};
    std::cout << j.dump(2) << '\n';
  } else if (op->parsed()) {
    const auto rho = build_density_operator(build_product_state(s.theta, s.phi, s.cfg.spec.n_sites));
    const auto okd = liouvillian_lanczos(s.h, rho, {}, &s.eig);
    write_bhat_csv(std::cout, okd);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const krylov::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const krylov::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
