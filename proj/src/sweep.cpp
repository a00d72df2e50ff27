#include "krylov/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "krylov/csv.hpp"
#include "krylov/errors.hpp"
#include "krylov/krylov_operator.hpp"

namespace krylov {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr Quantity kAllQuantities[] = {Quantity::Energy, Quantity::Beta,  Quantity::VarA,
                                       Quantity::VarB,   Quantity::Cbar,  Quantity::Ipr,
                                       Quantity::Ratio,  Quantity::DimKrylov, Quantity::OpVarBhat};

void reject_unknown(const json& object, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string axis_name(Axis a) {
  switch (a) {
    case Axis::X:
      return "sx";
    case Axis::Y:
      return "sy";
    case Axis::Z:
      return "sz";
  }
  return "sz";
}

Axis parse_axis(const std::string& name) {
  if (name == "sx") return Axis::X;
  if (name == "sy") return Axis::Y;
  if (name == "sz") return Axis::Z;
  throw ConfigError("unknown observable '" + name + "' (expected sx, sy or sz)");
}

double grid_value(int i, int count, double max) {
  if (i == count - 1) return max;
  return max * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::Energy:
      return "energy";
    case Quantity::Beta:
      return "beta";
    case Quantity::VarA:
      return "var_a";
    case Quantity::VarB:
      return "var_b";
    case Quantity::Cbar:
      return "cbar";
    case Quantity::Ipr:
      return "ipr";
    case Quantity::Ratio:
      return "ratio";
    case Quantity::DimKrylov:
      return "dim_krylov";
    case Quantity::OpVarBhat:
      return "op_var_bhat";
  }
  return "?";
}

Quantity parse_quantity(const std::string& name) {
  for (const Quantity q : kAllQuantities) {
    if (to_string(q) == name) return q;
  }
  throw ConfigError("unknown quantity '" + name + "'");
}

std::vector<std::string> quantity_columns(Quantity q) {
  switch (q) {
    case Quantity::Energy:
      return {"E", "E_density"};
    case Quantity::Beta:
      return {"beta", "normalized_energy"};
    case Quantity::VarA:
      return {"var_a"};
    case Quantity::VarB:
      return {"var_b"};
    case Quantity::Cbar:
      return {"cbar"};
    case Quantity::Ipr:
      return {"lambda_ipr", "log_lambda"};
    case Quantity::Ratio:
      return {"osc_ratio", "label"};
    case Quantity::DimKrylov:
      return {"dim_krylov"};
    case Quantity::OpVarBhat:
      return {"op_var_bhat"};
  }
  return {};
}

void SweepConfig::validate() {
  spec.validate();
  if (n_theta < 2 || n_phi < 2) throw ConfigError("grid sizes must be at least 2");
  if (!(phi_max > 0.0 && phi_max < 2 * std::numbers::pi)) {
    throw ConfigError("phi_max must lie in (0, 2 pi)");
  }
  if (!(dt > 0.0) || !(t_end > dt)) throw ConfigError("need 0 < dt < t_end");
  if (!(b_threshold > 0.0)) throw ConfigError("b_threshold must be positive");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (quantities.empty()) throw ConfigError("no quantities requested");
  if ((Index{1} << spec.n_sites) > kMaxDiagonalizationDim) {
    throw ConfigError("sweeps need a full diagonalization; N is too large");
  }
  std::sort(quantities.begin(), quantities.end());
  quantities.erase(std::unique(quantities.begin(), quantities.end()), quantities.end());
  if (wants(Quantity::OpVarBhat) && spec.n_sites > OperatorLanczosOptions{}.max_sites) {
    throw ConfigError("op_var_bhat is limited to N <= " +
                      std::to_string(OperatorLanczosOptions{}.max_sites));
  }
}

bool SweepConfig::wants(Quantity q) const {
  return std::find(quantities.begin(), quantities.end(), q) != quantities.end();
}

double SweepConfig::theta_at(int i) const { return grid_value(i, n_theta, std::numbers::pi); }
double SweepConfig::phi_at(int j) const { return grid_value(j, n_phi, phi_max); }

std::string to_json(const SweepConfig& config, bool include_runtime) {
  json model;
  if (const auto* ising = std::get_if<TiltedIsing>(&config.spec.model)) {
    model = {{"type", "ising"}, {"n", config.spec.n_sites}, {"j", ising->j}, {"g", ising->g},
             {"h", ising->h}};
  } else {
    model = {{"type", "xy"}, {"n", config.spec.n_sites}, {"g", std::get<XYModel>(config.spec.model).g}};
  }
  json quantities = json::array();
  for (const Quantity q : config.quantities) quantities.push_back(to_string(q));
  json j = {
      {"model", model},
      {"grid", {{"n_theta", config.n_theta}, {"n_phi", config.n_phi}, {"phi_max", config.phi_max}}},
      {"quantities", quantities},
      {"time", {{"t_end", config.t_end}, {"dt", config.dt}}},
      {"observable", axis_name(config.observable)},
      {"thresholds",
       {{"b_relative", config.b_threshold},
        {"classifier",
         {{"smoothing_window", config.classifier.smoothing_window},
          {"osc_start_fraction", config.classifier.osc_start_fraction},
          {"strong", config.classifier.strong_threshold},
          {"weak", config.classifier.weak_threshold}}}}},
  };
  if (include_runtime) {
    j["workers"] = config.workers;
    j["out"] = config.out_dir;
  }
  return j.dump(2);
}

SweepConfig sweep_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"model", "grid", "quantities", "time", "observable", "thresholds", "workers", "out"},
                 "config");
  SweepConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"type", "n", "j", "g", "h"}, "model");
    std::string type = "ising";
    read(m, "type", type);
    read(m, "n", c.spec.n_sites);
    if (type == "ising") {
      TiltedIsing ising;
      read(m, "j", ising.j);
      read(m, "g", ising.g);
      read(m, "h", ising.h);
      c.spec.model = ising;
    } else if (type == "xy") {
      if (m.contains("j") || m.contains("h")) throw ConfigError("xy model takes only g");
      XYModel xy;
      read(m, "g", xy.g);
      c.spec.model = xy;
    } else {
      throw ConfigError("unknown model type '" + type + "'");
    }
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"n_theta", "n_phi", "phi_max"}, "grid");
    read(g, "n_theta", c.n_theta);
    read(g, "n_phi", c.n_phi);
    read(g, "phi_max", c.phi_max);
  }
  if (j.contains("quantities")) {
    std::vector<std::string> names;
    read(j, "quantities", names);
    c.quantities.clear();
    for (const auto& name : names) c.quantities.push_back(parse_quantity(name));
  }
  if (j.contains("time")) {
    const json& t = j.at("time");
    reject_unknown(t, {"t_end", "dt"}, "time");
    read(t, "t_end", c.t_end);
    read(t, "dt", c.dt);
  }
  if (j.contains("observable")) {
    std::string name;
    read(j, "observable", name);
    c.observable = parse_axis(name);
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    reject_unknown(t, {"b_relative", "classifier"}, "thresholds");
    read(t, "b_relative", c.b_threshold);
    if (t.contains("classifier")) {
      const json& k = t.at("classifier");
      reject_unknown(k, {"smoothing_window", "osc_start_fraction", "strong", "weak"}, "classifier");
      read(k, "smoothing_window", c.classifier.smoothing_window);
      read(k, "osc_start_fraction", c.classifier.osc_start_fraction);
      read(k, "strong", c.classifier.strong_threshold);
      read(k, "weak", c.classifier.weak_threshold);
    }
  }
  read(j, "workers", c.workers);
  read(j, "out", c.out_dir);
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return sweep_config_from_json(text.str());
}

SweepContext::SweepContext(SweepConfig cfg)
    : config((cfg.validate(), std::move(cfg))),
      hamiltonian(build_hamiltonian(config.spec)),
      eig(diagonalize(hamiltonian)),
      observable(build_magnetization(config.observable, config.spec.n_sites)),
      observable_diagonal(eigenbasis_diagonal(eig, observable)) {
  const auto steps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
  times.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) times[k] = static_cast<double>(k) * config.dt;
}

SweepRow compute_point(const SweepContext& ctx, double theta, double phi) {
  const SweepConfig& cfg = ctx.config;
  SweepRow row;
  row.theta = theta;
  row.phi = phi;
  for (double* field : {&row.energy, &row.energy_density, &row.beta, &row.normalized_energy,
                        &row.var_a, &row.var_b, &row.cbar, &row.lambda_ipr, &row.log_lambda,
                        &row.osc_ratio, &row.op_var_bhat}) {
    *field = kNaN;
  }
  std::vector<std::string> failed;
  auto attempt = [&](Quantity q, auto&& fn) {
    try {
      fn();
      return true;
    } catch (const ConfigError&) {
    } catch (const NumericalError&) {
    }
    failed.push_back(to_string(q));
    return false;
  };

  const BlochProductState state = build_product_state(theta, phi, cfg.spec.n_sites);
  const double energy = ctx.hamiltonian.expectation(state.vector);
  if (cfg.wants(Quantity::Energy)) {
    row.energy = energy;
    row.energy_density = energy / cfg.spec.n_sites;
  }

  std::optional<double> beta;
  if (cfg.wants(Quantity::Beta) || cfg.wants(Quantity::Ratio)) {
    try {
      beta = effective_beta(ctx.eig, energy);
    } catch (const NumericalError&) {
    }
    if (cfg.wants(Quantity::Beta)) {
      row.normalized_energy = normalized_energy(ctx.eig, energy);
      if (beta) {
        row.beta = *beta;
      } else {
        failed.push_back(to_string(Quantity::Beta));
      }
    }
  }

  std::optional<DiagonalEnsemble> de;
  if (cfg.wants(Quantity::Ipr) || cfg.wants(Quantity::Cbar)) de = diagonal_ensemble(ctx.eig, state.vector);
  if (cfg.wants(Quantity::Ipr)) {
    row.lambda_ipr = inverse_participation_ratio(*de);
    row.log_lambda = std::log(row.lambda_ipr);
  }

  const bool need_chain = cfg.wants(Quantity::VarA) || cfg.wants(Quantity::VarB) ||
                          cfg.wants(Quantity::Cbar) || cfg.wants(Quantity::Ratio) ||
                          cfg.wants(Quantity::DimKrylov);
  std::optional<KrylovDecomposition> kd;
  if (need_chain) {
    LanczosOptions options;
    options.relative_b_threshold = cfg.b_threshold;
    try {
      kd = lanczos(ctx.hamiltonian, state.vector, options, &ctx.eig);
    } catch (const NumericalError&) {
    }
  }
  auto chain_quantity = [&](Quantity q, auto&& fn) {
    if (!cfg.wants(q)) return;
    if (!kd) {
      failed.push_back(to_string(q));
      return;
    }
    attempt(q, fn);
  };
  chain_quantity(Quantity::VarA, [&] { row.var_a = lanczos_variance(*kd).var_a; });
  chain_quantity(Quantity::VarB, [&] { row.var_b = lanczos_variance(*kd).var_b; });
  chain_quantity(Quantity::Cbar, [&] { row.cbar = complexity_time_average(*kd, ctx.eig, *de); });
  chain_quantity(Quantity::DimKrylov, [&] { row.dim_krylov = static_cast<long>(kd->dimension()); });
  chain_quantity(Quantity::Ratio, [&] {
    if (!beta) throw TargetOutOfSpectrum("no effective beta");
    const KrylovWavefunction kw = evolve_krylov(*kd, ctx.times);
    const KrylovOperatorMatrix kom = krylov_matrix_elements(*kd, ctx.observable);
    const double thermal = thermal_expectation(ctx.eig, *beta, ctx.observable_diagonal);
    const ThermalizationVerdict v =
        classify_thermalization(observable_trace(kw, kom, thermal, kNaN), cfg.classifier);
    row.osc_ratio = v.ratio;
    row.label = to_string(v.label);
  });

  if (cfg.wants(Quantity::OpVarBhat)) {
    attempt(Quantity::OpVarBhat, [&] {
      OperatorLanczosOptions options;
      options.relative_b_threshold = cfg.b_threshold;
      const auto okd =
          liouvillian_lanczos(ctx.hamiltonian, build_density_operator(state), options, &ctx.eig);
      row.op_var_bhat = bhat_variance(okd);
    });
  }

  if (!failed.empty()) {
    std::sort(failed.begin(), failed.end(), [](const std::string& a, const std::string& b) {
      return parse_quantity(a) < parse_quantity(b);
    });
    row.status = "failed:";
    for (std::size_t k = 0; k < failed.size(); ++k) row.status += (k ? "+" : "") + failed[k];
  }
  return row;
}

SweepResult run_sweep(const SweepConfig& config) { return run_sweep(SweepContext(config)); }

SweepResult run_sweep(const SweepContext& ctx) {
  const SweepConfig& cfg = ctx.config;
  const std::size_t total = static_cast<std::size_t>(cfg.n_theta) * static_cast<std::size_t>(cfg.n_phi);
  SweepResult result{cfg, std::vector<SweepRow>(total)};

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        const int i = static_cast<int>(k / static_cast<std::size_t>(cfg.n_phi));
        const int j = static_cast<int>(k % static_cast<std::size_t>(cfg.n_phi));
        result.rows[k] = compute_point(ctx, cfg.theta_at(i), cfg.phi_at(j));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = total;
        return;
      }
    }
  };
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), total));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return result;
}

double row_value(const SweepRow& row, const std::string& column) {
  if (column == "theta") return row.theta;
  if (column == "phi") return row.phi;
  if (column == "E") return row.energy;
  if (column == "E_density") return row.energy_density;
  if (column == "beta") return row.beta;
  if (column == "normalized_energy") return row.normalized_energy;
  if (column == "var_a") return row.var_a;
  if (column == "var_b") return row.var_b;
  if (column == "cbar") return row.cbar;
  if (column == "lambda_ipr") return row.lambda_ipr;
  if (column == "log_lambda") return row.log_lambda;
  if (column == "osc_ratio") return row.osc_ratio;
  if (column == "op_var_bhat") return row.op_var_bhat;
  if (column == "dim_krylov") return row.dim_krylov < 0 ? kNaN : static_cast<double>(row.dim_krylov);
  throw ConfigError("no numeric column '" + column + "'");
}

namespace {

std::string cell(const SweepRow& row, const std::string& column) {
  if (column == "label") return row.label;
  if (column == "status") return row.status;
  if (column == "dim_krylov") return std::to_string(row.dim_krylov);
  return format_double(row_value(row, column));
}

void write_table(std::ostream& out, const SweepResult& result, const std::vector<std::string>& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : result.rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << cell(row, columns[c]);
    out << '\n';
  }
}

std::vector<std::string> wide_columns(const SweepConfig& cfg) {
  std::vector<std::string> columns{"theta", "phi"};
  for (const Quantity q : cfg.quantities) {
    for (auto& c : quantity_columns(q)) columns.push_back(std::move(c));
  }
  columns.emplace_back("status");
  return columns;
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  write_table(out, result, wide_columns(result.config));
}

void write_quantity_csv(std::ostream& out, const SweepResult& result, Quantity q) {
  std::vector<std::string> columns{"theta", "phi"};
  for (auto& c : quantity_columns(q)) columns.push_back(std::move(c));
  write_table(out, result, columns);
}

std::vector<std::filesystem::path> write_sweep_outputs(const SweepResult& result,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    written.push_back(dir / name);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw ConfigError("cannot write " + written.back().string());
    return out;
  };
  json files = json::array();
  {
    auto out = open("sweep.csv");
    write_sweep_csv(out, result);
    files.push_back({{"name", "sweep.csv"}, {"columns", wide_columns(result.config)}});
  }
  for (const Quantity q : result.config.quantities) {
    const std::string name = to_string(q) + ".csv";
    auto out = open(name);
    write_quantity_csv(out, result, q);
    std::vector<std::string> columns{"theta", "phi"};
    for (auto& c : quantity_columns(q)) columns.push_back(std::move(c));
    files.push_back({{"name", name}, {"columns", columns}});
  }
  const json manifest = {
      {"kind", "sweep"},
      {"model", result.config.spec.describe()},
      {"row_order", "theta outer, phi inner"},
      {"rows", result.rows.size()},
      {"axes", {{"theta", "[0, pi]"}, {"phi", "[0, phi_max]"}}},
      {"config", json::parse(to_json(result.config, false))},
      {"files", files},
  };
  auto out = open("manifest.json");
  out << manifest.dump(2) << '\n';
  return written;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("spearman needs equal-length inputs");
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (std::isnan(x[k]) || std::isnan(y[k])) continue;
    a.push_back(x[k]);
    b.push_back(y[k]);
  }
  if (a.size() < 2) throw ConfigError("spearman needs at least two valid pairs");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const Eigen::Map<const RVector> va(ra.data(), static_cast<Index>(ra.size()));
  const Eigen::Map<const RVector> vb(rb.data(), static_cast<Index>(rb.size()));
  const RVector ca = va.array() - va.mean();
  const RVector cb = vb.array() - vb.mean();
  const double denom = ca.norm() * cb.norm();
  if (denom == 0.0) return kNaN;
  return ca.dot(cb) / denom;
}

std::vector<std::size_t> interior_local_minima(std::span<const double> values) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) out.push_back(i);
  }
  return out;
}

}  // namespace krylov
