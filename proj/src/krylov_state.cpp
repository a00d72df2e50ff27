#include "krylov/krylov_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "krylov/csv.hpp"
#include "krylov/errors.hpp"

namespace krylov {

namespace {

// Orthonormal directions P_g psi0 / ||P_g psi0|| for every occupied group.
CMatrix spectral_support(const EigenSystem& eig, const CVector& psi0, double weight_threshold) {
  const CVector c = eig.vectors.adjoint() * psi0;
  std::vector<CVector> columns;
  for (Index g = 0; g < eig.group_count(); ++g) {
    const Index start = eig.group_offsets[g];
    const Index size = eig.group_size(g);
    const double weight = c.segment(start, size).squaredNorm();
    if (weight <= weight_threshold) continue;
    CVector u = eig.vectors.middleCols(start, size) * c.segment(start, size);
    u /= std::sqrt(weight);
    columns.push_back(std::move(u));
  }
  CMatrix support(psi0.size(), static_cast<Index>(columns.size()));
  for (Index k = 0; k < support.cols(); ++k) support.col(k) = columns[static_cast<std::size_t>(k)];
  return support;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double population_variance(const RVector& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

// Uniform time grid 0, dt, ..., t_end.
Index step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("t_end and dt must be positive");
  return static_cast<Index>(std::llround(t_end / dt));
}

}  // namespace

KrylovDecomposition lanczos(const SparseHermitianOperator& h, const CVector& psi0,
                            const LanczosOptions& options, const EigenSystem* eig) {
  const Index dim = h.dim();
  if (psi0.size() != dim) throw ConfigError("state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ConfigError("initial state must be normalized");
  if (eig && eig->dim() != dim) throw ConfigError("eigensystem dimension mismatch");

  CMatrix support;
  Index max_dim = dim;
  if (eig) {
    support = spectral_support(*eig, psi0, options.support_weight_threshold);
    max_dim = std::max<Index>(1, support.cols());
  }

  CMatrix basis(dim, std::min<Index>(max_dim, 64));
  std::vector<double> a;
  std::vector<double> b;
  basis.col(0) = psi0;
  double b_max = 0.0;

  for (Index n = 0;; ++n) {
    CVector w = h.apply(basis.col(n));
    const double an = basis.col(n).dot(w).real();
    a.push_back(an);
    w -= an * basis.col(n);
    if (n > 0) w -= b.back() * basis.col(n - 1);
    if (eig) w = support * (support.adjoint() * w);

    const auto previous = basis.leftCols(n + 1);
    for (int pass = 0; pass < 2; ++pass) w -= previous * (previous.adjoint() * w);

    const double bn = w.norm();
    if (bn < options.relative_b_threshold * std::max(b_max, 1.0) || n + 1 >= max_dim) break;
    w /= bn;
    const double overlap = (previous.adjoint() * w).cwiseAbs().maxCoeff();
    if (overlap > options.orthogonality_tolerance) {
      throw LossOfOrthogonality("Krylov vector " + std::to_string(n + 1) +
                                " overlaps the basis by " + format_double(overlap));
    }
    b_max = std::max(b_max, bn);
    b.push_back(bn);
    if (n + 1 >= basis.cols()) basis.conservativeResize(Eigen::NoChange, std::min(max_dim, 2 * basis.cols()));
    basis.col(n + 1) = w;
  }

  KrylovDecomposition kd;
  kd.a = Eigen::Map<const RVector>(a.data(), static_cast<Index>(a.size()));
  kd.b = Eigen::Map<const RVector>(b.data(), static_cast<Index>(b.size()));
  kd.basis = basis.leftCols(kd.dimension());
  if (eig && options.project_eigenbasis) kd.f = (eig->vectors.adjoint() * kd.basis).transpose();
  return kd;
}

double verify_f_recursion(const KrylovDecomposition& kd, const EigenSystem& eig) {
  if (kd.f.rows() != kd.dimension() || kd.f.cols() != eig.dim()) {
    throw ConfigError("decomposition carries no eigenbasis projection");
  }
  double worst = 0.0;
  const Index d = kd.dimension();
  for (Index n = 0; n < d; ++n) {
    for (Index alpha = 0; alpha < eig.dim(); ++alpha) {
      cplx r = kd.f(n, alpha) * (eig.energies(alpha) - kd.a(n));
      if (n + 1 < d) r -= kd.b_at(n + 1) * kd.f(n + 1, alpha);
      if (n > 0) r -= kd.b_at(n) * kd.f(n - 1, alpha);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

TridiagonalPropagator::TridiagonalPropagator(const RVector& a, const RVector& b) {
  if (a.size() == 0 || b.size() != a.size() - 1) throw ConfigError("malformed Lanczos coefficients");
  if (a.size() == 1) {
    frequencies_ = a;
    modes_ = RMatrix::Ones(1, 1);
    return;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> solver;
  solver.computeFromTridiagonal(a, b, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NoConvergence("tridiagonal eigensolver failed");
  frequencies_ = solver.eigenvalues();
  modes_ = solver.eigenvectors();
}

CVector TridiagonalPropagator::amplitudes(double t) const {
  CVector weights(dimension());
  for (Index k = 0; k < dimension(); ++k) weights(k) = modes_(0, k) * std::polar(1.0, frequencies_(k) * t);
  return modes_.cast<cplx>() * weights;
}

cplx TridiagonalPropagator::return_amplitude(double t) const {
  cplx acc{0.0, 0.0};
  for (Index k = 0; k < dimension(); ++k) {
    acc += modes_(0, k) * modes_(0, k) * std::polar(1.0, frequencies_(k) * t);
  }
  return acc;
}

KrylovWavefunction evolve_krylov(const KrylovDecomposition& kd, std::span<const double> times) {
  if (!times.empty() && times.front() != 0.0) throw ConfigError("time grid must start at 0");
  if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("time grid must be ascending");
  const TridiagonalPropagator prop(kd);
  const Index d = prop.dimension();
  const auto nt = static_cast<Index>(times.size());
  CMatrix phases(d, nt);
  for (Index j = 0; j < nt; ++j) {
    for (Index k = 0; k < d; ++k) {
      phases(k, j) = prop.modes()(0, k) * std::polar(1.0, prop.frequencies()(k) * times[static_cast<std::size_t>(j)]);
    }
  }
  KrylovWavefunction kw;
  kw.times.assign(times.begin(), times.end());
  kw.amplitudes = prop.modes().cast<cplx>() * phases;
  return kw;
}

CVector reconstruct_state(const KrylovDecomposition& kd, const CVector& phi) {
  if (phi.size() != kd.dimension()) throw ConfigError("amplitude vector size mismatch");
  return kd.basis * phi;
}

KrylovOperatorMatrix krylov_matrix_elements(const KrylovDecomposition& kd,
                                            const SparseHermitianOperator& o, std::string label) {
  if (o.dim() != kd.basis.rows()) throw ConfigError("operator dimension mismatch");
  const CMatrix ok = o.matrix() * kd.basis;
  KrylovOperatorMatrix kom;
  kom.entries = kd.basis.adjoint() * ok;
  kom.label = std::move(label);
  return kom;
}

KthReport kth_scan(const KrylovOperatorMatrix& kom, const KrylovDecomposition& kd,
                   double operator_norm, const KthThresholds& thresholds) {
  const CMatrix& o = kom.entries;
  const Index d = o.rows();
  if (d != kd.dimension()) throw ConfigError("operator matrix does not match the decomposition");

  std::vector<double> band;
  std::vector<double> far;
  KthReport report;
  for (Index n = 0; n < d; ++n) {
    if (n + 1 < d) band.push_back(std::abs(o(n, n + 1)));
    for (Index m = n + 2; m < d; ++m) {
      const double v = std::abs(o(n, m));
      far.push_back(v);
      report.far_band_max = std::max(report.far_band_max, v);
    }
  }
  const double band_median = median(band);
  const double far_median = median(far);
  if (far.empty() || far_median == 0.0) {
    report.band_dominance = (!band.empty() && band_median > 0.0)
                                ? std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::quiet_NaN();
  } else {
    report.band_dominance = band_median / far_median;
  }
  report.far_band_bound =
      thresholds.far_band_multiplier * operator_norm / std::sqrt(static_cast<double>(d));

  // Joint least squares over the diagonal and the first off-diagonal.
  RMatrix design = RMatrix::Zero(2 * d - 1, 2);
  RVector rhs(2 * d - 1);
  for (Index n = 0; n < d; ++n) {
    design(n, 0) = 1.0;
    design(n, 1) = kd.a(n) - kd.a(0);
    rhs(n) = o(n, n).real();
  }
  for (Index n = 0; n + 1 < d; ++n) {
    design(d + n, 1) = kd.b_at(n + 1);
    rhs(d + n) = o(n, n + 1).real();
  }
  const RVector coef = design.colPivHouseholderQr().solve(rhs);
  report.f_a0 = coef(0);
  report.f_prime_a0 = coef(1);
  double sq = 0.0;
  for (Index n = 0; n < d; ++n) sq += std::norm(o(n, n) - (coef(0) + coef(1) * design(n, 1)));
  for (Index n = 0; n + 1 < d; ++n) sq += std::norm(o(n, n + 1) - coef(1) * kd.b_at(n + 1));
  report.fit_residual = std::sqrt(sq);

  report.consistent = report.far_band_max <= report.far_band_bound &&
                      report.band_dominance >= thresholds.min_band_dominance;
  return report;
}

namespace {

// W(m, g) = <m|P_g psi0>.
CMatrix group_projections(const KrylovDecomposition& kd, const EigenSystem& eig,
                          const DiagonalEnsemble& de) {
  if (kd.f.rows() != kd.dimension() || kd.f.cols() != eig.dim()) {
    throw ConfigError("decomposition carries no eigenbasis projection");
  }
  CMatrix w(kd.dimension(), eig.group_count());
  for (Index g = 0; g < eig.group_count(); ++g) {
    const Index start = eig.group_offsets[g];
    const Index size = eig.group_size(g);
    w.col(g) = kd.f.middleCols(start, size).conjugate() * de.amplitudes.segment(start, size);
  }
  return w;
}

}  // namespace

CMatrix infinite_time_average_matrix(const KrylovDecomposition& kd, const EigenSystem& eig,
                                     const DiagonalEnsemble& de) {
  const CMatrix w = group_projections(kd, eig, de);
  return w.conjugate() * w.transpose();
}

RVector infinite_time_average_diagonal(const KrylovDecomposition& kd, const EigenSystem& eig,
                                       const DiagonalEnsemble& de) {
  return group_projections(kd, eig, de).cwiseAbs2().rowwise().sum();
}

std::vector<double> krylov_complexity(const KrylovWavefunction& kw) {
  const Index d = kw.amplitudes.rows();
  const RVector n = RVector::LinSpaced(d, 0.0, static_cast<double>(d - 1));
  std::vector<double> out(kw.times.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = kw.amplitudes.col(static_cast<Index>(j)).cwiseAbs2().dot(n);
  }
  return out;
}

double complexity_time_average(const CMatrix& c) {
  double acc = 0.0;
  for (Index n = 0; n < c.rows(); ++n) acc += static_cast<double>(n) * c(n, n).real();
  return acc;
}

double complexity_time_average(const KrylovDecomposition& kd, const EigenSystem& eig,
                               const DiagonalEnsemble& de) {
  const RVector diag = infinite_time_average_diagonal(kd, eig, de);
  double acc = 0.0;
  for (Index n = 0; n < diag.size(); ++n) acc += static_cast<double>(n) * diag(n);
  return acc;
}

LanczosVariance lanczos_variance(const KrylovDecomposition& kd) {
  if (kd.dimension() < 2) throw ConfigError("Lanczos variance needs a Krylov dimension of at least 2");
  return {population_variance(kd.a), population_variance(kd.b)};
}

double ipr_from_phi0(const KrylovWavefunction& kw) {
  const auto nt = kw.times.size();
  if (nt < 2) throw ConfigError("need at least two time samples");
  double integral = 0.0;
  for (std::size_t j = 1; j < nt; ++j) {
    const double dt = kw.times[j] - kw.times[j - 1];
    integral += 0.5 * dt *
                (std::norm(kw.amplitudes(0, static_cast<Index>(j - 1))) +
                 std::norm(kw.amplitudes(0, static_cast<Index>(j))));
  }
  return (kw.times.back() - kw.times.front()) / integral;
}

double ipr_from_phi0(const KrylovDecomposition& kd, double t_end, double dt) {
  const Index steps = step_count(t_end, dt);
  const TridiagonalPropagator prop(kd);
  double integral = 0.0;
  double previous = std::norm(prop.return_amplitude(0.0));
  for (Index j = 1; j <= steps; ++j) {
    const double current = std::norm(prop.return_amplitude(static_cast<double>(j) * dt));
    integral += 0.5 * (previous + current);
    previous = current;
  }
  return static_cast<double>(steps) / integral;
}

double complexity_quadrature_average(const KrylovDecomposition& kd, double t_end, double dt) {
  const Index steps = step_count(t_end, dt);
  const TridiagonalPropagator prop(kd);
  const Index d = prop.dimension();
  const CMatrix modes = prop.modes().cast<cplx>();
  const RVector n = RVector::LinSpaced(d, 0.0, static_cast<double>(d - 1));
  constexpr Index kChunk = 512;
  double integral = 0.0;
  for (Index j0 = 0; j0 <= steps; j0 += kChunk) {
    const Index count = std::min(kChunk, steps + 1 - j0);
    CMatrix phases(d, count);
    for (Index j = 0; j < count; ++j) {
      const double t = static_cast<double>(j0 + j) * dt;
      for (Index k = 0; k < d; ++k) {
        phases(k, j) = prop.modes()(0, k) * std::polar(1.0, prop.frequencies()(k) * t);
      }
    }
    const RVector c = (modes * phases).cwiseAbs2().transpose() * n;
    for (Index j = 0; j < count; ++j) {
      const Index idx = j0 + j;
      integral += (idx == 0 || idx == steps) ? 0.5 * c(j) : c(j);
    }
  }
  return integral / static_cast<double>(steps);
}

void write_lanczos_csv(std::ostream& out, const KrylovDecomposition& kd) {
  out << "n,a_n,b_n\n";
  for (Index n = 0; n < kd.dimension(); ++n) {
    out << n << ',' << format_double(kd.a(n)) << ',' << format_double(kd.b_at(n)) << '\n';
  }
}

void write_operator_matrix_csv(std::ostream& out, const KrylovOperatorMatrix& kom) {
  out << "n,m,abs\n";
  for (Index n = 0; n < kom.entries.rows(); ++n) {
    for (Index m = 0; m < kom.entries.cols(); ++m) {
      out << n << ',' << m << ',' << format_double(std::abs(kom.entries(n, m))) << '\n';
    }
  }
}

void write_wavefunction_csv(std::ostream& out, const KrylovWavefunction& kw) {
  out << "t,n,re,im\n";
  for (std::size_t j = 0; j < kw.times.size(); ++j) {
    for (Index n = 0; n < kw.amplitudes.rows(); ++n) {
      const cplx v = kw.amplitudes(n, static_cast<Index>(j));
      out << format_double(kw.times[j]) << ',' << n << ',' << format_double(v.real()) << ','
          << format_double(v.imag()) << '\n';
    }
  }
}

}  // namespace krylov
