#include "krylov/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "krylov/errors.hpp"

namespace krylov {

namespace {

std::vector<Index> group_degenerate(const RVector& energies, double tol) {
  std::vector<Index> offsets{0};
  for (Index i = 1; i < energies.size(); ++i) {
    if (energies(i) - energies(i - 1) > tol) offsets.push_back(i);
  }
  offsets.push_back(energies.size());
  return offsets;
}

}  // namespace

EigenSystem diagonalize(const SparseHermitianOperator& h, Index max_dim) {
  if (h.dim() > max_dim) {
    throw ConfigError("diagonalization guard: dimension " + std::to_string(h.dim()) +
                      " exceeds " + std::to_string(max_dim));
  }
  EigenSystem eig;
  if (h.is_real()) {
    const RMatrix dense = h.to_dense().real();
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(dense);
    if (solver.info() != Eigen::Success) throw NoConvergence("real symmetric eigensolver failed");
    eig.energies = solver.eigenvalues();
    eig.vectors = solver.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.to_dense());
    if (solver.info() != Eigen::Success) throw NoConvergence("Hermitian eigensolver failed");
    eig.energies = solver.eigenvalues();
    eig.vectors = solver.eigenvectors();
  }
  eig.degeneracy_tolerance = 1e-10 * h.max_abs_entry();
  eig.group_offsets = group_degenerate(eig.energies, eig.degeneracy_tolerance);
  return eig;
}

EigenSystem diagonalize_dense(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NoConvergence("Hermitian eigensolver failed");
  EigenSystem eig;
  eig.energies = solver.eigenvalues();
  eig.vectors = solver.eigenvectors();
  eig.degeneracy_tolerance = 1e-10 * h.cwiseAbs().maxCoeff();
  eig.group_offsets = group_degenerate(eig.energies, eig.degeneracy_tolerance);
  return eig;
}

double operator_norm(const SparseHermitianOperator& o) {
  RVector ev;
  if (o.is_real()) {
    ev = Eigen::SelfAdjointEigenSolver<RMatrix>(o.to_dense().real(), Eigen::EigenvaluesOnly)
             .eigenvalues();
  } else {
    ev = Eigen::SelfAdjointEigenSolver<CMatrix>(o.to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
  }
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

RVector eigenbasis_diagonal(const EigenSystem& eig, const SparseHermitianOperator& o) {
  if (o.dim() != eig.dim()) throw ConfigError("operator dimension mismatch");
  const CMatrix ov = o.matrix() * eig.vectors;
  RVector diag(eig.dim());
  for (Index a = 0; a < eig.dim(); ++a) diag(a) = eig.vectors.col(a).dot(ov.col(a)).real();
  return diag;
}

double thermal_expectation(const EigenSystem& eig, double beta, const RVector& diagonal) {
  if (!std::isfinite(beta)) throw ConfigError("beta must be finite");
  const RVector exponent = -beta * eig.energies;
  const double shift = exponent.maxCoeff();
  double z = 0.0;
  double acc = 0.0;
  for (Index a = 0; a < eig.dim(); ++a) {
    const double w = std::exp(exponent(a) - shift);
    z += w;
    acc += w * diagonal(a);
  }
  return acc / z;
}

double thermal_expectation(const EigenSystem& eig, double beta, const SparseHermitianOperator& o) {
  return thermal_expectation(eig, beta, eigenbasis_diagonal(eig, o));
}

double thermal_energy(const EigenSystem& eig, double beta) {
  return thermal_expectation(eig, beta, eig.energies);
}

double effective_beta(const EigenSystem& eig, double e_target) {
  const double e_min = eig.e_min();
  const double e_max = eig.e_max();
  if (!(e_target > e_min && e_target < e_max)) {
    throw TargetOutOfSpectrum("target energy outside the open spectral interval");
  }
  // Thermal energy decreases monotonically in beta.
  auto residual = [&](double beta) { return thermal_energy(eig, beta) - e_target; };
  double lo = -5.0;
  double hi = 5.0;
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  for (int k = 0; f_lo < 0.0 && k < 60; ++k) {
    lo *= 2.0;
    f_lo = residual(lo);
  }
  for (int k = 0; f_hi > 0.0 && k < 60; ++k) {
    hi *= 2.0;
    f_hi = residual(hi);
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (!(f_lo > 0.0 && f_hi < 0.0)) throw NoConvergence("could not bracket the effective beta");

  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
  const double beta = 0.5 * (a + b);
  if (std::abs(residual(beta)) >= 1e-9 * (e_max - e_min)) {
    throw NoConvergence("effective beta residual above tolerance");
  }
  return beta;
}

double normalized_energy(const EigenSystem& eig, double e_target) {
  return (e_target - eig.e_min()) / (eig.e_max() - eig.e_min());
}

DiagonalEnsemble diagonal_ensemble(const EigenSystem& eig, const CVector& psi0) {
  if (psi0.size() != eig.dim()) throw ConfigError("state dimension mismatch");
  DiagonalEnsemble de;
  de.amplitudes = eig.vectors.adjoint() * psi0;
  de.overlaps = de.amplitudes.cwiseAbs2();
  de.group_weights.resize(eig.group_count());
  for (Index g = 0; g < eig.group_count(); ++g) {
    de.group_weights(g) = de.overlaps.segment(eig.group_offsets[g], eig.group_size(g)).sum();
  }
  return de;
}

double inverse_participation_ratio(const DiagonalEnsemble& de) {
  return 1.0 / de.group_weights.squaredNorm();
}

double diagonal_ensemble_expectation(const EigenSystem& eig, const DiagonalEnsemble& de,
                                     const SparseHermitianOperator& o, const RVector& diagonal) {
  double acc = 0.0;
  for (Index g = 0; g < eig.group_count(); ++g) {
    const Index start = eig.group_offsets[g];
    const Index size = eig.group_size(g);
    if (size == 1) {
      acc += de.overlaps(start) * diagonal(start);
      continue;
    }
    const CVector projected =
        eig.vectors.middleCols(start, size) * de.amplitudes.segment(start, size);
    acc += projected.dot(o.apply(projected)).real();
  }
  return acc;
}

double diagonal_ensemble_expectation(const EigenSystem& eig, const DiagonalEnsemble& de,
                                     const SparseHermitianOperator& o) {
  return diagonal_ensemble_expectation(eig, de, o, eigenbasis_diagonal(eig, o));
}

std::vector<CVector> evolve_exact(const EigenSystem& eig, const CVector& psi0,
                                  std::span<const double> times) {
  const CVector c = eig.vectors.adjoint() * psi0;
  std::vector<CVector> out;
  out.reserve(times.size());
  for (const double t : times) {
    CVector phased(c.size());
    for (Index a = 0; a < c.size(); ++a) phased(a) = c(a) * std::polar(1.0, eig.energies(a) * t);
    out.push_back(eig.vectors * phased);
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const EigenSystem& eig, const DiagonalEnsemble& de) {
  const auto old = out.precision(17);
  out << "alpha,energy,overlap_sq\n";
  for (Index a = 0; a < eig.dim(); ++a) {
    out << a << ',' << eig.energies(a) << ',' << de.overlaps(a) << '\n';
  }
  out.precision(old);
}

}  // namespace krylov
