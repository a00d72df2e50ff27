#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "krylov/spin_core.hpp"
#include "krylov/types.hpp"

namespace krylov {

// Full spectrum of a Hermitian operator, ascending.
struct EigenSystem {
  RVector energies;
  CMatrix vectors;  // column alpha is |E_alpha>
  // Degenerate groups are consecutive index ranges
  // [group_offsets[g], group_offsets[g+1]).
  std::vector<Index> group_offsets;
  double degeneracy_tolerance = 0.0;

  Index dim() const { return energies.size(); }
  Index group_count() const { return static_cast<Index>(group_offsets.size()) - 1; }
  Index group_size(Index g) const { return group_offsets[g + 1] - group_offsets[g]; }
  double e_min() const { return energies(0); }
  double e_max() const { return energies(energies.size() - 1); }
};

// Overlaps of an initial state with the energy eigenbasis.
struct DiagonalEnsemble {
  CVector amplitudes;  // c_alpha = <E_alpha|psi0>
  RVector overlaps;    // |c_alpha|^2
  RVector group_weights;  // ||P_g psi0||^2 per degenerate group
};

constexpr Index kMaxDiagonalizationDim = Index{1} << 14;

// Dense Hermitian eigensolve. Real operators take the real symmetric path.
// Degeneracy grouping uses 1e-10 * max|H_ij|.
EigenSystem diagonalize(const SparseHermitianOperator& h,
                        Index max_dim = kMaxDiagonalizationDim);
EigenSystem diagonalize_dense(const CMatrix& h);

// Largest |eigenvalue|.
double operator_norm(const SparseHermitianOperator& o);

// <E_alpha|O|E_alpha> for every alpha.
RVector eigenbasis_diagonal(const EigenSystem& eig, const SparseHermitianOperator& o);

// Canonical average; the exponent is shifted by its maximum so it cannot overflow.
double thermal_expectation(const EigenSystem& eig, double beta, const RVector& diagonal);
double thermal_expectation(const EigenSystem& eig, double beta, const SparseHermitianOperator& o);
double thermal_energy(const EigenSystem& eig, double beta);

// Solves thermal_energy(beta) = e_target. Throws TargetOutOfSpectrum unless
// E_min < e_target < E_max, NoConvergence if no bracket can be found.
double effective_beta(const EigenSystem& eig, double e_target);

double normalized_energy(const EigenSystem& eig, double e_target);

DiagonalEnsemble diagonal_ensemble(const EigenSystem& eig, const CVector& psi0);

// 1 / Tr(rho_DE^2), degenerate groups kept coherent.
double inverse_participation_ratio(const DiagonalEnsemble& de);

// Tr(rho_DE O) with degenerate cross terms included.
double diagonal_ensemble_expectation(const EigenSystem& eig, const DiagonalEnsemble& de,
                                     const SparseHermitianOperator& o);
double diagonal_ensemble_expectation(const EigenSystem& eig, const DiagonalEnsemble& de,
                                     const SparseHermitianOperator& o, const RVector& diagonal);

// psi(t) = exp(+iHt) psi0 = sum_alpha c_alpha e^{i E_alpha t} |E_alpha>.
std::vector<CVector> evolve_exact(const EigenSystem& eig, const CVector& psi0,
                                  std::span<const double> times);

// CSV "alpha,energy,overlap_sq".
void write_spectrum_csv(std::ostream& out, const EigenSystem& eig, const DiagonalEnsemble& de);

}  // namespace krylov
