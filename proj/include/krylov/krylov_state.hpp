#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"
#include "krylov/types.hpp"

namespace krylov {

struct LanczosOptions {
  // Stop once the candidate norm drops below this times max(b seen so far, 1).
  double relative_b_threshold = 1e-8;
  // Post-reorthogonalization overlap that triggers LossOfOrthogonality.
  double orthogonality_tolerance = 1e-6;
  // Degenerate groups carrying less weight than this are outside the support.
  double support_weight_threshold = 1e-20;
  // Fill KrylovDecomposition::f when an eigensystem is supplied.
  bool project_eigenbasis = true;
};

// Krylov chain of a state: H|n> = a_n |n> + b_{n+1} |n+1> + b_n |n-1>.
struct KrylovDecomposition {
  RVector a;       // a_0 .. a_{D-1}
  RVector b;       // b_1 .. b_{D-1}; b(k) holds b_{k+1}
  CMatrix basis;   // column n is |n>
  CMatrix f;       // f(n, alpha) = <E_alpha|n>; empty without an eigensystem

  Index dimension() const { return a.size(); }
  // b_n with the conventions b_0 = b_D = 0.
  double b_at(Index n) const { return (n >= 1 && n < dimension()) ? b(n - 1) : 0.0; }
};

// Lanczos recursion with two-pass full reorthogonalization.
//
// With an eigensystem the candidate vectors are also projected onto the
// spectral support of psi0 (one direction per occupied degenerate group).
// The exact recursion never leaves that subspace, but round-off outside it
// is amplified at every step and would otherwise keep the chain running past
// the true Krylov dimension. The f matrix is filled by direct projection.
KrylovDecomposition lanczos(const SparseHermitianOperator& h, const CVector& psi0,
                            const LanczosOptions& options = {},
                            const EigenSystem* eig = nullptr);

// max_{n,alpha} |f_{n alpha} E_alpha - a_n f_{n alpha} - b_{n+1} f_{n+1,alpha} - b_n f_{n-1,alpha}|
double verify_f_recursion(const KrylovDecomposition& kd, const EigenSystem& eig);

// exp(+i T t) restricted to the chain, where T is the Lanczos tridiagonal.
class TridiagonalPropagator {
 public:
  TridiagonalPropagator(const RVector& a, const RVector& b);
  explicit TridiagonalPropagator(const KrylovDecomposition& kd)
      : TridiagonalPropagator(kd.a, kd.b) {}

  Index dimension() const { return frequencies_.size(); }
  const RVector& frequencies() const { return frequencies_; }
  const RMatrix& modes() const { return modes_; }

  // phi(t) = exp(+i T t) e_0.
  CVector amplitudes(double t) const;
  cplx return_amplitude(double t) const;

 private:
  RVector frequencies_;
  RMatrix modes_;
};

struct KrylovWavefunction {
  std::vector<double> times;
  CMatrix amplitudes;  // amplitudes(n, k) = phi_n(times[k])
};

// Times must be ascending and start at 0.
KrylovWavefunction evolve_krylov(const KrylovDecomposition& kd, std::span<const double> times);

// psi = sum_n phi_n |n>.
CVector reconstruct_state(const KrylovDecomposition& kd, const CVector& phi);

struct KrylovOperatorMatrix {
  CMatrix entries;  // <n|O|m>
  std::string label;
};

KrylovOperatorMatrix krylov_matrix_elements(const KrylovDecomposition& kd,
                                            const SparseHermitianOperator& o,
                                            std::string label = {});

struct KthThresholds {
  double far_band_multiplier = 3.0;
  double min_band_dominance = 10.0;
};

struct KthReport {
  double band_dominance = 0.0;  // median |O_{n,n+1}| / median_{|n-m|>=2} |O_nm|
  double far_band_max = 0.0;
  double far_band_bound = 0.0;  // multiplier * ||O|| / sqrt(D)
  double f_a0 = 0.0;
  double f_prime_a0 = 0.0;
  double fit_residual = 0.0;
  bool consistent = false;
};

// Compares O_nm against the leading tridiagonal form
// O_nn ~ f(a_0) + (a_n - a_0) f'(a_0), O_{n,n+1} ~ f'(a_0) b_{n+1}.
KthReport kth_scan(const KrylovOperatorMatrix& kom, const KrylovDecomposition& kd,
                   double operator_norm, const KthThresholds& thresholds = {});

// C(n, m) = lim (1/T) int phi_n^* phi_m dt = <m|rho_DE|n>, degenerate groups coherent.
CMatrix infinite_time_average_matrix(const KrylovDecomposition& kd, const EigenSystem& eig,
                                     const DiagonalEnsemble& de);

// Diagonal of the matrix above, without forming it.
RVector infinite_time_average_diagonal(const KrylovDecomposition& kd, const EigenSystem& eig,
                                       const DiagonalEnsemble& de);

// sum_n n |phi_n(t)|^2 at every stored time.
std::vector<double> krylov_complexity(const KrylovWavefunction& kw);

// sum_n n C_nn.
double complexity_time_average(const CMatrix& c);
double complexity_time_average(const KrylovDecomposition& kd, const EigenSystem& eig,
                               const DiagonalEnsemble& de);

struct LanczosVariance {
  double var_a = 0.0;
  double var_b = 0.0;
};

// Population variances of {a_n} and {b_n}. Requires dimension >= 2.
LanczosVariance lanczos_variance(const KrylovDecomposition& kd);

// 1 / time average of |phi_0|^2 (trapezoid over the stored, uniform times).
double ipr_from_phi0(const KrylovWavefunction& kw);
// Same, sampling phi_0 on [0, t_end] with step dt without storing the chain.
double ipr_from_phi0(const KrylovDecomposition& kd, double t_end = 1e3, double dt = 0.05);

// Trapezoid average of the complexity on [0, t_end].
double complexity_quadrature_average(const KrylovDecomposition& kd, double t_end, double dt);

// CSV "n,a_n,b_n"; b_0 is written as 0.
void write_lanczos_csv(std::ostream& out, const KrylovDecomposition& kd);
// CSV "n,m,abs" for every entry.
void write_operator_matrix_csv(std::ostream& out, const KrylovOperatorMatrix& kom);
// CSV "t,n,re,im".
void write_wavefunction_csv(std::ostream& out, const KrylovWavefunction& kw);

}  // namespace krylov
