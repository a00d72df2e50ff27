#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"
#include "krylov/types.hpp"

namespace krylov {

struct OperatorLanczosOptions {
  double relative_b_threshold = 1e-8;
  double orthogonality_tolerance = 1e-6;
  // Relative weight below which an energy-basis matrix element is treated as zero.
  double support_weight_threshold = 1e-20;
  bool keep_basis = false;
  int max_sites = 7;
};

// Krylov chain of an operator under L O = [H, O].
//
// Inner product <A, B> = Tr(A^dagger B) / 2^N.
struct OperatorKrylovDecomposition {
  RVector b_hat;  // b_hat_1 .. b_hat_{D_O - 1}
  Index dimension = 0;
  std::vector<CMatrix> basis;  // filled only with keep_basis
};

cplx frobenius_inner(const CMatrix& a, const CMatrix& b);
CMatrix liouvillian_apply(const SparseHermitianOperator& h, const CMatrix& o);

// The initial operator is rescaled to unit norm first.
//
// Without an eigensystem the recursion runs on dense 2^N x 2^N matrices.
// Round-off outside the true Krylov space is then amplified step by step and
// the chain can run past its exact length. With an eigensystem the recursion
// runs in the energy basis instead, where L multiplies each element by
// E_alpha - E_beta: one coordinate per distinct frequency carried by o0. The
// two are equal in exact arithmetic; the second is exact about the support
// and far cheaper.
OperatorKrylovDecomposition liouvillian_lanczos(const SparseHermitianOperator& h, const CMatrix& o0,
                                                const OperatorLanczosOptions& options = {},
                                                const EigenSystem* eig = nullptr);
OperatorKrylovDecomposition liouvillian_lanczos(const SparseHermitianOperator& h,
                                                const SparseHermitianOperator& o0,
                                                const OperatorLanczosOptions& options = {},
                                                const EigenSystem* eig = nullptr);

// |theta,phi><theta,phi|.
SparseHermitianOperator build_density_operator(const BlochProductState& state);

// Real amplitudes of d/dt phi_n = b_n phi_{n-1} - b_{n+1} phi_{n+1}, phi_n(0) = delta_{n0};
// result(n, k) is phi_n(times[k]).
RMatrix evolve_operator_wavefunction(const OperatorKrylovDecomposition& okd,
                                     std::span<const double> times);

double bhat_variance(const OperatorKrylovDecomposition& okd);

// CSV "n,b_hat_n".
void write_bhat_csv(std::ostream& out, const OperatorKrylovDecomposition& okd);

}  // namespace krylov
