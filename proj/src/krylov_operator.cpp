#include "krylov/krylov_operator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <type_traits>
#include <ostream>

#include "krylov/errors.hpp"
#include "krylov/krylov_state.hpp"

namespace krylov {

namespace {

// Frequency groups of the initial operator in the energy basis: pairs
// (alpha, beta) with a non-negligible element, grouped by E_alpha - E_beta.
struct FrequencySupport {
  RVector omega;   // one frequency per group
  RVector weight;  // sum of |r_ab|^2 over the group, normalized to 1
};

FrequencySupport frequency_support(const EigenSystem& eig, const CMatrix& o0, double weight_threshold) {
  const CMatrix r = eig.vectors.adjoint() * o0 * eig.vectors;
  const double total = r.squaredNorm();
  const Index d = r.rows();
  std::vector<Index> pairs;
  for (Index k = 0; k < d * d; ++k) {
    if (std::norm(r.data()[k]) > weight_threshold * total) pairs.push_back(k);
  }
  // Column-major: k = alpha + d * beta.
  auto omega = [&](Index k) { return eig.energies(k % d) - eig.energies(k / d); };
  std::stable_sort(pairs.begin(), pairs.end(), [&](Index a, Index b) { return omega(a) < omega(b); });
  const double tol = eig.degeneracy_tolerance > 0.0 ? 2.0 * eig.degeneracy_tolerance : 1e-12;
  std::vector<double> freqs;
  std::vector<double> weights;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    double w = 0.0;
    double first = omega(pairs[i]);
    for (; j < pairs.size() && (j == i || omega(pairs[j]) - omega(pairs[j - 1]) <= tol); ++j) {
      w += std::norm(r.data()[pairs[j]]);
    }
    freqs.push_back(0.5 * (first + omega(pairs[j - 1])));
    weights.push_back(w);
    i = j;
  }
  FrequencySupport fs;
  fs.omega = Eigen::Map<const RVector>(freqs.data(), static_cast<Index>(freqs.size()));
  fs.weight = Eigen::Map<const RVector>(weights.data(), static_cast<Index>(weights.size()));
  fs.weight /= fs.weight.sum();
  return fs;
}

// Lanczos with the same termination rule as the state chain and two-pass
// full reorthogonalization; v0 must be normalized.
template <typename Matrix, typename Apply>
std::pair<std::vector<double>, Matrix> run_chain(Apply&& apply, const typename Matrix::ColXpr::PlainObject& v0,
                                                 Index max_dim, const OperatorLanczosOptions& options) {
  using Vec = std::decay_t<decltype(v0)>;
  Matrix basis(v0.size(), std::min<Index>(max_dim, 16));
  basis.col(0) = v0;
  std::vector<double> bs;
  double b_max = 0.0;
  Index n = 0;
  for (; n + 1 < max_dim; ++n) {
    Vec w = apply(Vec(basis.col(n)));
    if (n > 0) w -= bs.back() * basis.col(n - 1);
    const auto prev = basis.leftCols(n + 1);
    for (int pass = 0; pass < 2; ++pass) w -= prev * (prev.adjoint() * w);
    const double b = w.norm();
    if (b < options.relative_b_threshold * std::max(b_max, 1.0)) break;
    w /= b;
    const double overlap = (prev.adjoint() * w).cwiseAbs().maxCoeff();
    if (overlap > options.orthogonality_tolerance) {
      throw LossOfOrthogonality("operator Krylov basis lost orthogonality at step " + std::to_string(n + 1));
    }
    b_max = std::max(b_max, b);
    bs.push_back(b);
    if (n + 1 >= basis.cols()) {
      basis.conservativeResize(Eigen::NoChange, std::min<Index>(max_dim, 2 * basis.cols()));
    }
    basis.col(n + 1) = w;
  }
  return {std::move(bs), basis.leftCols(n + 1)};
}

}  // namespace

cplx frobenius_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum() / static_cast<double>(a.rows());
}

CMatrix liouvillian_apply(const SparseHermitianOperator& h, const CMatrix& o) {
  // O H = (H O^dagger)^dagger for Hermitian H.
  const CMatrix ho = h.matrix() * o;
  const CMatrix hod = h.matrix() * o.adjoint();
  return ho - hod.adjoint();
}

OperatorKrylovDecomposition liouvillian_lanczos(const SparseHermitianOperator& h, const CMatrix& o0,
                                                const OperatorLanczosOptions& options,
                                                const EigenSystem* eig) {
  if (h.n_sites() > options.max_sites) {
    throw ConfigError("operator Lanczos is limited to N <= " + std::to_string(options.max_sites));
  }
  const Index d = h.dim();
  if (o0.rows() != d || o0.cols() != d) throw ConfigError("operator dimension mismatch");
  if (eig != nullptr && eig->dim() != d) throw ConfigError("eigensystem dimension mismatch");
  const double norm0 = std::sqrt(frobenius_inner(o0, o0).real());
  if (!(norm0 > 0.0) || !std::isfinite(norm0)) throw ConfigError("initial operator has zero norm");

  OperatorKrylovDecomposition okd;
  std::vector<double> bs;
  if (eig != nullptr) {
    // In the energy basis L multiplies element (alpha, beta) by E_alpha - E_beta,
    // so on the frequency groups of o0 it is the diagonal matrix of frequencies.
    const FrequencySupport fs = frequency_support(*eig, o0, options.support_weight_threshold);
    const RVector v0 = fs.weight.cwiseSqrt();
    auto [b, q] = run_chain<RMatrix>([&](const RVector& v) { return RVector(fs.omega.cwiseProduct(v)); },
                                     v0, std::max<Index>(1, fs.omega.size()), options);
    bs = std::move(b);
    okd.dimension = q.cols();
    if (options.keep_basis) {
      // Rebuild O_n = sum_k q(k, n) r_k / ||r_k|| with r_k the group-k part of o0.
      const CMatrix r = eig->vectors.adjoint() * (o0 / norm0) * eig->vectors;
      const double tol = eig->degeneracy_tolerance > 0.0 ? 2.0 * eig->degeneracy_tolerance : 1e-12;
      for (Index n = 0; n < okd.dimension; ++n) {
        CMatrix e = CMatrix::Zero(d, d);
        for (Index a = 0; a < d; ++a) {
          for (Index c = 0; c < d; ++c) {
            const double w = eig->energies(a) - eig->energies(c);
            const Index k = std::min<Index>(
                static_cast<Index>(std::lower_bound(fs.omega.data(), fs.omega.data() + fs.omega.size(), w - tol) -
                                   fs.omega.data()),
                fs.omega.size() - 1);
            if (std::abs(fs.omega(k) - w) > tol || fs.weight(k) == 0.0) continue;
            e(a, c) = r(a, c) * q(k, n) / std::sqrt(fs.weight(k));
          }
        }
        okd.basis.push_back(eig->vectors * e * eig->vectors.adjoint());
      }
    }
  } else {
    // Columns hold vec(O_n) / sqrt(d), so the Euclidean norm matches the
    // normalized trace inner product.
    const Index len = d * d;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const CVector v0 = Eigen::Map<const CVector>(o0.data(), len) * (scale / norm0);
    auto apply = [&](const CVector& v) {
      const CMatrix lo = liouvillian_apply(h, Eigen::Map<const CMatrix>(v.data(), d, d));
      return CVector(Eigen::Map<const CVector>(lo.data(), len));
    };
    auto [b, q] = run_chain<CMatrix>(apply, v0, len - d + 1, options);
    bs = std::move(b);
    okd.dimension = q.cols();
    if (options.keep_basis) {
      for (Index k = 0; k < okd.dimension; ++k) {
        okd.basis.emplace_back(Eigen::Map<const CMatrix>(q.col(k).data(), d, d) / scale);
      }
    }
  }
  okd.b_hat = Eigen::Map<const RVector>(bs.data(), static_cast<Index>(bs.size()));
  return okd;
}

OperatorKrylovDecomposition liouvillian_lanczos(const SparseHermitianOperator& h,
                                                const SparseHermitianOperator& o0,
                                                const OperatorLanczosOptions& options,
                                                const EigenSystem* eig) {
  return liouvillian_lanczos(h, o0.to_dense(), options, eig);
}

SparseHermitianOperator build_density_operator(const BlochProductState& state) {
  const CVector& psi = state.vector;
  const Index d = psi.size();
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(d * d));
  for (Index i = 0; i < d; ++i) {
    if (psi(i) == cplx{0.0, 0.0}) continue;
    triplets.emplace_back(i, i, cplx{std::norm(psi(i)), 0.0});
    for (Index j = i + 1; j < d; ++j) {
      const cplx v = psi(i) * std::conj(psi(j));
      if (v == cplx{0.0, 0.0}) continue;
      triplets.emplace_back(i, j, v);
      triplets.emplace_back(j, i, std::conj(v));
    }
  }
  SparseHermitianOperator::Storage m(d, d);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseHermitianOperator(state.n_sites, std::move(m));
}

RMatrix evolve_operator_wavefunction(const OperatorKrylovDecomposition& okd,
                                     std::span<const double> times) {
  // With psi_n = i^n phi_n the real recursion becomes psi = exp(i T t) e_0,
  // T tridiagonal with zero diagonal and off-diagonal b_hat.
  const TridiagonalPropagator prop(RVector::Zero(okd.dimension), okd.b_hat);
  RMatrix out(okd.dimension, static_cast<Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const CVector psi = prop.amplitudes(times[k]);
    cplx phase{1.0, 0.0};  // i^{-n}
    for (Index n = 0; n < okd.dimension; ++n) {
      out(n, static_cast<Index>(k)) = (phase * psi(n)).real();
      phase *= cplx{0.0, -1.0};
    }
  }
  return out;
}

double bhat_variance(const OperatorKrylovDecomposition& okd) {
  if (okd.b_hat.size() < 1) throw ConfigError("b_hat variance needs an operator Krylov dimension >= 2");
  const double mean = okd.b_hat.mean();
  return (okd.b_hat.array() - mean).square().mean();
}

void write_bhat_csv(std::ostream& out, const OperatorKrylovDecomposition& okd) {
  const auto old = out.precision(17);
  out << "n,b_hat_n\n";
  for (Index k = 0; k < okd.b_hat.size(); ++k) out << k + 1 << ',' << okd.b_hat(k) << '\n';
  out.precision(old);
}

}  // namespace krylov
