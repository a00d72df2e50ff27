#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "krylov/errors.hpp"
#include "krylov/krylov_operator.hpp"

using namespace krylov;

TEST_SUITE("krylov_operator") {

TEST_CASE("single qubit: sigma_z generates a two-step chain from sigma_x") {
  const auto z = build_magnetization(Axis::Z, 1);
  const auto x = build_magnetization(Axis::X, 1);
  OperatorLanczosOptions options;
  options.keep_basis = true;
  const auto okd = liouvillian_lanczos(z, x, options);
  REQUIRE(okd.dimension == 2);
  CHECK(okd.b_hat(0) == doctest::Approx(2.0));
  // Second basis operator is proportional to sigma_y.
  const CMatrix y = build_magnetization(Axis::Y, 1).to_dense();
  CHECK(std::abs(std::abs(frobenius_inner(y, okd.basis[1])) - 1.0) < 1e-14);
}

TEST_CASE("an operator commuting with H does not grow") {
  const auto h = build_hamiltonian(testing::chaotic(4));
  CHECK(liouvillian_lanczos(h, h).dimension == 1);
  const EigenSystem eig = diagonalize(h);
  const auto okd = liouvillian_lanczos(h, h, {}, &eig);
  CHECK(okd.dimension == 1);
  CHECK(okd.b_hat.size() == 0);
  CHECK_THROWS_AS(bhat_variance(okd), ConfigError);
}

TEST_CASE("density operator") {
  const auto up = build_density_operator(build_product_state(0.0, 0.0, 3));
  CHECK(up.nonzeros() == 1);
  CHECK(up.entry(0, 0) == cplx(1.0, 0.0));

  const int n = 4;
  const auto state = build_product_state(1.1, 2.4, n);
  const auto rho = build_density_operator(state);
  const CMatrix r = rho.to_dense();
  CHECK(std::abs(rho.trace() - cplx(1.0, 0.0)) < 1e-12);
  CHECK((r * r - r).cwiseAbs().maxCoeff() < 1e-12);
  const auto spec = testing::chaotic(n);
  const CMatrix h = build_hamiltonian(spec).to_dense();
  CHECK(std::abs((r * h).trace().real() - analytic_energy(spec, 1.1, 2.4)) < 1e-12);
}

TEST_CASE("density operator chain: orthonormal, positive, bounded") {
  const int n = 3;
  const auto h = build_hamiltonian(testing::chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const auto rho = build_density_operator(build_product_state(0.9, 1.3, n));
  OperatorLanczosOptions options;
  options.keep_basis = true;
  const auto okd = liouvillian_lanczos(h, rho, options, &eig);
  const Index d = 8;
  CHECK(okd.dimension <= d * d - d + 1);
  CHECK(okd.dimension > 1);
  CHECK((okd.b_hat.array() > 0.0).all());
  double worst = 0.0;
  for (Index i = 0; i < okd.dimension; ++i) {
    for (Index j = 0; j < okd.dimension; ++j) {
      const cplx ip = frobenius_inner(okd.basis[static_cast<std::size_t>(i)],
                                      okd.basis[static_cast<std::size_t>(j)]);
      worst = std::max(worst, std::abs(ip - cplx(i == j ? 1.0 : 0.0, 0.0)));
    }
  }
  CHECK(worst < 1e-8);
  // Commutators of Hermitian operators alternate between Hermitian and anti-Hermitian.
  for (Index k = 0; k < okd.dimension; ++k) {
    const CMatrix& o = okd.basis[static_cast<std::size_t>(k)];
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    CHECK((o.adjoint() - sign * o).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("the frequency projection does not change a clean chain") {
  const int n = 3;
  const auto h = build_hamiltonian(testing::chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const auto rho = build_density_operator(build_product_state(2.0, 0.3, n));
  const auto plain = liouvillian_lanczos(h, rho);
  const auto projected = liouvillian_lanczos(h, rho, {}, &eig);
  const Index common = std::min<Index>(20, std::min(plain.b_hat.size(), projected.b_hat.size()));
  CHECK((plain.b_hat.head(common) - projected.b_hat.head(common)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("operator wavefunction stays real and normalized") {
  const int n = 3;
  const auto h = build_hamiltonian(testing::chaotic(n));
  const EigenSystem eig = diagonalize(h);
  const auto okd =
      liouvillian_lanczos(h, build_density_operator(build_product_state(1.2, 0.5, n)), {}, &eig);
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(0.01 * k);
  const RMatrix phi = evolve_operator_wavefunction(okd, times);
  for (Index k = 0; k < phi.cols(); ++k) CHECK(std::abs(phi.col(k).squaredNorm() - 1.0) < 1e-12);
  CHECK(phi(0, 0) == doctest::Approx(1.0));
  // Central difference of d/dt phi_n = b_n phi_{n-1} - b_{n+1} phi_{n+1}.
  const double dt = 0.01;
  auto b = [&](Index m) { return (m >= 1 && m < okd.dimension) ? okd.b_hat(m - 1) : 0.0; };
  double worst = 0.0;
  for (Index k = 1; k + 1 < phi.cols(); ++k) {
    for (Index m = 0; m < okd.dimension; ++m) {
      const double lhs = (phi(m, k + 1) - phi(m, k - 1)) / (2 * dt);
      double rhs = 0.0;
      if (m > 0) rhs += b(m) * phi(m - 1, k);
      if (m + 1 < okd.dimension) rhs -= b(m + 1) * phi(m + 1, k);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("guards") {
  const auto h8 = build_hamiltonian(testing::chaotic(8));
  CHECK_THROWS_AS(liouvillian_lanczos(h8, h8), ConfigError);
  const auto h3 = build_hamiltonian(testing::chaotic(3));
  CHECK_THROWS_AS(liouvillian_lanczos(h3, CMatrix::Zero(8, 8)), ConfigError);
  CHECK_THROWS_AS(liouvillian_lanczos(h3, CMatrix::Identity(4, 4)), ConfigError);
}

TEST_CASE("variance and export") {
  OperatorKrylovDecomposition okd;
  okd.dimension = 3;
  okd.b_hat = RVector(2);
  okd.b_hat << 1.0, 3.0;
  CHECK(bhat_variance(okd) == doctest::Approx(1.0));
  std::ostringstream out;
  write_bhat_csv(out, okd);
  CHECK(out.str() == "n,b_hat_n\n1,1\n2,3\n");
}

}
