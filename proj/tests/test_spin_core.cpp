#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "krylov/errors.hpp"
#include "krylov/spin_core.hpp"

using namespace krylov;

TEST_SUITE("spin_core") {

TEST_CASE("two-site Ising matrix by hand") {
  const double j = 0.7, g = -1.3, h = 0.4;
  const auto op = build_hamiltonian({2, TiltedIsing{j, g, h}});
  const CMatrix m = op.to_dense();
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 0) = -j - 2 * h;
  expected(1, 1) = j;
  expected(2, 2) = j;
  expected(3, 3) = -j + 2 * h;
  for (auto [a, b] : {std::pair{0, 2}, {1, 3}, {0, 1}, {2, 3}}) {
    expected(a, b) = -g;
    expected(b, a) = -g;
  }
  CHECK((m - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(op.is_real());
}

TEST_CASE("two-site XY matrix by hand") {
  const double g = 0.3;
  const CMatrix m = build_hamiltonian({2, XYModel{g}}).to_dense();
  // XX + YY only swaps |01> and |10>.
  CHECK(m(1, 2) == cplx(2.0, 0.0));
  CHECK(m(2, 1) == cplx(2.0, 0.0));
  CHECK(m(0, 0) == cplx(0.0, 0.0));
  CHECK(m(3, 3) == cplx(0.0, 0.0));
  // Y|up> = i|down> on the last site.
  CHECK(m(1, 0) == cplx(0.0, g));
  CHECK(m(0, 1) == cplx(0.0, -g));
  CHECK(m(2, 0) == cplx(0.0, g));
}

TEST_CASE("Hamiltonians are exactly Hermitian") {
  for (int n : {2, 3, 5, 8}) {
    for (const SpinChainSpec& spec :
         {SpinChainSpec{n, TiltedIsing{0.9, -1.1, 0.37}}, SpinChainSpec{n, XYModel{0.61}}}) {
      const CMatrix m = build_hamiltonian(spec).to_dense();
      CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("parity commutes with the open-chain Hamiltonians") {
  for (int n : {3, 6, 9}) {
    const CMatrix p = parity_operator(n).to_dense();
    for (const SpinChainSpec& spec : {testing::chaotic(n), SpinChainSpec{n, XYModel{0.5}}}) {
      const CMatrix h = build_hamiltonian(spec).to_dense();
      CHECK((p * h - h * p).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("even parity sector dimension") {
  for (int n : {4, 5, 10}) {
    const double trace = parity_operator(n).trace().real();
    const double even = (std::pow(2.0, n) + trace) / 2;
    CHECK(even == (std::pow(2.0, n) + std::pow(2.0, (n + 1) / 2)) / 2);
  }
  CHECK((1024 + parity_operator(10).trace().real()) / 2 == 528.0);
}

TEST_CASE("product states") {
  const int n = 5;
  const auto zp = build_product_state(NamedState::ZPlus, n);
  CHECK(std::abs(zp.vector(0) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(zp.vector.tail(31).norm() < 1e-15);
  const auto zm = build_product_state(NamedState::ZMinus, n);
  CHECK(std::abs(std::abs(zm.vector(31)) - 1.0) < 1e-15);

  const auto xp = build_product_state(NamedState::XPlus, n);
  CHECK((xp.vector.array() - cplx(std::pow(2.0, -2.5), 0.0)).abs().maxCoeff() < 1e-15);

  const auto yp = build_product_state(NamedState::YPlus, n);
  const double s = std::sqrt(0.5);
  CHECK(std::abs(yp.vector(1) - std::pow(s, 4) * cplx(0.0, s)) < 1e-15);

  testing::AngleSource src;
  for (int k = 0; k < 20; ++k) {
    const auto [t, p] = src.next();
    CHECK(std::abs(build_product_state(t, p, 7).vector.norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("magnetization of aligned states") {
  const int n = 6;
  CHECK(build_magnetization(Axis::Z, n).expectation(build_product_state(NamedState::ZPlus, n).vector) ==
        doctest::Approx(6.0));
  CHECK(build_magnetization(Axis::X, n).expectation(build_product_state(NamedState::XPlus, n).vector) ==
        doctest::Approx(6.0));
  CHECK(build_magnetization(Axis::Y, n).expectation(build_product_state(NamedState::YPlus, n).vector) ==
        doctest::Approx(6.0));
}

TEST_CASE("analytic energy matches the expectation value") {
  testing::AngleSource src;
  for (int n : {4, 7}) {
    for (const SpinChainSpec& spec : {testing::chaotic(n), SpinChainSpec{n, TiltedIsing{0.8, 0.3, -1.2}},
                                      SpinChainSpec{n, XYModel{0.0}}, SpinChainSpec{n, XYModel{0.7}}}) {
      const auto h = build_hamiltonian(spec);
      for (int k = 0; k < 100; ++k) {
        const auto [t, p] = src.next();
        const double e = h.expectation(build_product_state(t, p, n).vector);
        REQUIRE(std::abs(e - analytic_energy(spec, t, p)) < 1e-10);
      }
    }
  }
}

TEST_CASE("named chaotic energies") {
  const auto spec = testing::chaotic(7);
  CHECK(analytic_energy(spec, 0.0, 0.0) == doctest::Approx(-(7 * 0.5 + 6)));
  CHECK(analytic_energy(spec, std::numbers::pi / 2, 0.0) == doctest::Approx(7 * 1.05));
  CHECK(std::abs(analytic_energy(spec, std::numbers::pi / 2, std::numbers::pi / 2)) < 1e-14);
  CHECK(energy_density(spec, std::numbers::pi / 2, 0.0) == doctest::Approx(1.05));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(build_product_state(-0.1, 0.0, 3), DomainError);
  CHECK_THROWS_AS(build_product_state(3.2, 0.0, 3), DomainError);
  CHECK_THROWS_AS(build_product_state(1.0, 2 * std::numbers::pi, 3), DomainError);
  CHECK_THROWS_AS(build_product_state(1.0, -1e-9, 3), DomainError);
  CHECK_NOTHROW(build_product_state(std::numbers::pi, 0.0, 3));
  CHECK_THROWS_AS(build_hamiltonian({1, TiltedIsing{}}), ConfigError);
  CHECK_THROWS_AS(build_hamiltonian({21, TiltedIsing{}}), ConfigError);
  CHECK_THROWS_AS(build_hamiltonian({4, TiltedIsing{std::nan(""), 1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(parse_named_state("W+"), ConfigError);
  const PauliTerm bad{1.0, {{3, Pauli::X}}};
  CHECK_THROWS_AS(SparseHermitianOperator::from_pauli_terms(3, std::span(&bad, 1)), ConfigError);
  SparseHermitianOperator::Storage m(2, 2);
  m.insert(0, 1) = cplx(1.0, 0.0);
  CHECK_THROWS_AS(SparseHermitianOperator(1, m), ConfigError);
}

TEST_CASE("named states round trip") {
  for (const NamedState s : {NamedState::XPlus, NamedState::YPlus, NamedState::ZPlus, NamedState::ZMinus}) {
    CHECK(parse_named_state(to_string(s)) == s);
  }
}

TEST_CASE("integrability flag") {
  CHECK_FALSE(testing::chaotic(4).integrable());
  CHECK(testing::integrable(4).integrable());
  CHECK(SpinChainSpec{4, XYModel{0.2}}.integrable());
}

TEST_CASE("triplet export") {
  const auto z = build_magnetization(Axis::Z, 1);
  std::ostringstream out;
  z.write_triplets(out);
  CHECK(out.str() == "0 0 1 0\n1 1 -1 0\n");
  CHECK(SparseHermitianOperator::identity(3).trace() == cplx(8.0, 0.0));
}

}
