#pragma once

#include <numbers>
#include <random>

#include "krylov/spectral.hpp"
#include "krylov/spin_core.hpp"

namespace testing {

inline krylov::SpinChainSpec chaotic(int n) { return {n, krylov::TiltedIsing{}}; }
inline krylov::SpinChainSpec integrable(int n) { return {n, krylov::TiltedIsing{1.0, -1.05, 0.0}}; }

// Fixed-seed angles, theta in [0, pi] and phi in [0, 2 pi).
struct AngleSource {
  std::mt19937_64 rng{20240611};
  std::uniform_real_distribution<double> theta{0.0, std::numbers::pi};
  std::uniform_real_distribution<double> phi{0.0, 2 * std::numbers::pi};
  std::pair<double, double> next() { return {theta(rng), phi(rng)}; }
};

inline krylov::SparseHermitianOperator diagonal_operator(int n_sites, const std::vector<double>& values) {
  const krylov::Index dim = krylov::Index{1} << n_sites;
  krylov::SparseHermitianOperator::Storage m(dim, dim);
  for (krylov::Index k = 0; k < dim; ++k) m.insert(k, k) = values[static_cast<std::size_t>(k)];
  return {n_sites, std::move(m)};
}

}  // namespace testing
