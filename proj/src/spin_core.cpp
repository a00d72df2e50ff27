#include "krylov/spin_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "krylov/errors.hpp"

namespace krylov {

namespace {

constexpr int kMaxSites = 20;

std::uint64_t site_mask(int n_sites, int site) {
  return std::uint64_t{1} << (n_sites - 1 - site);
}

void check_sites(int n_sites, int minimum) {
  if (n_sites < minimum || n_sites > kMaxSites) {
    std::ostringstream msg;
    msg << "n_sites must be in [" << minimum << ", " << kMaxSites << "], got " << n_sites;
    throw ConfigError(msg.str());
  }
}

// Applies a single Pauli string to a basis state; returns the image state and
// the amplitude picked up along the way.
std::pair<std::uint64_t, cplx> apply_string(int n_sites, const PauliTerm& term,
                                            std::uint64_t state) {
  cplx amp{term.coefficient, 0.0};
  for (auto it = term.factors.rbegin(); it != term.factors.rend(); ++it) {
    const auto [site, op] = *it;
    const std::uint64_t mask = site_mask(n_sites, site);
    const bool down = (state & mask) != 0;
    switch (op) {
      case Pauli::I:
        break;
      case Pauli::X:
        state ^= mask;
        break;
      case Pauli::Y:
        amp *= down ? cplx{0.0, -1.0} : cplx{0.0, 1.0};
        state ^= mask;
        break;
      case Pauli::Z:
        if (down) amp = -amp;
        break;
    }
  }
  return {state, amp};
}

}  // namespace

void SpinChainSpec::validate() const {
  check_sites(n_sites, 2);
  const bool finite = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, TiltedIsing>) {
          return std::isfinite(m.j) && std::isfinite(m.g) && std::isfinite(m.h);
        } else {
          return std::isfinite(m.g);
        }
      },
      model);
  if (!finite) throw ConfigError("model couplings must be finite");
}

bool SpinChainSpec::integrable() const {
  if (const auto* ising = std::get_if<TiltedIsing>(&model)) {
    return ising->g * ising->h == 0.0;
  }
  return true;
}

std::string SpinChainSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  if (const auto* ising = std::get_if<TiltedIsing>(&model)) {
    out << "ising N=" << n_sites << " J=" << ising->j << " g=" << ising->g << " h=" << ising->h;
  } else {
    out << "xy N=" << n_sites << " g=" << std::get<XYModel>(model).g;
  }
  return out.str();
}

SparseHermitianOperator::SparseHermitianOperator(int n_sites, Storage matrix)
    : n_sites_(n_sites), matrix_(std::move(matrix)) {
  const Index expected = Index{1} << n_sites_;
  if (matrix_.rows() != expected || matrix_.cols() != expected) {
    throw ConfigError("operator dimension does not match 2^n_sites");
  }
  matrix_.makeCompressed();
  for (Index r = 0; r < matrix_.outerSize(); ++r) {
    for (Storage::InnerIterator it(matrix_, r); it; ++it) {
      if (entry(it.col(), it.row()) != std::conj(it.value())) {
        throw ConfigError("operator is not Hermitian");
      }
    }
  }
}

SparseHermitianOperator SparseHermitianOperator::from_pauli_terms(
    int n_sites, std::span<const PauliTerm> terms) {
  check_sites(n_sites, 1);
  for (const auto& term : terms) {
    for (const auto& [site, op] : term.factors) {
      if (site < 0 || site >= n_sites) throw ConfigError("Pauli factor site out of range");
    }
  }
  const Index dim = Index{1} << n_sites;
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (terms.size() + 1) / 2);
  std::vector<std::pair<std::uint64_t, cplx>> column;
  for (Index s = 0; s < dim; ++s) {
    column.clear();
    for (const auto& term : terms) {
      column.push_back(apply_string(n_sites, term, static_cast<std::uint64_t>(s)));
    }
    // Stable sort keeps the term order inside each row, so the summation order
    // for (r, c) mirrors the one for (c, r) and Hermiticity is exact.
    std::stable_sort(column.begin(), column.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < column.size();) {
      cplx sum{0.0, 0.0};
      std::size_t l = k;
      for (; l < column.size() && column[l].first == column[k].first; ++l) sum += column[l].second;
      if (sum != cplx{0.0, 0.0}) {
        triplets.emplace_back(static_cast<Index>(column[k].first), s, sum);
      }
      k = l;
    }
  }
  Storage m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseHermitianOperator(n_sites, std::move(m));
}

SparseHermitianOperator SparseHermitianOperator::identity(int n_sites) {
  const PauliTerm one{1.0, {}};
  return from_pauli_terms(n_sites, std::span(&one, 1));
}

CVector SparseHermitianOperator::apply(const CVector& x) const {
  if (x.size() != dim()) throw ConfigError("vector dimension mismatch");
  return matrix_ * x;
}

double SparseHermitianOperator::expectation(const CVector& psi) const {
  return psi.dot(apply(psi)).real();
}

cplx SparseHermitianOperator::entry(Index row, Index col) const {
  return matrix_.coeff(row, col);
}

bool SparseHermitianOperator::is_real() const {
  for (Index k = 0; k < matrix_.nonZeros(); ++k) {
    if (matrix_.valuePtr()[k].imag() != 0.0) return false;
  }
  return true;
}

double SparseHermitianOperator::max_abs_entry() const {
  double m = 0.0;
  for (Index k = 0; k < matrix_.nonZeros(); ++k) m = std::max(m, std::abs(matrix_.valuePtr()[k]));
  return m;
}

cplx SparseHermitianOperator::trace() const {
  cplx t{0.0, 0.0};
  for (Index r = 0; r < dim(); ++r) t += entry(r, r);
  return t;
}

CMatrix SparseHermitianOperator::to_dense() const { return CMatrix(matrix_); }

void SparseHermitianOperator::write_triplets(std::ostream& out) const {
  const auto old = out.precision(17);
  for (Index r = 0; r < matrix_.outerSize(); ++r) {
    for (Storage::InnerIterator it(matrix_, r); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
          << '\n';
    }
  }
  out.precision(old);
}

std::pair<double, double> bloch_angles(NamedState state) {
  constexpr double pi = std::numbers::pi;
  switch (state) {
    case NamedState::XPlus:
      return {pi / 2, 0.0};
    case NamedState::YPlus:
      return {pi / 2, pi / 2};
    case NamedState::ZPlus:
      return {0.0, 0.0};
    case NamedState::ZMinus:
      return {pi, 0.0};
  }
  return {0.0, 0.0};
}

NamedState parse_named_state(const std::string& name) {
  if (name == "X+") return NamedState::XPlus;
  if (name == "Y+") return NamedState::YPlus;
  if (name == "Z+") return NamedState::ZPlus;
  if (name == "Z-") return NamedState::ZMinus;
  throw ConfigError("unknown state '" + name + "' (expected X+, Y+, Z+ or Z-)");
}

std::string to_string(NamedState state) {
  switch (state) {
    case NamedState::XPlus:
      return "X+";
    case NamedState::YPlus:
      return "Y+";
    case NamedState::ZPlus:
      return "Z+";
    case NamedState::ZMinus:
      return "Z-";
  }
  return "?";
}

SparseHermitianOperator build_hamiltonian(const SpinChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  std::vector<PauliTerm> terms;
  if (const auto* ising = std::get_if<TiltedIsing>(&spec.model)) {
    for (int i = 0; i + 1 < n; ++i) terms.push_back({-ising->j, {{i, Pauli::Z}, {i + 1, Pauli::Z}}});
    for (int i = 0; i < n; ++i) {
      terms.push_back({-ising->g, {{i, Pauli::X}}});
      terms.push_back({-ising->h, {{i, Pauli::Z}}});
    }
  } else {
    const double g = std::get<XYModel>(spec.model).g;
    for (int i = 0; i + 1 < n; ++i) {
      terms.push_back({1.0, {{i, Pauli::X}, {i + 1, Pauli::X}}});
      terms.push_back({1.0, {{i, Pauli::Y}, {i + 1, Pauli::Y}}});
    }
    for (int i = 0; i < n; ++i) terms.push_back({g, {{i, Pauli::Y}}});
  }
  return SparseHermitianOperator::from_pauli_terms(n, terms);
}

SparseHermitianOperator build_magnetization(Axis axis, int n_sites) {
  const Pauli p = axis == Axis::X ? Pauli::X : axis == Axis::Y ? Pauli::Y : Pauli::Z;
  std::vector<PauliTerm> terms;
  for (int i = 0; i < n_sites; ++i) terms.push_back({1.0, {{i, p}}});
  return SparseHermitianOperator::from_pauli_terms(n_sites, terms);
}

SparseHermitianOperator parity_operator(int n_sites) {
  check_sites(n_sites, 2);
  const Index dim = Index{1} << n_sites;
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim));
  for (Index s = 0; s < dim; ++s) {
    Index r = 0;
    for (int i = 0; i < n_sites; ++i) {
      if (s & (Index{1} << i)) r |= Index{1} << (n_sites - 1 - i);
    }
    triplets.emplace_back(r, s, cplx{1.0, 0.0});
  }
  SparseHermitianOperator::Storage m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseHermitianOperator(n_sites, std::move(m));
}

BlochProductState build_product_state(double theta, double phi, int n_sites) {
  check_sites(n_sites, 1);
  constexpr double pi = std::numbers::pi;
  if (!(theta >= 0.0 && theta <= pi)) throw DomainError("theta must lie in [0, pi]");
  if (!(phi >= 0.0 && phi < 2 * pi)) throw DomainError("phi must lie in [0, 2 pi)");

  const cplx up{std::cos(theta / 2), 0.0};
  const cplx down = std::polar(std::sin(theta / 2), phi);
  // Amplitude depends only on the number of down spins.
  std::vector<cplx> by_count(static_cast<std::size_t>(n_sites) + 1);
  for (int k = 0; k <= n_sites; ++k) {
    cplx a{1.0, 0.0};
    for (int i = 0; i < n_sites; ++i) a *= (i < k) ? down : up;
    by_count[static_cast<std::size_t>(k)] = a;
  }
  const Index dim = Index{1} << n_sites;
  CVector v(dim);
  for (Index s = 0; s < dim; ++s) {
    v(s) = by_count[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(s)))];
  }
  return {theta, phi, n_sites, std::move(v)};
}

BlochProductState build_product_state(NamedState state, int n_sites) {
  const auto [theta, phi] = bloch_angles(state);
  return build_product_state(theta, phi, n_sites);
}

double analytic_energy(const SpinChainSpec& spec, double theta, double phi) {
  const double n = spec.n_sites;
  if (const auto* ising = std::get_if<TiltedIsing>(&spec.model)) {
    const double c = std::cos(theta);
    return -c * (n * ising->h + (n - 1) * ising->j * c) - n * ising->g * std::cos(phi) * std::sin(theta);
  }
  const double g = std::get<XYModel>(spec.model).g;
  const double s = std::sin(theta);
  return s * ((n - 1) * s + n * g * std::sin(phi));
}

double energy_density(const SpinChainSpec& spec, double theta, double phi) {
  return analytic_energy(spec, theta, phi) / spec.n_sites;
}

}  // namespace krylov
