#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "krylov/types.hpp"

namespace krylov {

// H = -J sum_i Z_i Z_{i+1} - sum_i (g X_i + h Z_i), open chain.
struct TiltedIsing {
  double j = 1.0;
  double g = -1.05;
  double h = 0.5;
};

// H = sum_i (X_i X_{i+1} + Y_i Y_{i+1}) + g sum_i Y_i, open chain.
struct XYModel {
  double g = 0.0;
};

struct SpinChainSpec {
  int n_sites = 10;
  std::variant<TiltedIsing, XYModel> model = TiltedIsing{};

  void validate() const;
  bool integrable() const;
  std::string describe() const;
};

enum class Pauli : std::uint8_t { I, X, Y, Z };
enum class Axis : std::uint8_t { X, Y, Z };

// Real coefficient times a product of single-site Pauli matrices.
struct PauliTerm {
  double coefficient = 1.0;
  std::vector<std::pair<int, Pauli>> factors;
};

// Hermitian operator on the 2^N dimensional spin Hilbert space.
//
// Basis states are indexed in the computational z basis with site 0 as the
// most significant bit; bit value 0 is |Z+> and 1 is |Z->. Entries are kept
// in row-major compressed form, so iteration order is (row, col) sorted.
class SparseHermitianOperator {
 public:
  using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

  SparseHermitianOperator() = default;

  // Throws ConfigError when the matrix is not exactly Hermitian.
  SparseHermitianOperator(int n_sites, Storage matrix);

  static SparseHermitianOperator from_pauli_terms(int n_sites,
                                                  std::span<const PauliTerm> terms);
  static SparseHermitianOperator identity(int n_sites);

  int n_sites() const { return n_sites_; }
  Index dim() const { return matrix_.rows(); }
  Index nonzeros() const { return matrix_.nonZeros(); }
  const Storage& matrix() const { return matrix_; }

  CVector apply(const CVector& x) const;
  double expectation(const CVector& psi) const;
  cplx entry(Index row, Index col) const;
  bool is_real() const;
  double max_abs_entry() const;
  cplx trace() const;
  CMatrix to_dense() const;

  // One "row col re im" line per stored entry, (row, col) ascending.
  void write_triplets(std::ostream& out) const;

 private:
  int n_sites_ = 0;
  Storage matrix_;
};

struct BlochProductState {
  double theta = 0.0;
  double phi = 0.0;
  int n_sites = 0;
  CVector vector;
};

enum class NamedState : std::uint8_t { XPlus, YPlus, ZPlus, ZMinus };

// (theta, phi) of a named uniform product state.
std::pair<double, double> bloch_angles(NamedState state);
NamedState parse_named_state(const std::string& name);
std::string to_string(NamedState state);

SparseHermitianOperator build_hamiltonian(const SpinChainSpec& spec);
SparseHermitianOperator build_magnetization(Axis axis, int n_sites);

// Site reflection i -> N-1-i as a permutation matrix.
SparseHermitianOperator parity_operator(int n_sites);

// Requires theta in [0, pi] and phi in [0, 2 pi); throws DomainError otherwise.
BlochProductState build_product_state(double theta, double phi, int n_sites);
BlochProductState build_product_state(NamedState state, int n_sites);

// <theta,phi|H|theta,phi> in closed form.
double analytic_energy(const SpinChainSpec& spec, double theta, double phi);
double energy_density(const SpinChainSpec& spec, double theta, double phi);

}  // namespace krylov
