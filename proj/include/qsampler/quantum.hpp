#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qs::quantum {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;

/// Hermitian, unit-trace operator on n qubits.
///
/// Constructed states are checked for positivity on construction. States
/// reconstructed from sampled outcome frequencies may carry small negative
/// eigenvalues; `from_reconstruction` keeps them and sets `psd()` to false.
class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
  DensityMatrix(int n_qubits, CMatrix entries);

  /// Validates Hermiticity and unit trace only; records positivity as a flag.
  static DensityMatrix from_reconstruction(int n_qubits, CMatrix entries);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  bool psd() const { return psd_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  DensityMatrix(int n_qubits, CMatrix entries, bool require_psd);

  int n_qubits_;
  CMatrix entries_;
  bool psd_ = true;
  double min_eigenvalue_ = 0.0;
};

/// Probabilities over the 4^n tetrahedral outcomes. The flat index is
/// a_1 * 4^(n-1) + ... + a_n, i.e. the first qubit is most significant.
class OutcomeDistribution {
 public:
  OutcomeDistribution(int n_qubits, std::vector<double> probs);

  int n_qubits() const { return n_qubits_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

 private:
  int n_qubits_;
  std::vector<double> probs_;
};

/// Hermitian operator on n qubits.
class Observable {
 public:
  Observable(int n_qubits, CMatrix entries);

  int n_qubits() const { return n_qubits_; }
  const CMatrix& entries() const { return entries_; }

 private:
  int n_qubits_;
  CMatrix entries_;
};

/// Single-qubit tetrahedral POVM together with the inverse overlap matrix.
struct TetrahedralPovm {
  std::array<Eigen::Vector3d, 4> bloch_vectors;
  std::array<Eigen::Matrix2cd, 4> elements;
  /// Tr[M_a M_a'].
  Eigen::Matrix4d overlap;
  Eigen::Matrix4d overlap_inverse;
  /// Dual operators Q_a = sum_a' Tinv(a,a') M_a'. Reconstruction of an
  /// n-qubit state uses tensor products of these.
  std::array<Eigen::Matrix2cd, 4> duals;
};

TetrahedralPovm make_tetrahedral_povm();

/// Shared immutable instance.
const TetrahedralPovm& tetrahedral_povm();

// --- states -----------------------------------------------------------------

DensityMatrix bell_state();
/// r * rho_B + (1 - r) * 1/4, r in [0, 1].
DensityMatrix werner_state(double r);
/// (|0...0> + |1...1>)/sqrt(2) on n >= 2 qubits.
DensityMatrix ghz_state(int n);
DensityMatrix maximally_mixed(int n_qubits);

Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

/// Kronecker product.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// --- POVM maps ----------------------------------------------------------------

/// P(a) = Tr[rho (M_a1 x ... x M_an)].
OutcomeDistribution born_distribution(const DensityMatrix& rho, const TetrahedralPovm& povm);

/// rho = sum_a P(a) Q_a. Positivity is not enforced (see DensityMatrix).
DensityMatrix reconstruct_density(const OutcomeDistribution& p, const TetrahedralPovm& povm);

/// Coefficients Q^O_a with <O> = sum_a Q^O_a P(a).
std::vector<double> observable_coefficients(const Observable& obs, const TetrahedralPovm& povm);

/// <O> evaluated directly on the outcome distribution.
double expectation(const OutcomeDistribution& p, const Observable& obs, const TetrahedralPovm& povm);

/// cos(theta) sigma_z + sin(theta) sigma_x.
Eigen::Matrix2cd measurement_axis(double theta);

/// CHSH combination E(A1,B1) + E(A2,B1) + E(A1,B2) - E(A2,B2) with
/// A1 = sigma_z, A2 = sigma_x, B1 = O(theta), B2 = O(-theta).
double bell_witness(const OutcomeDistribution& p, double theta);

/// Same combination as a 4x4 operator; used to cross-check bell_witness.
Observable chsh_operator(double theta);

// --- distances ----------------------------------------------------------------

/// Tr sqrt(sqrt(a) b sqrt(a)). `a` must be PSD; `b` may be a non-PSD
/// reconstruction. Negative eigenvalues of the inner product are clamped.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// sum p*(v) ln(p*(v)/p(v)); +infinity when p(v) = 0 < p*(v).
double dkl(std::span<const double> target, std::span<const double> model);

inline bool is_infinite(double x) { return x == std::numeric_limits<double>::infinity(); }

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [-1e-10, 0) are clamped; anything more negative throws.
CMatrix psd_sqrt(const CMatrix& m);

}  // namespace qs::quantum
