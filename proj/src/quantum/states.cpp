#include "qsampler/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qs::quantum {
namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kReconstructedTraceTol = 1e-9;
constexpr double kPsdTol = 1e-10;

std::size_t dim_for(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 12) {
    throw std::invalid_argument("n_qubits out of range: " + std::to_string(n_qubits));
  }
  return std::size_t{1} << n_qubits;
}

void check_square(int n_qubits, const CMatrix& m, const char* what) {
  const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
  if (m.rows() != d || m.cols() != d) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(d) + "x" +
                                std::to_string(d) + " matrix, got " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()));
  }
}

void check_hermitian(const CMatrix& m, const char* what) {
  const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermitianTol) {
    throw std::invalid_argument(std::string(what) + " is not Hermitian (max deviation " +
                                std::to_string(dev) + ")");
  }
}

}  // namespace

DensityMatrix::DensityMatrix(int n_qubits, CMatrix entries)
    : DensityMatrix(n_qubits, std::move(entries), true) {}

DensityMatrix DensityMatrix::from_reconstruction(int n_qubits, CMatrix entries) {
  return DensityMatrix(n_qubits, std::move(entries), false);
}

DensityMatrix::DensityMatrix(int n_qubits, CMatrix entries, bool require_psd)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
  check_square(n_qubits_, entries_, "density matrix");
  check_hermitian(entries_, "density matrix");
  const double tr = entries_.trace().real();
  const double tol = require_psd ? kTraceTol : kReconstructedTraceTol;
  if (std::abs(tr - 1.0) > tol) {
    throw std::invalid_argument("density matrix trace " + std::to_string(tr) + " != 1");
  }
  const CMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  min_eigenvalue_ = es.eigenvalues().minCoeff();
  psd_ = min_eigenvalue_ >= -kPsdTol;
  if (require_psd && !psd_) {
    throw std::invalid_argument("density matrix is not positive semidefinite (min eigenvalue " +
                                std::to_string(min_eigenvalue_) + ")");
  }
}

OutcomeDistribution::OutcomeDistribution(int n_qubits, std::vector<double> probs)
    : n_qubits_(n_qubits), probs_(std::move(probs)) {
  const std::size_t d = dim_for(n_qubits);
  if (probs_.size() != d * d) {
    throw std::invalid_argument("outcome distribution for " + std::to_string(n_qubits) +
                                " qubits needs " + std::to_string(d * d) + " entries, got " +
                                std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN outcome probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument("outcome probabilities sum to " + std::to_string(sum));
  }
}

Observable::Observable(int n_qubits, CMatrix entries)
    : n_qubits_(n_qubits), entries_(std::move(entries)) {
  check_square(n_qubits_, entries_, "observable");
  check_hermitian(entries_, "observable");
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DensityMatrix ghz_state(int n) {
  if (n < 2) throw std::domain_error("GHZ state needs n >= 2, got " + std::to_string(n));
  const auto d = static_cast<Eigen::Index>(dim_for(n));
  CMatrix rho = CMatrix::Zero(d, d);
  rho(0, 0) = rho(0, d - 1) = rho(d - 1, 0) = rho(d - 1, d - 1) = 0.5;
  return DensityMatrix(n, std::move(rho));
}

DensityMatrix bell_state() { return ghz_state(2); }

DensityMatrix maximally_mixed(int n_qubits) {
  const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
  return DensityMatrix(n_qubits, CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix werner_state(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("Werner mixing r must lie in [0, 1], got " + std::to_string(r));
  }
  CMatrix rho = CMatrix::Zero(4, 4);
  rho(0, 0) = rho(3, 3) = (1.0 + r) / 4.0;
  rho(1, 1) = rho(2, 2) = (1.0 - r) / 4.0;
  rho(0, 3) = rho(3, 0) = 2.0 * r / 4.0;
  return DensityMatrix(2, std::move(rho));
}

}  // namespace qs::quantum
