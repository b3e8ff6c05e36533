#include "qsampler/quantum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qs::quantum {
namespace {

std::size_t pow4(int n) { return std::size_t{1} << (2 * n); }

// Product operator M_a1 x ... x M_an (or Q_a1 x ...) for flat outcome index.
CMatrix product_operator(const std::array<Eigen::Matrix2cd, 4>& ops, int n_qubits,
                         std::size_t index) {
  CMatrix out = CMatrix::Ones(1, 1);
  for (int q = 0; q < n_qubits; ++q) {
    const std::size_t a = (index >> (2 * (n_qubits - 1 - q))) & 3u;
    out = kron(out, ops[a]);
  }
  return out;
}

// Applies a 4x4 matrix along every qubit axis of a 4^n tensor stored flat.
std::vector<double> apply_per_qubit(const Eigen::Matrix4d& m, std::vector<double> t, int n_qubits) {
  std::vector<double> next(t.size());
  for (int q = 0; q < n_qubits; ++q) {
    const std::size_t stride = std::size_t{1} << (2 * (n_qubits - 1 - q));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t a = (i / stride) & 3u;
      const std::size_t base = i - a * stride;
      double acc = 0.0;
      for (std::size_t b = 0; b < 4; ++b) acc += m(a, b) * t[base + b * stride];
      next[i] = acc;
    }
    t.swap(next);
  }
  return t;
}

}  // namespace

TetrahedralPovm make_tetrahedral_povm() {
  TetrahedralPovm povm;
  const double s2 = std::numbers::sqrt2;
  const double s6 = std::sqrt(6.0);
  povm.bloch_vectors[0] = Eigen::Vector3d(0.0, 0.0, 1.0);
  povm.bloch_vectors[1] = Eigen::Vector3d(2.0 * s2, 0.0, -1.0) / 3.0;
  povm.bloch_vectors[2] = Eigen::Vector3d(-s2, s6, -1.0) / 3.0;
  povm.bloch_vectors[3] = Eigen::Vector3d(-s2, -s6, -1.0) / 3.0;

  const Eigen::Matrix2cd sx = pauli_x(), sy = pauli_y(), sz = pauli_z();
  for (std::size_t a = 0; a < 4; ++a) {
    const auto& s = povm.bloch_vectors[a];
    povm.elements[a] =
        (Eigen::Matrix2cd::Identity() + s.x() * sx + s.y() * sy + s.z() * sz) / 4.0;
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      povm.overlap(a, b) = (povm.elements[a] * povm.elements[b]).trace().real();
    }
  }
  // The inverse is the integer matrix 6*I - J; snap the numerical inverse onto it.
  povm.overlap_inverse = povm.overlap.inverse();
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      povm.overlap_inverse(i, j) = std::round(povm.overlap_inverse(i, j));
    }
  }
  for (std::size_t a = 0; a < 4; ++a) {
    povm.duals[a].setZero();
    for (std::size_t b = 0; b < 4; ++b) {
      povm.duals[a] += povm.overlap_inverse(a, b) * povm.elements[b];
    }
  }
  return povm;
}

const TetrahedralPovm& tetrahedral_povm() {
  static const TetrahedralPovm povm = make_tetrahedral_povm();
  return povm;
}

OutcomeDistribution born_distribution(const DensityMatrix& rho, const TetrahedralPovm& povm) {
  const int n = rho.n_qubits();
  std::vector<double> probs(pow4(n));
  const CMatrix& r = rho.entries();
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const CMatrix m = product_operator(povm.elements, n, i);
    // Tr[rho M] = sum_jk rho_jk M_kj
    const double p = (r.cwiseProduct(m.transpose())).sum().real();
    probs[i] = p < 0.0 ? 0.0 : p;
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return OutcomeDistribution(n, std::move(probs));
}

DensityMatrix reconstruct_density(const OutcomeDistribution& p, const TetrahedralPovm& povm) {
  const int n = p.n_qubits();
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
  CMatrix rho = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    rho += p[i] * product_operator(povm.duals, n, i);
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::from_reconstruction(n, std::move(rho));
}

std::vector<double> observable_coefficients(const Observable& obs, const TetrahedralPovm& povm) {
  const int n = obs.n_qubits();
  std::vector<double> traces(pow4(n));
  const CMatrix& o = obs.entries();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const CMatrix m = product_operator(povm.elements, n, i);
    traces[i] = (o.cwiseProduct(m.transpose())).sum().real();
  }
  return apply_per_qubit(povm.overlap_inverse, std::move(traces), n);
}

double expectation(const OutcomeDistribution& p, const Observable& obs, const TetrahedralPovm& povm) {
  if (p.n_qubits() != obs.n_qubits()) {
    throw std::invalid_argument("expectation: distribution has " + std::to_string(p.n_qubits()) +
                                " qubits, observable " + std::to_string(obs.n_qubits()));
  }
  const auto q = observable_coefficients(obs, povm);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] * p[i];
  return acc;
}

Eigen::Matrix2cd measurement_axis(double theta) {
  return std::cos(theta) * pauli_z() + std::sin(theta) * pauli_x();
}

namespace {

double correlator(const OutcomeDistribution& p, const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  return expectation(p, Observable(2, kron(a, b)), tetrahedral_povm());
}

}  // namespace

double bell_witness(const OutcomeDistribution& p, double theta) {
  if (p.n_qubits() != 2) {
    throw std::invalid_argument("bell_witness needs a two-qubit distribution, got " +
                                std::to_string(p.n_qubits()) + " qubits");
  }
  const Eigen::Matrix2cd a1 = pauli_z();
  const Eigen::Matrix2cd a2 = pauli_x();
  const Eigen::Matrix2cd b1 = measurement_axis(theta);
  const Eigen::Matrix2cd b2 = measurement_axis(-theta);
  return correlator(p, a1, b1) + correlator(p, a2, b1) + correlator(p, a1, b2) -
         correlator(p, a2, b2);
}

Observable chsh_operator(double theta) {
  const CMatrix a1 = pauli_z(), a2 = pauli_x();
  const CMatrix b1 = measurement_axis(theta), b2 = measurement_axis(-theta);
  return Observable(2, kron(a1, b1) + kron(a2, b1) + kron(a1, b2) - kron(a2, b2));
}

}  // namespace qs::quantum
