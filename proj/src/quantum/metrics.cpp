#include "qsampler/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qs::quantum {

CMatrix psd_sqrt(const CMatrix& m) {
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10) {
      throw std::domain_error("psd_sqrt: eigenvalue " + std::to_string(ev(i)) +
                              " below clamp threshold -1e-10");
    }
    ev(i) = ev(i) < 0.0 ? 0.0 : std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// For flagged reconstructions:
// negative eigenvalues set to zero, trace restored to one.
CMatrix clamp_to_state(const DensityMatrix& rho) {
  if (rho.psd()) return rho.entries();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.entries());
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  ev /= ev.sum();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
  }
  const CMatrix sa = psd_sqrt(clamp_to_state(a));
  const CMatrix inner = sa * clamp_to_state(b) * sa;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 0.0) f += std::sqrt(ev);
  }
  return f;
}

double dkl(std::span<const double> target, std::span<const double> model) {
  if (target.size() != model.size()) {
    throw std::invalid_argument("dkl: support sizes differ (" + std::to_string(target.size()) +
                                " vs " + std::to_string(model.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double p = target[i];
    if (p <= 0.0) continue;
    const double q = model[i];
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p * std::log(p / q);
  }
  // Rounding can push identical distributions a hair below zero.
  return acc < 0.0 && acc > -1e-12 ? 0.0 : acc;
}

}  // namespace qs::quantum
