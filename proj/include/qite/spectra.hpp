#pragma once

#include "qite/pauli.hpp"
#include "qite/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qite {

/// Ascending eigenvalues with matching eigenvectors (columns).
struct SpectrumResult {
  RVector eigenvalues;
  CMatrix eigenstates;
  std::vector<bool> degenerate;  // level n is within 1e-9 of a neighbour

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  CVector state(std::size_t n) const { return eigenstates.col(static_cast<Eigen::Index>(n)); }
  double ground_energy() const { return eigenvalues(0); }
  CVector ground_state() const { return state(0); }
  bool ground_degenerate() const { return !degenerate.empty() && degenerate.front(); }
};

inline constexpr double kDegeneracyTolerance = 1e-9;

/// Rotates v so that its largest-magnitude component is real and positive.
/// Ties go to the lowest index.
inline void normalize_phase(Eigen::Ref<CVector> v) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > best_mag + 1e-12) {
      best = i;
      best_mag = mag;
    }
  }
  if (best_mag <= 0.0) return;
  v *= std::conj(v(best)) / best_mag;
  v(best) = Complex(std::abs(v(best)), 0.0);
}

inline SpectrumResult exact_spectrum(const CMatrix& m, double hermitian_tolerance = 1e-9) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("spectrum needs a non-empty square matrix");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > hermitian_tolerance) throw NumericalError("matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()));
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  SpectrumResult out{solver.eigenvalues(), solver.eigenvectors(), {}};
  const auto n = out.eigenvalues.size();
  out.degenerate.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < n; ++k) {
    normalize_phase(out.eigenstates.col(k));
    const bool below = k > 0 && out.eigenvalues(k) - out.eigenvalues(k - 1) < kDegeneracyTolerance;
    const bool above = k + 1 < n && out.eigenvalues(k + 1) - out.eigenvalues(k) < kDegeneracyTolerance;
    out.degenerate[static_cast<std::size_t>(k)] = below || above;
  }
  return out;
}

inline SpectrumResult exact_spectrum(const PauliHamiltonian& h) { return exact_spectrum(to_dense_matrix(h)); }

struct GershgorinDisc {
  double center = 0.0;
  double radius = 0.0;
};

struct GershgorinBound {
  std::vector<GershgorinDisc> discs;
  double e_max = 0.0;

  /// True if x lies in the union of the closed discs (intervals, for Hermitian input).
  bool contains(double x, double tolerance = 1e-9) const {
    return std::ranges::any_of(discs, [&](const GershgorinDisc& d) { return std::abs(x - d.center) <= d.radius + tolerance; });
  }
};

inline GershgorinBound gershgorin_emax(const CMatrix& h, double hermitian_tolerance = 1e-9) {
  if (h.rows() != h.cols() || h.rows() == 0) throw DimensionError("Gershgorin bound needs a non-empty square matrix");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > hermitian_tolerance) throw NumericalError("matrix is not Hermitian");
  GershgorinBound out;
  out.e_max = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    double radius = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (j != i) radius += std::abs(h(i, j));
    }
    const GershgorinDisc d{h(i, i).real(), radius};
    out.discs.push_back(d);
    out.e_max = std::max(out.e_max, d.center + d.radius);
  }
  return out;
}

/// Sum of |h_l|: a looser upper bound on the spectral radius that needs no dense matrix.
inline double pauli_norm_bound(const PauliHamiltonian& h) {
  double sum = 0.0;
  for (const auto& t : h.terms()) sum += std::abs(t.coefficient);
  return sum;
}

/// H' = H + (e_max - E0) * ground with E0 = Tr(ground H). For an exact ground
/// projector the ground level of H moves up to e_max and the old first excited
/// state becomes the ground state of H'.
inline PauliHamiltonian lift_ground_state(const PauliHamiltonian& h, const DensityMatrix& ground, double e_max) {
  if (ground.n_qubits() != h.n_qubits()) throw DimensionError("ground state and Hamiltonian sizes differ");
  const double e0 = expectation(h, ground);
  if (e_max < e0) throw ValueError("e_max lies below the ground energy");
  const CMatrix lifted = to_dense_matrix(h) + (e_max - e0) * ground.matrix();
  return pauli_decompose(0.5 * (lifted + lifted.adjoint()));
}

}  // namespace qite
