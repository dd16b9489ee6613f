#pragma once

#include "qite/types.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <string_view>

namespace qite {

/// Normalized pure state of an n-qubit register.
class StateVector {
 public:
  /// Computational basis state from a bit string, e.g. "10" = |1>_q0 |0>_q1.
  static StateVector basis(std::string_view bits) {
    if (bits.empty() || bits.size() > 30) {
      throw ValueError("basis state needs 1..30 bits, got '" + std::string(bits) + "'");
    }
    std::size_t index = 0;
    for (std::size_t q = 0; q < bits.size(); ++q) {
      if (bits[q] == '1') {
        index |= qubit_bit(q, bits.size());
      } else if (bits[q] != '0') {
        throw ValueError("basis state bit string must be 0/1, got '" + std::string(bits) + "'");
      }
    }
    return basis(bits.size(), index);
  }

  static StateVector basis(std::size_t n_qubits, std::size_t index) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) throw ValueError("basis index out of range");
    CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(n_qubits, std::move(amps));
  }

  static StateVector from_amplitudes(CVector amplitudes, double tolerance = 1e-10) {
    const auto dim = static_cast<std::size_t>(amplitudes.size());
    if (dim < 2 || !std::has_single_bit(dim)) {
      throw DimensionError("state length must be a power of two >= 2, got " + std::to_string(dim));
    }
    if (std::abs(amplitudes.squaredNorm() - 1.0) > tolerance) {
      throw ValueError("state is not normalized (norm^2 = " + std::to_string(amplitudes.squaredNorm()) + ")");
    }
    return StateVector(static_cast<std::size_t>(std::countr_zero(dim)), std::move(amplitudes));
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const CVector& amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

  /// Raw access for gate kernels, which preserve the norm.
  CVector& mutable_amplitudes() noexcept { return amplitudes_; }

  /// Construction without the norm check, for unitary images of valid states.
  static StateVector unchecked(std::size_t n_qubits, CVector amplitudes) {
    return StateVector(n_qubits, std::move(amplitudes));
  }

 private:
  StateVector(std::size_t n, CVector amps) : n_qubits_(n), amplitudes_(std::move(amps)) {}

  std::size_t n_qubits_;
  CVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite operator on n qubits.
class DensityMatrix {
 public:
  static DensityMatrix from_state(const StateVector& psi) {
    return DensityMatrix(psi.n_qubits(), psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(std::size_t n_qubits) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    return DensityMatrix(n_qubits, CMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  static DensityMatrix from_matrix(CMatrix m, double tolerance = 1e-10) {
    const auto dim = static_cast<std::size_t>(m.rows());
    if (m.rows() != m.cols() || dim < 2 || !std::has_single_bit(dim)) {
      throw DimensionError("density matrix must be square with power-of-two dimension");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tolerance) {
      throw ValueError("density matrix is not Hermitian");
    }
    if (std::abs(m.trace() - Complex(1.0)) > tolerance) {
      throw ValueError("density matrix trace is not 1");
    }
    const CMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-9) {
      throw ValueError("density matrix has a negative eigenvalue");
    }
    return DensityMatrix(static_cast<std::size_t>(std::countr_zero(dim)), herm);
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(elements_.rows()); }
  const CMatrix& matrix() const noexcept { return elements_; }

 private:
  DensityMatrix(std::size_t n, CMatrix m) : n_qubits_(n), elements_(std::move(m)) {}

  std::size_t n_qubits_;
  CMatrix elements_;
};

}  // namespace qite
