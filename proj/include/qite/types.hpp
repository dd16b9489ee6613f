#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qite {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Largest register for which dense 2^n x 2^n matrices are built.
inline constexpr std::size_t kMaxDenseQubits = 12;

/// Qubit q of an n-qubit register occupies bit (n - 1 - q) of a basis index,
/// i.e. q0 is the most significant bit and the leftmost Pauli letter acts on
/// q0. Every module maps qubits to bits through this function only.
constexpr std::size_t qubit_bit(std::size_t qubit, std::size_t n_qubits) noexcept {
  return std::size_t{1} << (n_qubits - 1 - qubit);
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or oversized dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside an operation's contract.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant (Hermiticity, reality of an expectation) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qite
