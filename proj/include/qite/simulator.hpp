#pragma once

#include "qite/pauli.hpp"
#include "qite/state.hpp"
#include "qite/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qite {

enum class GateKind { Rx, Ry, Rz, H, X, Y, Z, CNOT, CZ, ControlledPauli };

inline const char* to_string(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::Rx: return "Rx";
    case GateKind::Ry: return "Ry";
    case GateKind::Rz: return "Rz";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::ControlledPauli: return "CP";
  }
  return "?";
}

/// One circuit element. Rotations use R_n(a) = exp(-i a/2 sigma_n).
///
/// ControlledPauli applies `pauli` (one letter per entry of `targets`) when the
/// control qubit is |1> (or |0> when control_on_one is false). It is realized
/// as a chain of controlled single-qubit Pauli factors.
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<std::size_t> targets;
  std::optional<std::size_t> control;
  double angle = 0.0;
  std::string pauli;
  bool control_on_one = true;

  static Gate rx(std::size_t q, double a) { return {GateKind::Rx, {q}, std::nullopt, a, {}, true}; }
  static Gate ry(std::size_t q, double a) { return {GateKind::Ry, {q}, std::nullopt, a, {}, true}; }
  static Gate rz(std::size_t q, double a) { return {GateKind::Rz, {q}, std::nullopt, a, {}, true}; }
  static Gate h(std::size_t q) { return {GateKind::H, {q}, std::nullopt, 0.0, {}, true}; }
  static Gate x(std::size_t q) { return {GateKind::X, {q}, std::nullopt, 0.0, {}, true}; }
  static Gate y(std::size_t q) { return {GateKind::Y, {q}, std::nullopt, 0.0, {}, true}; }
  static Gate z(std::size_t q) { return {GateKind::Z, {q}, std::nullopt, 0.0, {}, true}; }
  static Gate cnot(std::size_t c, std::size_t t) { return {GateKind::CNOT, {t}, c, 0.0, {}, true}; }
  static Gate cz(std::size_t c, std::size_t t) { return {GateKind::CZ, {t}, c, 0.0, {}, true}; }

  /// Controlled version of a full-register Pauli string; identity letters
  /// are skipped. An all-identity string yields a gate with no targets.
  static Gate controlled_pauli(std::size_t c, const PauliString& sigma, bool on_one = true) {
    Gate g{GateKind::ControlledPauli, {}, c, 0.0, {}, on_one};
    for (std::size_t q = 0; q < sigma.n_qubits(); ++q) {
      if (sigma[q] != 'I') {
        g.targets.push_back(q);
        g.pauli.push_back(sigma[q]);
      }
    }
    return g;
  }

  bool is_rotation() const noexcept { return kind == GateKind::Rx || kind == GateKind::Ry || kind == GateKind::Rz; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

namespace detail {

inline void check_gate(const Gate& g, std::size_t n) {
  const bool needs_control = g.kind == GateKind::CNOT || g.kind == GateKind::CZ || g.kind == GateKind::ControlledPauli;
  if (needs_control != g.control.has_value()) {
    throw ValueError(std::string(to_string(g.kind)) + ": control qubit presence does not match gate kind");
  }
  if (g.kind == GateKind::ControlledPauli) {
    if (g.pauli.size() != g.targets.size()) throw ValueError("CP: one Pauli letter per target required");
  } else if (g.targets.size() != 1) {
    throw ValueError(std::string(to_string(g.kind)) + ": exactly one target required");
  }
  std::vector<bool> used(n, false);
  auto claim = [&](std::size_t q) {
    if (q >= n) throw ValueError(std::string(to_string(g.kind)) + ": qubit " + std::to_string(q) + " out of range");
    if (used[q]) throw ValueError(std::string(to_string(g.kind)) + ": qubit " + std::to_string(q) + " used twice");
    used[q] = true;
  };
  if (g.control) claim(*g.control);
  for (std::size_t t : g.targets) claim(t);
}

/// Applies the 2x2 matrix [[m00, m01], [m10, m11]] to `target`, restricted to
/// basis states whose control bit (if any) equals `control_value`.
inline void apply_single(CVector& psi, std::size_t n, std::size_t target, Complex m00, Complex m01, Complex m10,
                         Complex m11, std::optional<std::size_t> control = std::nullopt, bool control_value = true) {
  const std::size_t tbit = qubit_bit(target, n);
  const std::size_t cbit = control ? qubit_bit(*control, n) : 0;
  const auto dim = static_cast<std::size_t>(psi.size());
  for (std::size_t b = 0; b < dim; ++b) {
    if ((b & tbit) != 0) continue;
    if (control && (((b & cbit) != 0) != control_value)) continue;
    const auto i0 = static_cast<Eigen::Index>(b);
    const auto i1 = static_cast<Eigen::Index>(b | tbit);
    const Complex a0 = psi(i0);
    const Complex a1 = psi(i1);
    psi(i0) = m00 * a0 + m01 * a1;
    psi(i1) = m10 * a0 + m11 * a1;
  }
}

inline void apply_pauli_letter(CVector& psi, std::size_t n, std::size_t target, char letter,
                               std::optional<std::size_t> control, bool control_value) {
  const Complex i{0.0, 1.0};
  switch (letter) {
    case 'X': apply_single(psi, n, target, 0, 1, 1, 0, control, control_value); break;
    case 'Y': apply_single(psi, n, target, 0, -i, i, 0, control, control_value); break;
    case 'Z': apply_single(psi, n, target, 1, 0, 0, -1, control, control_value); break;
    case 'I': break;
    default: throw ValueError("invalid Pauli letter in gate");
  }
}

inline void apply_gate_inplace(CVector& psi, std::size_t n, const Gate& g) {
  check_gate(g, n);
  const Complex i{0.0, 1.0};
  const double c = std::cos(g.angle / 2.0);
  const double s = std::sin(g.angle / 2.0);
  const std::size_t t = g.targets.empty() ? 0 : g.targets.front();
  switch (g.kind) {
    case GateKind::Rx: apply_single(psi, n, t, c, -i * s, -i * s, c); break;
    case GateKind::Ry: apply_single(psi, n, t, c, -s, s, c); break;
    case GateKind::Rz: apply_single(psi, n, t, std::exp(-i * (g.angle / 2.0)), 0, 0, std::exp(i * (g.angle / 2.0))); break;
    case GateKind::H: {
      const double r = (1.0 / std::numbers::sqrt2);
      apply_single(psi, n, t, r, r, r, -r);
      break;
    }
    case GateKind::X: apply_pauli_letter(psi, n, t, 'X', std::nullopt, true); break;
    case GateKind::Y: apply_pauli_letter(psi, n, t, 'Y', std::nullopt, true); break;
    case GateKind::Z: apply_pauli_letter(psi, n, t, 'Z', std::nullopt, true); break;
    case GateKind::CNOT: apply_pauli_letter(psi, n, t, 'X', g.control, true); break;
    case GateKind::CZ: apply_pauli_letter(psi, n, t, 'Z', g.control, true); break;
    case GateKind::ControlledPauli:
      // c-sigma_{ij...} = ... c-sigma_j . c-sigma_i
      for (std::size_t k = 0; k < g.targets.size(); ++k) {
        apply_pauli_letter(psi, n, g.targets[k], g.pauli[k], g.control, g.control_on_one);
      }
      break;
  }
}

}  // namespace detail

inline StateVector apply_gate(StateVector state, const Gate& g) {
  detail::apply_gate_inplace(state.mutable_amplitudes(), state.n_qubits(), g);
  return state;
}

/// Applies `gates` in list order (first element acts first).
inline StateVector run_circuit(StateVector state, std::span<const Gate> gates) {
  for (const auto& g : gates) detail::apply_gate_inplace(state.mutable_amplitudes(), state.n_qubits(), g);
  return state;
}

/// Dense unitary of a gate list on n qubits (column b = circuit applied to |b>).
inline CMatrix circuit_unitary(std::span<const Gate> gates, std::size_t n_qubits) {
  if (n_qubits > kMaxDenseQubits) throw DimensionError("circuit_unitary: too many qubits");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
  CMatrix u(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    CVector col = CVector::Zero(dim);
    col(b) = 1.0;
    for (const auto& g : gates) detail::apply_gate_inplace(col, n_qubits, g);
    u.col(b) = col;
  }
  return u;
}

inline CMatrix gate_unitary(const Gate& g, std::size_t n_qubits) { return circuit_unitary(std::span(&g, 1), n_qubits); }

// Fidelity. For a pure reference |b>, F = <b|rho_a|b> = Tr(rho_a |b><b|).

inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionError("fidelity: dimensions differ");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

inline double fidelity(const DensityMatrix& a, const StateVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionError("fidelity: dimensions differ");
  const Complex value = b.amplitudes().dot(a.matrix() * b.amplitudes());
  return std::clamp(value.real(), 0.0, 1.0);
}

inline double fidelity(const StateVector& a, const DensityMatrix& b) { return fidelity(b, a); }

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2; reduces to the pure-state
/// trace formula when either argument is pure.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dimension() != b.dimension()) throw DimensionError("fidelity: dimensions differ");
  Eigen::SelfAdjointEigenSolver<CMatrix> sa(a.matrix());
  const RVector roots = sa.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix sqrt_a = sa.eigenvectors() * roots.asDiagonal() * sa.eigenvectors().adjoint();
  const CMatrix inner = sqrt_a * b.matrix() * sqrt_a;
  Eigen::SelfAdjointEigenSolver<CMatrix> si(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double root_trace = si.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

/// Seedable generator used by every shot-mode estimate.
using Rng = std::mt19937_64;

/// Per-qubit readout fidelities of the ground (f_g) and excited (f_e) states.
struct ReadoutError {
  double f_g = 1.0;
  double f_e = 1.0;
};

/// Probability of reading "ground" given the true ground probability.
inline double apply_readout_error(double p_truth, double f_g, double f_e) {
  if (f_g < 0.0 || f_g > 1.0 || f_e < 0.0 || f_e > 1.0) throw ValueError("readout fidelities must lie in [0,1]");
  return f_g * p_truth + (1.0 - f_e) * (1.0 - p_truth);
}

/// Exact <Z> on one qubit.
inline double measure_z_expectation(const StateVector& state, std::size_t qubit) {
  if (qubit >= state.n_qubits()) throw ValueError("measure: qubit out of range");
  const std::size_t bit = qubit_bit(qubit, state.n_qubits());
  double z = 0.0;
  for (std::size_t b = 0; b < state.dimension(); ++b) {
    z += ((b & bit) == 0 ? 1.0 : -1.0) * std::norm(state[b]);
  }
  return z;
}

/// Shot estimate 2 k / shots - 1 with k ~ Binomial(shots, (1 + z) / 2), the
/// ground probability optionally passed through a readout-error map first.
inline double sample_z_estimate(double z_exact, std::uint64_t shots, Rng& rng,
                                const std::optional<ReadoutError>& readout = std::nullopt) {
  if (shots == 0) throw ValueError("shots must be positive");
  double p_ground = std::clamp((1.0 + z_exact) / 2.0, 0.0, 1.0);
  if (readout) p_ground = apply_readout_error(p_ground, readout->f_g, readout->f_e);
  std::binomial_distribution<std::uint64_t> draw(shots, p_ground);
  const auto count = draw(rng);
  return 2.0 * static_cast<double>(count) / static_cast<double>(shots) - 1.0;
}

inline double measure_z_expectation(const StateVector& state, std::size_t qubit, std::uint64_t shots, Rng& rng,
                                    const std::optional<ReadoutError>& readout = std::nullopt) {
  if (shots == 0) throw ValueError("shots must be positive");
  return sample_z_estimate(measure_z_expectation(state, qubit), shots, rng, readout);
}

}  // namespace qite
