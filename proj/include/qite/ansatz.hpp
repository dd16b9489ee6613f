#pragma once

#include "qite/pauli.hpp"
#include "qite/simulator.hpp"
#include "qite/state.hpp"

#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qite {

/// One term p * sigma of dU_i/dtheta_i = sum_k p_k U_i sigma_k.
struct DerivativeFactor {
  Complex p;
  PauliString sigma;  // full system width, identity away from the gate's qubits
};

/// Derivative of the parameterized gate for one parameter. sigma is applied
/// immediately after gate `insertion_point`; every parameterized gate here is
/// a rotation, which commutes with its own generator.
struct DerivativeDescriptor {
  std::size_t parameter_index = 0;
  std::size_t insertion_point = 0;
  std::vector<DerivativeFactor> factors;
};

/// V(theta) as an ordered gate list acting on a reference state.
struct AnsatzCircuit {
  std::vector<Gate> gates;
  std::vector<double> parameters;
  std::vector<DerivativeDescriptor> descriptors;
  StateVector reference_state;
  std::size_t n_system_qubits = 0;

  /// V(theta)|psi0>
  StateVector prepare() const { return run_circuit(reference_state, gates); }

  /// W_{k,i}|psi0>: the circuit with factor k's sigma inserted for parameter i.
  StateVector branch(std::size_t parameter, std::size_t factor) const {
    const auto& d = descriptors.at(parameter);
    const auto& f = d.factors.at(factor);
    StateVector psi = reference_state;
    for (std::size_t g = 0; g < gates.size(); ++g) {
      psi = apply_gate(std::move(psi), gates[g]);
      if (g == d.insertion_point) {
        psi = StateVector::unchecked(psi.n_qubits(), apply_pauli(f.sigma, psi.amplitudes()));
      }
    }
    return psi;
  }

  /// d|psi>/dtheta_i = sum_k p_k W_{k,i}|psi0>
  CVector derivative(std::size_t parameter) const {
    const auto& d = descriptors.at(parameter);
    CVector out = CVector::Zero(static_cast<Eigen::Index>(reference_state.dimension()));
    for (std::size_t k = 0; k < d.factors.size(); ++k) out += d.factors[k].p * branch(parameter, k).amplitudes();
    return out;
  }
};

namespace detail {

inline PauliString single_letter(std::size_t n, std::size_t qubit, char letter) {
  std::string s(n, 'I');
  s[qubit] = letter;
  return PauliString(s);
}

/// Descriptor of a rotation gate: dR_n(a)/da = R_n(a) (-i/2) sigma_n.
inline DerivativeDescriptor rotation_descriptor(std::size_t n, std::size_t parameter, std::size_t gate_index,
                                                const Gate& g) {
  char letter = 'Z';
  if (g.kind == GateKind::Rx) letter = 'X';
  if (g.kind == GateKind::Ry) letter = 'Y';
  return {parameter, gate_index, {{Complex(0.0, -0.5), single_letter(n, g.targets.front(), letter)}}};
}

/// exp(-i (theta/2) Y_c X_t) realized as
/// Ry_t(-pi/2) Rx_c(pi/2) CNOT(c,t) Rz_t(theta) CNOT(c,t) Ry_t(pi/2) Rx_c(-pi/2)
/// (application order). Appends gates and the Rz descriptor.
inline void append_ucc_block(AnsatzCircuit& circuit, std::size_t control, std::size_t target, std::size_t parameter) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  auto& g = circuit.gates;
  g.push_back(Gate::ry(target, -half_pi));
  g.push_back(Gate::rx(control, half_pi));
  g.push_back(Gate::cnot(control, target));
  g.push_back(Gate::rz(target, circuit.parameters.at(parameter)));
  circuit.descriptors.push_back(rotation_descriptor(circuit.n_system_qubits, parameter, g.size() - 1, g.back()));
  g.push_back(Gate::cnot(control, target));
  g.push_back(Gate::ry(target, half_pi));
  g.push_back(Gate::rx(control, -half_pi));
}

}  // namespace detail

enum class Molecule { H2, LiH };

inline Molecule parse_molecule(std::string_view tag) {
  if (tag == "H2" || tag == "h2") return Molecule::H2;
  if (tag == "LiH" || tag == "lih") return Molecule::LiH;
  throw ValueError("unknown molecule tag '" + std::string(tag) + "'");
}

/// Reduced Hartree-Fock references: |10> for H2, |100> for LiH.
inline StateVector hartree_fock_state(Molecule molecule) {
  switch (molecule) {
    case Molecule::H2: return StateVector::basis("10");
    case Molecule::LiH: return StateVector::basis("100");
  }
  throw ValueError("unknown molecule");
}

/// UCC ansatz for reduced H2 (2 qubits, 1 parameter, reference |10>).
inline AnsatzCircuit build_ucc_h2(double theta) {
  AnsatzCircuit c{{}, {theta}, {}, hartree_fock_state(Molecule::H2), 2};
  detail::append_ucc_block(c, 0, 1, 0);
  return c;
}

/// UCC ansatz for reduced LiH (3 qubits, 2 parameters, reference |100>); the
/// theta_1 block on (q0, q1) acts first, then the theta_2 block on (q0, q2).
inline AnsatzCircuit build_ucc_lih(std::span<const double> theta) {
  if (theta.size() != 2) throw ValueError("UCC-LiH takes 2 parameters, got " + std::to_string(theta.size()));
  AnsatzCircuit c{{}, {theta.begin(), theta.end()}, {}, hartree_fock_state(Molecule::LiH), 3};
  detail::append_ucc_block(c, 0, 1, 0);
  detail::append_ucc_block(c, 0, 2, 1);
  return c;
}

/// Two-qubit hardware-efficient ansatz. One layer is
/// Rx_q0(t1) Rx_q1(t2) CNOT(q0,q1) Rz_q0(t3) Rz_q1(t4) Rx_q0(t5) Rx_q1(t6)
/// in application order, starting from |00>. Depth > 1 repeats the layer and
/// must be requested explicitly.
inline AnsatzCircuit build_hardware_efficient(std::span<const double> theta, std::size_t depth = 1,
                                              bool allow_depth_extension = false) {
  if (depth == 0 || (depth != 1 && !allow_depth_extension)) {
    throw ValueError("hardware-efficient ansatz supports depth 1 (depth " + std::to_string(depth) +
                     " needs the extension flag)");
  }
  if (theta.size() != 6 * depth) {
    throw ValueError("hardware-efficient ansatz of depth " + std::to_string(depth) + " takes " +
                     std::to_string(6 * depth) + " parameters, got " + std::to_string(theta.size()));
  }
  AnsatzCircuit c{{}, {theta.begin(), theta.end()}, {}, StateVector::basis("00"), 2};
  auto add_rotation = [&](Gate g, std::size_t parameter) {
    c.gates.push_back(std::move(g));
    c.descriptors.push_back(detail::rotation_descriptor(2, parameter, c.gates.size() - 1, c.gates.back()));
  };
  for (std::size_t layer = 0; layer < depth; ++layer) {
    const std::size_t p = 6 * layer;
    add_rotation(Gate::rx(0, theta[p + 0]), p + 0);
    add_rotation(Gate::rx(1, theta[p + 1]), p + 1);
    c.gates.push_back(Gate::cnot(0, 1));
    add_rotation(Gate::rz(0, theta[p + 2]), p + 2);
    add_rotation(Gate::rz(1, theta[p + 3]), p + 3);
    add_rotation(Gate::rx(0, theta[p + 4]), p + 4);
    add_rotation(Gate::rx(1, theta[p + 5]), p + 5);
  }
  return c;
}

using AnsatzBuilder = std::function<AnsatzCircuit(std::span<const double>)>;

enum class AnsatzKind { UccH2, UccLiH, HardwareEfficient };

inline std::string_view to_string(AnsatzKind kind) noexcept {
  switch (kind) {
    case AnsatzKind::UccH2: return "ucc-h2";
    case AnsatzKind::UccLiH: return "ucc-lih";
    case AnsatzKind::HardwareEfficient: return "he";
  }
  return "?";
}

inline AnsatzKind parse_ansatz_kind(std::string_view name) {
  if (name == "ucc-h2") return AnsatzKind::UccH2;
  if (name == "ucc-lih") return AnsatzKind::UccLiH;
  if (name == "he") return AnsatzKind::HardwareEfficient;
  throw ValueError("unknown ansatz '" + std::string(name) + "' (expected ucc-h2, ucc-lih or he)");
}

inline std::size_t system_qubits(AnsatzKind kind) noexcept { return kind == AnsatzKind::UccLiH ? 3 : 2; }

inline std::size_t parameter_count(AnsatzKind kind) noexcept {
  switch (kind) {
    case AnsatzKind::UccH2: return 1;
    case AnsatzKind::UccLiH: return 2;
    case AnsatzKind::HardwareEfficient: return 6;
  }
  return 0;
}

/// Initial guesses used for the reference runs: 2.0, [1.0]*2, [0.5]*6.
inline std::vector<double> default_initial_theta(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::UccH2: return {2.0};
    case AnsatzKind::UccLiH: return {1.0, 1.0};
    case AnsatzKind::HardwareEfficient: return std::vector<double>(6, 0.5);
  }
  return {};
}

inline AnsatzBuilder make_builder(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::UccH2:
      return [](std::span<const double> t) {
        if (t.size() != 1) throw ValueError("UCC-H2 takes 1 parameter, got " + std::to_string(t.size()));
        return build_ucc_h2(t[0]);
      };
    case AnsatzKind::UccLiH: return [](std::span<const double> t) { return build_ucc_lih(t); };
    case AnsatzKind::HardwareEfficient:
      return [](std::span<const double> t) { return build_hardware_efficient(t); };
  }
  throw ValueError("unknown ansatz kind");
}

}  // namespace qite
