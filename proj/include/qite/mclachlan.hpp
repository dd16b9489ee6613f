#pragma once

#include "qite/ansatz.hpp"
#include "qite/pauli.hpp"
#include "qite/simulator.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qite {

enum class RouteKind {
  Exact,          ///< direct statevector inner products
  HadamardExact,  ///< ancilla Hadamard-test circuits, <Z_a> evaluated exactly
  HadamardShots,  ///< ancilla Hadamard-test circuits, <Z_a> sampled
};

/// How A and B are estimated.
struct Route {
  RouteKind kind = RouteKind::Exact;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::optional<ReadoutError> readout;
  bool simplify_circuits = false;

  static Route exact() { return {}; }
  static Route hadamard_exact(bool simplify = false) { return {RouteKind::HadamardExact, 0, 0, std::nullopt, simplify}; }
  static Route hadamard_shots(std::uint64_t shots, std::uint64_t seed) {
    if (shots == 0) throw ValueError("shots must be positive");
    return {RouteKind::HadamardShots, shots, seed, std::nullopt, false};
  }

  bool sampled() const noexcept { return kind == RouteKind::HadamardShots; }

  std::string describe() const {
    switch (kind) {
      case RouteKind::Exact: return "exact";
      case RouteKind::HadamardExact: return "hadamard";
      case RouteKind::HadamardShots: return "shots:" + std::to_string(shots);
    }
    return "?";
  }
};

/// A theta_dot = B, with entrywise standard errors on the sampled route.
struct McLachlanSystem {
  RMatrix a_matrix;
  RVector b_vector;
  Route route;
  RMatrix a_stderr;
  RVector b_stderr;
};

/// Ancilla circuit whose <Z> on `measured_qubit` is Re[e^{i phase} <a|b>],
/// where |a> and |b> are the system states on the ancilla's |0> and |1>
/// branches. The circuit starts from |0...0>.
struct HadamardTestCircuit {
  std::vector<Gate> gates;
  double ancilla_phase = 0.0;
  std::size_t measured_qubit = 0;
  std::size_t n_qubits = 0;
};

struct EntryTarget {
  enum class Matrix { A, B };
  Matrix matrix = Matrix::A;
  std::size_t i = 0;
  std::size_t j = 0;  // unused for B
};

/// Contribution weight * <Z_a> to one entry of A or B.
struct WeightedHadamardCircuit {
  HadamardTestCircuit circuit;
  double weight = 0.0;
  EntryTarget destination;
};

namespace detail {

inline void check_system(const AnsatzCircuit& ansatz, const PauliHamiltonian& h) {
  if (ansatz.n_system_qubits != h.n_qubits()) {
    throw DimensionError("ansatz acts on " + std::to_string(ansatz.n_system_qubits) + " qubits, Hamiltonian on " +
                         std::to_string(h.n_qubits()));
  }
  if (ansatz.descriptors.size() != ansatz.parameters.size()) {
    throw ValueError("ansatz needs one derivative descriptor per parameter");
  }
}

/// X gates preparing a computational-basis reference state from |0...0>.
inline std::vector<Gate> basis_preparation(const StateVector& reference) {
  std::optional<std::size_t> index;
  for (std::size_t b = 0; b < reference.dimension(); ++b) {
    const double mag = std::abs(reference[b]);
    if (mag > 1e-12) {
      if (index || std::abs(mag - 1.0) > 1e-12) {
        throw ValueError("Hadamard-test circuits need a computational-basis reference state");
      }
      index = b;
    }
  }
  std::vector<Gate> gates;
  for (std::size_t q = 0; q < reference.n_qubits(); ++q) {
    if ((*index & qubit_bit(q, reference.n_qubits())) != 0) gates.push_back(Gate::x(q));
  }
  return gates;
}

struct Insertion {
  std::size_t after_gate;
  Gate gate;
};

inline HadamardTestCircuit assemble_hadamard(const AnsatzCircuit& ansatz, double phase,
                                             const std::vector<Insertion>& insertions,
                                             const std::optional<Gate>& final_controlled) {
  const std::size_t ancilla = ansatz.n_system_qubits;
  HadamardTestCircuit hc{basis_preparation(ansatz.reference_state), phase, ancilla, ancilla + 1};
  hc.gates.push_back(Gate::h(ancilla));
  hc.gates.push_back(Gate::rz(ancilla, phase));
  for (std::size_t g = 0; g < ansatz.gates.size(); ++g) {
    hc.gates.push_back(ansatz.gates[g]);
    for (const auto& ins : insertions) {
      if (ins.after_gate == g) hc.gates.push_back(ins.gate);
    }
  }
  if (final_controlled) hc.gates.push_back(*final_controlled);
  hc.gates.push_back(Gate::h(ancilla));
  return hc;
}

inline bool touches(const Gate& g, std::size_t qubit) {
  if (g.control && *g.control == qubit) return true;
  return std::ranges::find(g.targets, qubit) != g.targets.end();
}

}  // namespace detail

/// Peephole pass over a Hadamard-test gate list:
///  - an open-controlled sigma directly followed by the same closed-controlled
///    sigma collapses to the uncontrolled sigma;
///  - system-only gates after the last ancilla-coupled gate (before the final
///    ancilla H) act identically on both branches and are dropped.
inline HadamardTestCircuit simplify_hadamard_circuit(HadamardTestCircuit circuit) {
  const std::size_t ancilla = circuit.measured_qubit;
  std::vector<Gate> fused;
  fused.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) {
    if (!fused.empty() && g.kind == GateKind::ControlledPauli && fused.back().kind == GateKind::ControlledPauli &&
        g.control == fused.back().control && g.targets == fused.back().targets && g.pauli == fused.back().pauli &&
        g.control_on_one != fused.back().control_on_one) {
      const Gate open = fused.back();
      fused.pop_back();
      for (std::size_t k = 0; k < open.targets.size(); ++k) {
        const char letter = open.pauli[k];
        fused.push_back(letter == 'X' ? Gate::x(open.targets[k])
                                      : letter == 'Y' ? Gate::y(open.targets[k]) : Gate::z(open.targets[k]));
      }
      continue;
    }
    fused.push_back(g);
  }
  if (fused.size() >= 2) {
    const Gate final_h = fused.back();
    fused.pop_back();
    std::size_t last = fused.size();
    for (std::size_t g = fused.size(); g-- > 0;) {
      if (detail::touches(fused[g], ancilla)) {
        last = g;
        break;
      }
    }
    if (last < fused.size()) fused.resize(last + 1);
    fused.push_back(final_h);
  }
  circuit.gates = std::move(fused);
  return circuit;
}

/// One circuit per (factor pair, A entry with i <= j) and per (factor,
/// Hamiltonian term, B entry). The ancilla is the last qubit; its phase is the
/// argument of the complex prefactor and the weight its modulus.
inline std::vector<WeightedHadamardCircuit> build_hadamard_circuits(const AnsatzCircuit& ansatz,
                                                                    const PauliHamiltonian& h,
                                                                    bool simplify = false) {
  detail::check_system(ansatz, h);
  const std::size_t ancilla = ansatz.n_system_qubits;
  const std::size_t n_params = ansatz.parameters.size();
  std::vector<WeightedHadamardCircuit> out;
  auto push = [&](HadamardTestCircuit hc, double weight, EntryTarget target) {
    if (simplify) hc = simplify_hadamard_circuit(std::move(hc));
    out.push_back({std::move(hc), weight, target});
  };

  for (std::size_t i = 0; i < n_params; ++i) {
    const auto& di = ansatz.descriptors[i];
    for (std::size_t j = i; j < n_params; ++j) {
      const auto& dj = ansatz.descriptors[j];
      for (const auto& fk : di.factors) {
        for (const auto& fl : dj.factors) {
          const Complex prefactor = std::conj(fk.p) * fl.p;
          if (std::abs(prefactor) == 0.0) continue;
          std::vector<detail::Insertion> ins{{di.insertion_point, Gate::controlled_pauli(ancilla, fk.sigma, false)},
                                             {dj.insertion_point, Gate::controlled_pauli(ancilla, fl.sigma, true)}};
          push(detail::assemble_hadamard(ansatz, std::arg(prefactor), ins, std::nullopt), std::abs(prefactor),
               {EntryTarget::Matrix::A, i, j});
        }
      }
    }
  }
  for (std::size_t i = 0; i < n_params; ++i) {
    const auto& di = ansatz.descriptors[i];
    for (const auto& fk : di.factors) {
      for (const auto& term : h.terms()) {
        const Complex prefactor = -std::conj(fk.p) * term.coefficient;
        if (std::abs(prefactor) == 0.0) continue;
        std::vector<detail::Insertion> ins{{di.insertion_point, Gate::controlled_pauli(ancilla, fk.sigma, false)}};
        push(detail::assemble_hadamard(ansatz, std::arg(prefactor), ins,
                                       Gate::controlled_pauli(ancilla, term.string, true)),
             std::abs(prefactor), {EntryTarget::Matrix::B, i, 0});
      }
    }
  }
  return out;
}

/// Exact <Z> on the ancilla.
inline double evaluate_hadamard_exact(const HadamardTestCircuit& circuit) {
  const StateVector out = run_circuit(StateVector::basis(circuit.n_qubits, 0), circuit.gates);
  return measure_z_expectation(out, circuit.measured_qubit);
}

/// A and B by direct inner products, term by term:
///   A_ij = Re sum_{k,l} p*_k p_l <W_k psi0 | W_l psi0>
///   B_i  = -Re sum_{k,l} p*_k h_l <W_k psi0 | sigma_l V psi0>
/// Only i <= j is evaluated; A is mirrored.
inline McLachlanSystem compute_exact(const AnsatzCircuit& ansatz, const PauliHamiltonian& h) {
  detail::check_system(ansatz, h);
  const std::size_t n_params = ansatz.parameters.size();
  std::vector<std::vector<CVector>> branches(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    for (std::size_t k = 0; k < ansatz.descriptors[i].factors.size(); ++k) {
      branches[i].push_back(ansatz.branch(i, k).amplitudes());
    }
  }
  const CVector psi = ansatz.prepare().amplitudes();
  std::vector<CVector> sigma_psi;
  sigma_psi.reserve(h.size());
  for (const auto& term : h.terms()) sigma_psi.push_back(apply_pauli(term.string, psi));

  const auto np = static_cast<Eigen::Index>(n_params);
  McLachlanSystem sys{RMatrix::Zero(np, np), RVector::Zero(np), Route::exact(), RMatrix::Zero(np, np),
                      RVector::Zero(np)};
  for (std::size_t i = 0; i < n_params; ++i) {
    const auto& fi = ansatz.descriptors[i].factors;
    for (std::size_t j = i; j < n_params; ++j) {
      const auto& fj = ansatz.descriptors[j].factors;
      Complex sum = 0.0;
      for (std::size_t k = 0; k < fi.size(); ++k) {
        for (std::size_t l = 0; l < fj.size(); ++l) {
          sum += std::conj(fi[k].p) * fj[l].p * branches[i][k].dot(branches[j][l]);
        }
      }
      sys.a_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum.real();
      sys.a_matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = sum.real();
    }
    Complex b = 0.0;
    for (std::size_t k = 0; k < fi.size(); ++k) {
      for (std::size_t l = 0; l < h.size(); ++l) {
        b += std::conj(fi[k].p) * h.terms()[l].coefficient * branches[i][k].dot(sigma_psi[l]);
      }
    }
    sys.b_vector(static_cast<Eigen::Index>(i)) = -b.real();
  }
  return sys;
}

/// A and B assembled from Hadamard-test circuits. On the shot route every
/// circuit draws `route.shots` samples from `rng` in circuit order.
inline McLachlanSystem compute_hadamard(const AnsatzCircuit& ansatz, const PauliHamiltonian& h, const Route& route,
                                        Rng& rng) {
  const auto circuits = build_hadamard_circuits(ansatz, h, route.simplify_circuits);
  const auto np = static_cast<Eigen::Index>(ansatz.parameters.size());
  McLachlanSystem sys{RMatrix::Zero(np, np), RVector::Zero(np), route, RMatrix::Zero(np, np), RVector::Zero(np)};
  RMatrix a_var = RMatrix::Zero(np, np);
  RVector b_var = RVector::Zero(np);
  for (const auto& wc : circuits) {
    const double z_exact = evaluate_hadamard_exact(wc.circuit);
    double z = z_exact;
    double var = 0.0;
    if (route.sampled()) {
      z = sample_z_estimate(z_exact, route.shots, rng, route.readout);
      var = wc.weight * wc.weight * std::max(0.0, 1.0 - z * z) / static_cast<double>(route.shots);
    }
    const auto i = static_cast<Eigen::Index>(wc.destination.i);
    const auto j = static_cast<Eigen::Index>(wc.destination.j);
    if (wc.destination.matrix == EntryTarget::Matrix::A) {
      sys.a_matrix(i, j) += wc.weight * z;
      a_var(i, j) += var;
    } else {
      sys.b_vector(i) += wc.weight * z;
      b_var(i) += var;
    }
  }
  for (Eigen::Index i = 0; i < np; ++i) {
    for (Eigen::Index j = i + 1; j < np; ++j) {
      sys.a_matrix(j, i) = sys.a_matrix(i, j);
      a_var(j, i) = a_var(i, j);
    }
  }
  sys.a_stderr = a_var.cwiseSqrt();
  sys.b_stderr = b_var.cwiseSqrt();
  return sys;
}

inline McLachlanSystem compute_sampled(const AnsatzCircuit& ansatz, const PauliHamiltonian& h, std::uint64_t shots,
                                       std::uint64_t seed) {
  const Route route = Route::hadamard_shots(shots, seed);
  Rng rng(seed);
  return compute_hadamard(ansatz, h, route, rng);
}

/// Dispatches on the route. `rng` is only consumed on the shot route.
inline McLachlanSystem compute_system(const AnsatzCircuit& ansatz, const PauliHamiltonian& h, const Route& route,
                                      Rng& rng) {
  if (route.kind == RouteKind::Exact) return compute_exact(ansatz, h);
  return compute_hadamard(ansatz, h, route, rng);
}

struct UpdateResult {
  RVector delta;
  bool stationary = false;
  std::size_t rank = 0;
};

/// Relative eigenvalue cutoff applied to A: 1e-8 on exact routes, 1e-3 when sampled.
inline double default_cutoff(const Route& route) noexcept { return route.sampled() ? 1e-3 : 1e-8; }

/// delta = dtau * A^+ B, with the pseudo-inverse taken over eigenvalues above
/// cutoff * lambda_max. If every eigenvalue is below `absolute_floor` the
/// update is zero and flagged stationary.
inline UpdateResult solve_update(const McLachlanSystem& sys, double dtau, std::optional<double> relative_cutoff = {},
                                 double absolute_floor = 1e-12) {
  if (!(dtau > 0.0)) throw ValueError("dtau must be positive");
  const auto n = sys.a_matrix.rows();
  if (sys.a_matrix.cols() != n || sys.b_vector.size() != n) throw DimensionError("A and B sizes differ");
  UpdateResult out{RVector::Zero(n), false, 0};
  if (n == 0) {
    out.stationary = true;
    return out;
  }
  const RMatrix a = 0.5 * (sys.a_matrix + sys.a_matrix.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(a);
  const RVector& lambda = solver.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (lambda_max <= absolute_floor) {
    out.stationary = true;
    return out;
  }
  const double cutoff = relative_cutoff.value_or(default_cutoff(sys.route)) * lambda_max;
  const RVector projected = solver.eigenvectors().transpose() * sys.b_vector;
  RVector x = RVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (lambda(k) > cutoff) {
      x += solver.eigenvectors().col(k) * (projected(k) / lambda(k));
      ++out.rank;
    }
  }
  out.delta = dtau * x;
  return out;
}

}  // namespace qite
