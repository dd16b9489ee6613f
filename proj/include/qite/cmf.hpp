#pragma once

#include "qite/pauli.hpp"
#include "qite/spectra.hpp"
#include "qite/state.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

namespace qite {

/// Split of a 3-qubit register into a 2-qubit cluster `a` and a 1-qubit
/// cluster `b`, with the initial mean-field state of `b`.
class CmfPartition {
 public:
  /// a = {q0, q1}, b = {q2}, rho_b = (I + X)/2.
  CmfPartition() : CmfPartition({0, 1}, {2}, default_rho_b()) {}

  CmfPartition(std::vector<std::size_t> a, std::vector<std::size_t> b, DensityMatrix rho_b)
      : a_(std::move(a)), b_(std::move(b)), rho_b_(std::move(rho_b)) {
    std::ranges::sort(a_);
    std::ranges::sort(b_);
    std::vector<std::size_t> all = a_;
    all.insert(all.end(), b_.begin(), b_.end());
    std::ranges::sort(all);
    if (std::ranges::adjacent_find(all) != all.end()) throw ValueError("CMF clusters overlap");
    if (all.size() != 3 || all.back() != 2) throw ValueError("CMF partition must cover qubits 0..2");
    if (a_.size() == 1 && b_.size() == 2) {
      throw ValueError("the a(1) b(2) split is an extension point and is not implemented");
    }
    if (a_.size() != 2 || b_.size() != 1) throw ValueError("CMF partition needs |a| = 2 and |b| = 1");
    if (rho_b_.n_qubits() != b_.size()) throw DimensionError("initial rho_b must act on cluster b");
  }

  static DensityMatrix default_rho_b() {
    CMatrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return DensityMatrix::from_matrix(m);
  }

  std::size_t n_qubits() const noexcept { return 3; }
  const std::vector<std::size_t>& a() const noexcept { return a_; }
  const std::vector<std::size_t>& b() const noexcept { return b_; }
  const DensityMatrix& initial_rho_b() const noexcept { return rho_b_; }

 private:
  std::vector<std::size_t> a_;
  std::vector<std::size_t> b_;
  DensityMatrix rho_b_;
};

/// One product candidate |a> (x) |b> considered for the effective basis.
struct CmfCandidate {
  std::string label;  // e.g. "a1[b_e(a_g)]#0"
  double energy = 0.0;
  bool fallback = false;
  bool kept = false;
};

/// Audit trail of the reduction, serialized as key=value lines.
struct SelectionRecord {
  std::vector<double> h_a0_levels;     // two lowest
  std::vector<double> b_levels;        // b_g(a_g), b_e(a_g), b_g(a_e), b_e(a_e)
  std::vector<double> h_a1_levels;     // two lowest per b-state, 8 values
  std::vector<CmfCandidate> candidates;  // in Gram-Schmidt order
  std::vector<std::string> notes;

  std::string serialize() const {
    auto num = [](double v) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    auto list = [&](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
      return s;
    };
    std::string out;
    out += "h_a0_levels=" + list(h_a0_levels) + "\n";
    out += "b_levels=" + list(b_levels) + "\n";
    out += "h_a1_levels=" + list(h_a1_levels) + "\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      out += "candidate." + std::to_string(i) + "=" + c.label + ";" + num(c.energy) + ";" +
             (c.fallback ? "fallback" : "primary") + ";" + (c.kept ? "kept" : "dropped") + "\n";
    }
    for (const auto& n : notes) out += "note=" + n + "\n";
    return out;
  }
};

struct EffectiveHamiltonian {
  PauliHamiltonian h_eff;
  CMatrix basis_isometry;  // 8 x 4, orthonormal columns
  CmfPartition partition;
  SelectionRecord selection;
};

namespace detail {

/// Full-register vector of |a> (x) |b>, where a_state and b_state are indexed
/// over their clusters' qubits in ascending order.
inline CVector embed_product(const CVector& a_state, const CVector& b_state, const CmfPartition& p) {
  const std::size_t n = p.n_qubits();
  CVector out(Eigen::Index{1} << n);
  for (std::size_t full = 0; full < (std::size_t{1} << n); ++full) {
    std::size_t ia = 0;
    for (std::size_t q : p.a()) ia = (ia << 1) | ((full & qubit_bit(q, n)) ? 1U : 0U);
    std::size_t ib = 0;
    for (std::size_t q : p.b()) ib = (ib << 1) | ((full & qubit_bit(q, n)) ? 1U : 0U);
    out(static_cast<Eigen::Index>(full)) = a_state(static_cast<Eigen::Index>(ia)) * b_state(static_cast<Eigen::Index>(ib));
  }
  return out;
}

inline DensityMatrix pure(const CVector& v) {
  return DensityMatrix::from_state(StateVector::from_amplitudes(v, 1e-8));
}

inline bool lexicographically_less(const CVector& x, const CVector& y) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i).real() != y(i).real()) return x(i).real() < y(i).real();
    if (x(i).imag() != y(i).imag()) return x(i).imag() < y(i).imag();
  }
  return false;
}

inline void note_degeneracy(const SpectrumResult& s, std::size_t levels, const std::string& where,
                            SelectionRecord& record) {
  for (std::size_t k = 0; k < std::min(levels, s.size()); ++k) {
    if (s.degenerate[k]) {
      record.notes.push_back(where + " level " + std::to_string(k) + " degenerate; eigensolver order kept");
      return;
    }
  }
}

}  // namespace detail

/// One-layer cluster mean-field reduction of a 3-qubit Hamiltonian to 2 qubits.
///
///  1. H_a0 = Tr_b((I_a rho_b) H); keep its two lowest eigenstates a_g, a_e.
///  2. For each, H_b = Tr_a((rho_a I_b) H); keep both eigenstates (4 b-states).
///  3. For each b-state, H_a1 = Tr_b((I_a rho_b) H); two lowest a-states each.
///  4. Candidates: each b-state paired with the lowest a-state of its own H_a1.
///     If Gram-Schmidt leaves fewer than 4 vectors, the second a-states are
///     appended in ascending <H>.
///  5. Gram-Schmidt in ascending <H> (ties: lexicographic coefficients).
///  6. h_eff = Pauli decomposition of W^dag H W.
inline EffectiveHamiltonian cmf_reduce(const PauliHamiltonian& h, const CmfPartition& partition = {}) {
  if (h.n_qubits() != partition.n_qubits()) throw DimensionError("CMF reduction needs a 3-qubit Hamiltonian");
  const CMatrix dense = to_dense_matrix(h);
  SelectionRecord record;

  const auto h_a0 = exact_spectrum(weighted_partial_trace(h, partition.a(), partition.initial_rho_b()));
  detail::note_degeneracy(h_a0, 2, "H_a0", record);
  const char* a_names[2] = {"a_g", "a_e"};
  const char* b_names[2] = {"b_g", "b_e"};

  std::vector<CVector> b_states;
  std::vector<std::string> b_labels;
  for (std::size_t ka = 0; ka < 2; ++ka) {
    record.h_a0_levels.push_back(h_a0.eigenvalues(static_cast<Eigen::Index>(ka)));
    const auto h_b = exact_spectrum(weighted_partial_trace(h, partition.b(), detail::pure(h_a0.state(ka))));
    detail::note_degeneracy(h_b, 2, std::string("H_b(") + a_names[ka] + ")", record);
    for (std::size_t kb = 0; kb < 2; ++kb) {
      b_states.push_back(h_b.state(kb));
      b_labels.push_back(std::string(b_names[kb]) + "(" + a_names[ka] + ")");
      record.b_levels.push_back(h_b.eigenvalues(static_cast<Eigen::Index>(kb)));
    }
  }

  struct Entry {
    CVector vector;
    CmfCandidate info;
  };
  std::vector<Entry> primary;
  std::vector<Entry> secondary;
  for (std::size_t j = 0; j < b_states.size(); ++j) {
    const auto h_a1 = exact_spectrum(weighted_partial_trace(h, partition.a(), detail::pure(b_states[j])));
    detail::note_degeneracy(h_a1, 2, "H_a1[" + b_labels[j] + "]", record);
    for (std::size_t k = 0; k < 2; ++k) {
      record.h_a1_levels.push_back(h_a1.eigenvalues(static_cast<Eigen::Index>(k)));
      CVector v = detail::embed_product(h_a1.state(k), b_states[j], partition);
      const double e = expectation(h, v);
      Entry entry{std::move(v), {"a1[" + b_labels[j] + "]#" + std::to_string(k), e, k == 1, false}};
      (k == 0 ? primary : secondary).push_back(std::move(entry));
    }
  }
  auto by_energy = [](const Entry& x, const Entry& y) {
    if (x.info.energy != y.info.energy) return x.info.energy < y.info.energy;
    return detail::lexicographically_less(x.vector, y.vector);
  };
  std::ranges::stable_sort(primary, by_energy);
  std::ranges::stable_sort(secondary, by_energy);

  constexpr std::size_t kTarget = 4;
  constexpr double kDropThreshold = 1e-8;
  std::vector<CVector> basis;
  auto consider = [&](Entry& entry) {
    if (basis.size() < kTarget) {
      CVector v = entry.vector;
      for (const auto& u : basis) v -= u * u.dot(v);
      const double norm = v.norm();
      if (norm > kDropThreshold) {
        basis.push_back(v / norm);
        entry.info.kept = true;
      }
    }
    record.candidates.push_back(entry.info);
  };
  for (auto& e : primary) consider(e);
  if (basis.size() < kTarget) {
    record.notes.push_back("primary candidates rank " + std::to_string(basis.size()) + "; fallback used");
    for (auto& e : secondary) {
      if (basis.size() >= kTarget) break;
      consider(e);
    }
  }
  if (basis.size() < kTarget) throw NumericalError("CMF candidates span fewer than 4 dimensions");

  CMatrix w(dense.rows(), static_cast<Eigen::Index>(kTarget));
  for (std::size_t c = 0; c < kTarget; ++c) w.col(static_cast<Eigen::Index>(c)) = basis[c];
  const CMatrix projected = w.adjoint() * dense * w;
  return {pauli_decompose(0.5 * (projected + projected.adjoint())), w, partition, std::move(record)};
}

/// rho' = W rho W^dag.
inline DensityMatrix lift_state(const EffectiveHamiltonian& e, const DensityMatrix& reduced) {
  if (static_cast<Eigen::Index>(reduced.dimension()) != e.basis_isometry.cols()) {
    throw DimensionError("reduced state does not match the effective basis");
  }
  const CMatrix& w = e.basis_isometry;
  return DensityMatrix::from_matrix(w * reduced.matrix() * w.adjoint(), 1e-9);
}

inline StateVector lift_state(const EffectiveHamiltonian& e, const StateVector& reduced) {
  if (static_cast<Eigen::Index>(reduced.dimension()) != e.basis_isometry.cols()) {
    throw DimensionError("reduced state does not match the effective basis");
  }
  return StateVector::from_amplitudes(e.basis_isometry * reduced.amplitudes(), 1e-9);
}

}  // namespace qite
