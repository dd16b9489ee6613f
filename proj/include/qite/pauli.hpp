#pragma once

#include "qite/state.hpp"
#include "qite/types.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qite {

/// Tensor product of single-qubit Paulis, one letter per qubit (q0 leftmost).
///
/// Internally the string is the phase-carrying product i^{#Y} X^x Z^z, so a
/// basis state |b> maps to i^{#Y} (-1)^{popcount(b & z)} |b ^ x>.
class PauliString {
 public:
  explicit PauliString(std::string_view letters) : letters_(letters) {
    if (letters_.empty()) throw ValueError("Pauli string must have at least one letter");
    if (letters_.size() > 62) throw DimensionError("Pauli string too long");
    const std::size_t n = letters_.size();
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t bit = qubit_bit(q, n);
      switch (letters_[q]) {
        case 'I': break;
        case 'X': x_mask_ |= bit; break;
        case 'Y': x_mask_ |= bit; z_mask_ |= bit; ++y_count_; break;
        case 'Z': z_mask_ |= bit; break;
        default:
          throw ValueError("invalid Pauli letter '" + std::string(1, letters_[q]) + "' in '" + letters_ + "'");
      }
    }
  }

  static PauliString identity(std::size_t n_qubits) { return PauliString(std::string(n_qubits, 'I')); }

  std::size_t n_qubits() const noexcept { return letters_.size(); }
  const std::string& letters() const noexcept { return letters_; }
  char operator[](std::size_t qubit) const { return letters_.at(qubit); }
  std::size_t x_mask() const noexcept { return x_mask_; }
  std::size_t z_mask() const noexcept { return z_mask_; }
  bool is_identity() const noexcept { return x_mask_ == 0 && z_mask_ == 0; }
  std::size_t weight() const noexcept {
    return static_cast<std::size_t>(std::ranges::count_if(letters_, [](char c) { return c != 'I'; }));
  }

  /// i^{#Y}
  Complex y_phase() const noexcept {
    static constexpr Complex kPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return kPowers[y_count_ % 4];
  }

  /// sigma |basis> = phase * |target>.
  std::pair<Complex, std::size_t> act(std::size_t basis) const noexcept {
    const bool odd = std::popcount(basis & z_mask_) % 2 != 0;
    return {odd ? -y_phase() : y_phase(), basis ^ x_mask_};
  }

  /// Letters restricted to the given qubits, in the order given.
  PauliString restricted(std::span<const std::size_t> qubits) const {
    std::string out;
    out.reserve(qubits.size());
    for (std::size_t q : qubits) out.push_back(letters_.at(q));
    return PauliString(out);
  }

  friend bool operator==(const PauliString& a, const PauliString& b) noexcept { return a.letters_ == b.letters_; }
  friend std::strong_ordering operator<=>(const PauliString& a, const PauliString& b) noexcept {
    return a.letters_ <=> b.letters_;
  }

 private:
  std::string letters_;
  std::size_t x_mask_ = 0;
  std::size_t z_mask_ = 0;
  std::size_t y_count_ = 0;
};

/// sigma |psi> for an amplitude vector of matching dimension.
inline CVector apply_pauli(const PauliString& sigma, const CVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != (std::size_t{1} << sigma.n_qubits())) {
    throw DimensionError("Pauli string and state dimensions differ");
  }
  CVector out(psi.size());
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    const auto [phase, target] = sigma.act(static_cast<std::size_t>(b));
    out(static_cast<Eigen::Index>(target)) = phase * psi(b);
  }
  return out;
}

struct PauliTerm {
  double coefficient;
  PauliString string;
};

/// Real-weighted sum of Pauli strings in canonical form: every string appears
/// once, in order of first appearance, and |coefficient| >= 1e-14.
class PauliHamiltonian {
 public:
  static constexpr double kDropTolerance = 1e-14;

  PauliHamiltonian(std::size_t n_qubits, const std::vector<PauliTerm>& terms) : n_qubits_(n_qubits) {
    if (n_qubits == 0) throw ValueError("Hamiltonian needs at least one qubit");
    std::map<std::string, std::size_t> index;
    for (const auto& term : terms) {
      if (term.string.n_qubits() != n_qubits) {
        throw DimensionError("term '" + term.string.letters() + "' does not act on " + std::to_string(n_qubits) +
                             " qubits");
      }
      if (!std::isfinite(term.coefficient)) throw ValueError("non-finite coefficient");
      auto [it, inserted] = index.try_emplace(term.string.letters(), terms_.size());
      if (inserted) {
        terms_.push_back(term);
      } else {
        terms_[it->second].coefficient += term.coefficient;
      }
    }
    std::erase_if(terms_, [](const PauliTerm& t) { return std::abs(t.coefficient) < kDropTolerance; });
  }

  /// Convenience: {{"XI", 0.5}, {"ZZ", -1.0}}.
  static PauliHamiltonian from_labels(const std::vector<std::pair<std::string, double>>& labelled) {
    if (labelled.empty()) throw ValueError("from_labels needs at least one term to fix the qubit count");
    std::vector<PauliTerm> terms;
    terms.reserve(labelled.size());
    for (const auto& [label, c] : labelled) terms.push_back({c, PauliString(label)});
    return PauliHamiltonian(labelled.front().first.size(), terms);
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  double coefficient(std::string_view letters) const noexcept {
    for (const auto& t : terms_) {
      if (t.string.letters() == letters) return t.coefficient;
    }
    return 0.0;
  }

  PauliHamiltonian scaled(double factor) const {
    std::vector<PauliTerm> out = terms_;
    for (auto& t : out) t.coefficient *= factor;
    return PauliHamiltonian(n_qubits_, out);
  }

  /// H |psi>
  CVector apply(const CVector& psi) const {
    if (static_cast<std::size_t>(psi.size()) != (std::size_t{1} << n_qubits_)) {
      throw DimensionError("Hamiltonian and state dimensions differ");
    }
    CVector out = CVector::Zero(psi.size());
    for (const auto& t : terms_) {
      for (Eigen::Index b = 0; b < psi.size(); ++b) {
        const auto [phase, target] = t.string.act(static_cast<std::size_t>(b));
        out(static_cast<Eigen::Index>(target)) += t.coefficient * phase * psi(b);
      }
    }
    return out;
  }

 private:
  std::size_t n_qubits_;
  std::vector<PauliTerm> terms_;
};

inline CMatrix to_dense_matrix(const PauliString& sigma) {
  if (sigma.n_qubits() > kMaxDenseQubits) {
    throw DimensionError("dense realization capped at " + std::to_string(kMaxDenseQubits) + " qubits");
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << sigma.n_qubits());
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const auto [phase, target] = sigma.act(static_cast<std::size_t>(b));
    m(static_cast<Eigen::Index>(target), b) = phase;
  }
  return m;
}

inline CMatrix to_dense_matrix(const PauliHamiltonian& h) {
  if (h.n_qubits() > kMaxDenseQubits) {
    throw DimensionError("dense realization capped at " + std::to_string(kMaxDenseQubits) + " qubits, got " +
                         std::to_string(h.n_qubits()));
  }
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << h.n_qubits());
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& t : h.terms()) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const auto [phase, target] = t.string.act(static_cast<std::size_t>(b));
      m(static_cast<Eigen::Index>(target), b) += t.coefficient * phase;
    }
  }
  return m;
}

namespace detail {

inline double real_checked(Complex value, const char* what) {
  if (std::abs(value.imag()) > 1e-10) {
    throw NumericalError(std::string(what) + " has imaginary residual " + std::to_string(value.imag()));
  }
  return value.real();
}

}  // namespace detail

/// <psi|H|psi> for a raw amplitude vector.
inline double expectation(const PauliHamiltonian& h, const CVector& psi) {
  return detail::real_checked(psi.dot(h.apply(psi)), "expectation");
}

inline double expectation(const PauliHamiltonian& h, const StateVector& psi) {
  if (psi.n_qubits() != h.n_qubits()) throw DimensionError("expectation: qubit counts differ");
  return expectation(h, psi.amplitudes());
}

/// Tr(rho H) = sum_l h_l sum_b phase_l(b) rho[b, b ^ x_l].
inline double expectation(const PauliHamiltonian& h, const DensityMatrix& rho) {
  if (rho.n_qubits() != h.n_qubits()) throw DimensionError("expectation: qubit counts differ");
  const CMatrix& m = rho.matrix();
  Complex total = 0.0;
  for (const auto& t : h.terms()) {
    Complex partial = 0.0;
    for (Eigen::Index b = 0; b < m.rows(); ++b) {
      const auto [phase, target] = t.string.act(static_cast<std::size_t>(b));
      partial += phase * m(b, static_cast<Eigen::Index>(target));
    }
    total += t.coefficient * partial;
  }
  return detail::real_checked(total, "expectation");
}

/// Tr(rho sigma) for a single Pauli string.
inline Complex pauli_trace(const PauliString& sigma, const DensityMatrix& rho) {
  if (sigma.n_qubits() != rho.n_qubits()) throw DimensionError("pauli_trace: qubit counts differ");
  const CMatrix& m = rho.matrix();
  Complex total = 0.0;
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    const auto [phase, target] = sigma.act(static_cast<std::size_t>(b));
    total += phase * m(b, static_cast<Eigen::Index>(target));
  }
  return total;
}

/// Tr_complement((I_sub (x) weight) H) as a Hamiltonian on `subsystem`.
///
/// Qubits of the result follow the order of `subsystem`; the weight's qubits
/// are the complement in ascending order.
inline PauliHamiltonian weighted_partial_trace(const PauliHamiltonian& h, std::span<const std::size_t> subsystem,
                                               const DensityMatrix& weight) {
  const std::size_t n = h.n_qubits();
  std::vector<bool> in_sub(n, false);
  for (std::size_t q : subsystem) {
    if (q >= n) throw ValueError("subsystem qubit " + std::to_string(q) + " out of range");
    if (in_sub[q]) throw ValueError("subsystem qubit " + std::to_string(q) + " listed twice");
    in_sub[q] = true;
  }
  std::vector<std::size_t> complement;
  for (std::size_t q = 0; q < n; ++q) {
    if (!in_sub[q]) complement.push_back(q);
  }
  if (subsystem.empty() || complement.empty()) {
    throw ValueError("partial trace needs a non-empty subsystem and a non-empty complement");
  }
  if (weight.n_qubits() != complement.size()) {
    throw DimensionError("weight acts on " + std::to_string(weight.n_qubits()) + " qubits, complement has " +
                         std::to_string(complement.size()));
  }
  std::vector<PauliTerm> reduced;
  reduced.reserve(h.size());
  for (const auto& t : h.terms()) {
    const Complex scalar = pauli_trace(t.string.restricted(complement), weight);
    const double value = detail::real_checked(t.coefficient * scalar, "weighted partial trace");
    reduced.push_back({value, t.string.restricted(subsystem)});
  }
  return PauliHamiltonian(subsystem.size(), reduced);
}

/// Pauli coefficients h_l = Tr(sigma_l m) / 2^k of a Hermitian matrix, strings
/// enumerated in lexicographic I < X < Y < Z order.
inline PauliHamiltonian pauli_decompose(const CMatrix& m, double hermitian_tolerance = 1e-9) {
  const auto dim = static_cast<std::size_t>(m.rows());
  if (m.rows() != m.cols() || dim < 2 || !std::has_single_bit(dim)) {
    throw DimensionError("pauli_decompose needs a square power-of-two matrix");
  }
  const std::size_t k = static_cast<std::size_t>(std::countr_zero(dim));
  if (k > 8) throw DimensionError("pauli_decompose capped at 8 qubits");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > hermitian_tolerance) {
    throw ValueError("pauli_decompose: matrix is not Hermitian within tolerance");
  }
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<PauliTerm> terms;
  const std::size_t count = std::size_t{1} << (2 * k);
  std::string letters(k, 'I');
  for (std::size_t code = 0; code < count; ++code) {
    for (std::size_t q = 0; q < k; ++q) letters[q] = kLetters[(code >> (2 * (k - 1 - q))) & 3U];
    const PauliString sigma(letters);
    Complex trace = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const auto [phase, target] = sigma.act(c);
      trace += phase * m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(target));
    }
    const double value = trace.real() / static_cast<double>(dim);
    if (std::abs(value) >= PauliHamiltonian::kDropTolerance) terms.push_back({value, sigma});
  }
  return PauliHamiltonian(k, terms);
}

}  // namespace qite
