#pragma once

#include "qite/ansatz.hpp"
#include "qite/cmf.hpp"
#include "qite/mclachlan.hpp"
#include "qite/pauli.hpp"
#include "qite/spectra.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qite {

/// dtau = c / (|h_z| l)
struct DtauAuto {
  double c = 0.8;
};

struct DtauFixed {
  double value = 0.0;
};

using DtauRule = std::variant<DtauAuto, DtauFixed>;

struct QiteConfig {
  std::size_t iterations = 4;
  DtauRule dtau = DtauAuto{};
  Route route = Route::exact();
  std::vector<double> initial_theta;
  bool record_intermediate = true;
  double stationary_tolerance = 1e-9;  // on max|B| at iteration 0
  double monotonic_tolerance = 1e-6;   // Hartree per step
};

/// Energies are evaluated as <W psi| H_original |W psi> when a reduction is active.
struct EnergyMap {
  CMatrix isometry;
  PauliHamiltonian original;

  static EnergyMap from(const EffectiveHamiltonian& e, const PauliHamiltonian& original) {
    if (e.basis_isometry.rows() != static_cast<Eigen::Index>(std::size_t{1} << original.n_qubits())) {
      throw DimensionError("isometry rows do not match the original Hamiltonian");
    }
    return {e.basis_isometry, original};
  }
};

struct QiteRecord {
  std::size_t iteration = 0;
  std::vector<double> theta;
  RMatrix a;  // empty on the final record
  RVector b;
  double energy = 0.0;
  double fidelity = 0.0;  // NaN when the reference ground state is degenerate
};

struct QiteTrajectory {
  std::vector<QiteRecord> records;
  DensityMatrix final_state = DensityMatrix::maximally_mixed(1);
  double converged_energy = 0.0;
  double exact_ground_energy = 0.0;
  double dtau = 0.0;
  bool stationary = false;
  bool degenerate_ground = false;
  std::vector<std::string> warnings;
  std::size_t iterations_used = 0;

  const QiteRecord& initial() const { return records.front(); }
  const QiteRecord& final_record() const { return records.back(); }
};

/// Mean of the weight-one Z coefficients (ZII, IZI, IIZ, ...).
inline double average_z_coefficient(const PauliHamiltonian& h) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& t : h.terms()) {
    if (t.string.weight() == 1 && t.string.x_mask() == 0) {
      sum += t.coefficient;
      ++count;
    }
  }
  if (count == 0) throw ValueError("Hamiltonian has no single-qubit Z term; use a fixed dtau");
  return sum / static_cast<double>(count);
}

inline double resolve_dtau(const DtauRule& rule, const PauliHamiltonian& h, std::size_t iterations) {
  if (const auto* fixed = std::get_if<DtauFixed>(&rule)) {
    if (!(fixed->value > 0.0)) throw ValueError("fixed dtau must be positive");
    return fixed->value;
  }
  if (iterations == 0) throw ValueError("iterations must be positive");
  const double hz = std::abs(average_z_coefficient(h));
  if (hz == 0.0) throw ValueError("average Z coefficient is zero; use a fixed dtau");
  return std::get<DtauAuto>(rule).c / (hz * static_cast<double>(iterations));
}

/// l Euler steps theta += dtau A^+ B on `h`. With `energy_map`, energies and
/// fidelities are taken in the original space and the auto dtau uses the
/// original Hamiltonian's Z coefficients.
inline QiteTrajectory run_qite(const PauliHamiltonian& h, const AnsatzBuilder& builder, const QiteConfig& config,
                               const std::optional<EnergyMap>& energy_map = std::nullopt) {
  if (config.iterations == 0) throw ValueError("iterations must be positive");
  std::vector<double> theta = config.initial_theta;
  AnsatzCircuit circuit = builder(theta);
  if (circuit.parameters.size() != theta.size()) throw ValueError("initial theta does not match the ansatz");
  if (circuit.n_system_qubits != h.n_qubits()) throw DimensionError("ansatz and Hamiltonian sizes differ");
  if (energy_map && energy_map->isometry.cols() != static_cast<Eigen::Index>(std::size_t{1} << h.n_qubits())) {
    throw DimensionError("energy map does not match the Hamiltonian");
  }

  const PauliHamiltonian& evaluation = energy_map ? energy_map->original : h;
  const SpectrumResult oracle = exact_spectrum(evaluation);
  const CVector ground = oracle.ground_state();

  QiteTrajectory out;
  out.dtau = resolve_dtau(config.dtau, evaluation, config.iterations);
  out.exact_ground_energy = oracle.ground_energy();
  out.degenerate_ground = oracle.ground_degenerate();
  if (out.degenerate_ground) out.warnings.push_back("degenerate ground state; fidelity not reported");

  Rng rng(config.route.seed);
  double previous_energy = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0;; ++t) {
    const StateVector psi = circuit.prepare();
    const CVector mapped = energy_map ? CVector(energy_map->isometry * psi.amplitudes()) : psi.amplitudes();
    QiteRecord rec;
    rec.iteration = t;
    rec.theta = theta;
    rec.energy = expectation(evaluation, mapped);
    rec.fidelity = out.degenerate_ground ? std::numeric_limits<double>::quiet_NaN() : std::norm(ground.dot(mapped));
    if (t > 0 && !config.route.sampled() && rec.energy > previous_energy + config.monotonic_tolerance) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "energy rose by %.3g Ha at iteration %zu", rec.energy - previous_energy, t);
      out.warnings.emplace_back(buf);
    }
    previous_energy = rec.energy;

    if (t == config.iterations) {
      out.final_state = DensityMatrix::from_state(StateVector::unchecked(evaluation.n_qubits(), mapped));
      out.converged_energy = rec.energy;
      out.records.push_back(std::move(rec));
      break;
    }

    const McLachlanSystem sys = compute_system(circuit, h, config.route, rng);
    const UpdateResult update = solve_update(sys, out.dtau);
    if (t == 0 && (update.stationary || sys.b_vector.cwiseAbs().maxCoeff() <= config.stationary_tolerance)) {
      out.stationary = true;
      out.warnings.push_back("stationary at the initial point (B = 0); run does not evolve");
    }
    rec.a = sys.a_matrix;
    rec.b = sys.b_vector;
    if (config.record_intermediate || t == 0) out.records.push_back(std::move(rec));

    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += update.delta(static_cast<Eigen::Index>(i));
    circuit = builder(theta);
    ++out.iterations_used;
  }
  return out;
}

struct ThetaScanPoint {
  double theta0 = 0.0;
  double energy = 0.0;
  double fidelity = 0.0;
  bool stationary = false;
};

/// run_qite from each initial angle of a 1-parameter ansatz.
inline std::vector<ThetaScanPoint> theta_scan(const PauliHamiltonian& h, const AnsatzBuilder& builder,
                                              std::span<const double> grid, QiteConfig config,
                                              const std::optional<EnergyMap>& energy_map = std::nullopt) {
  std::vector<ThetaScanPoint> out;
  out.reserve(grid.size());
  for (double theta0 : grid) {
    config.initial_theta = {theta0};
    const auto traj = run_qite(h, builder, config, energy_map);
    out.push_back({theta0, traj.converged_energy, traj.final_record().fidelity, traj.stationary});
  }
  return out;
}

}  // namespace qite
