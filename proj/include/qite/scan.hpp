#pragma once

#include "qite/ansatz.hpp"
#include "qite/cmf.hpp"
#include "qite/ham_io.hpp"
#include "qite/qite_engine.hpp"
#include "qite/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace qite {

/// Invalid run configuration, detected before any work starts.
class ManifestError : public ValueError {
 public:
  using ValueError::ValueError;
};

struct RunManifest {
  std::filesystem::path table_path;
  AnsatzKind ansatz = AnsatzKind::HardwareEfficient;
  bool cmf = false;
  CmfPartition partition;
  std::optional<std::vector<double>> r_values;  // nullopt selects every row
  QiteConfig qite;                              // empty initial_theta -> ansatz default
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;  // 0 = hardware concurrency
};

struct CurvePoint {
  double r = 0.0;
  std::string r_text;
  double e_qite = 0.0;
  double e_exact = 0.0;
  double fidelity = 0.0;
  std::size_t iterations = 0;
  bool stationary = false;
  bool degenerate = false;
  bool discontinuity = false;
  std::string error;  // non-empty when the point failed

  std::string flags() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
      if (on) s += (s.empty() ? "" : "|") + std::string(name);
    };
    add(stationary, "stationary");
    add(degenerate, "degenerate");
    add(discontinuity, "discontinuity");
    add(!error.empty(), "error");
    return s.empty() ? "-" : s;
  }
};

struct ScanResult {
  std::vector<CurvePoint> points;
  std::vector<std::optional<QiteTrajectory>> trajectories;
  std::vector<std::optional<SelectionRecord>> selections;

  bool any_error() const {
    return std::ranges::any_of(points, [](const CurvePoint& p) { return !p.error.empty(); });
  }
};

inline std::vector<double> resolved_initial_theta(const RunManifest& m) {
  return m.qite.initial_theta.empty() ? default_initial_theta(m.ansatz) : m.qite.initial_theta;
}

/// Row indices selected by the manifest, after validating it against the table.
inline std::vector<std::size_t> validate_manifest(const RunManifest& m, const MoleculeTable& table) {
  if (table.rows.empty()) throw ManifestError("table has no rows");
  if (m.r_values && m.r_values->empty()) throw ManifestError("empty R selection");
  if (m.qite.iterations == 0) throw ManifestError("iterations must be positive");
  const std::size_t ansatz_qubits = system_qubits(m.ansatz);
  if (m.cmf) {
    if (table.n_qubits != 3) throw ManifestError("CMF reduction needs a 3-qubit table");
    if (ansatz_qubits != 2) throw ManifestError("CMF produces a 2-qubit Hamiltonian; use the he or ucc-h2 ansatz");
  } else if (ansatz_qubits != table.n_qubits) {
    throw ManifestError("ansatz '" + std::string(to_string(m.ansatz)) + "' acts on " + std::to_string(ansatz_qubits) +
                        " qubits but the table has " + std::to_string(table.n_qubits) +
                        (table.n_qubits == 3 ? " (enable CMF)" : ""));
  }
  if (resolved_initial_theta(m).size() != parameter_count(m.ansatz)) {
    throw ManifestError("initial theta needs " + std::to_string(parameter_count(m.ansatz)) + " values");
  }
  if (const auto* fixed = std::get_if<DtauFixed>(&m.qite.dtau); fixed && !(fixed->value > 0.0)) {
    throw ManifestError("fixed dtau must be positive");
  }
  std::vector<std::size_t> rows;
  if (!m.r_values) {
    for (std::size_t i = 0; i < table.rows.size(); ++i) rows.push_back(i);
    return rows;
  }
  for (double r : *m.r_values) {
    try {
      rows.push_back(row_index(table, r, Interpolation::Exact));
    } catch (const ValueError& e) {
      throw ManifestError(e.what());
    }
  }
  std::ranges::sort(rows);
  if (std::ranges::adjacent_find(rows) != rows.end()) throw ManifestError("R selection lists a row twice");
  return rows;
}

struct PointOutcome {
  CurvePoint point;
  std::optional<QiteTrajectory> trajectory;
  std::optional<SelectionRecord> selection;
};

/// QITE at one table row: optional CMF reduction, then run_qite with the
/// energy evaluated against the original row.
inline PointOutcome run_point(const RunManifest& m, const MoleculeTable& table, std::size_t row,
                              std::uint64_t seed) {
  PointOutcome out;
  out.point.r = table.rows.at(row).r;
  out.point.r_text = table.rows[row].r_text;
  try {
    const PauliHamiltonian h = row_hamiltonian(table, row);
    QiteConfig config = m.qite;
    config.initial_theta = resolved_initial_theta(m);
    config.route.seed = seed;
    QiteTrajectory traj;
    if (m.cmf) {
      EffectiveHamiltonian eff = cmf_reduce(h, m.partition);
      traj = run_qite(eff.h_eff, make_builder(m.ansatz), config, EnergyMap::from(eff, h));
      out.selection = std::move(eff.selection);
    } else {
      traj = run_qite(h, make_builder(m.ansatz), config);
    }
    out.point.e_qite = traj.converged_energy;
    out.point.e_exact = traj.exact_ground_energy;
    out.point.fidelity = traj.final_record().fidelity;
    out.point.iterations = traj.iterations_used;
    out.point.stationary = traj.stationary;
    out.point.degenerate = traj.degenerate_ground;
    out.trajectory = std::move(traj);
  } catch (const std::exception& e) {
    out.point.error = e.what();
  }
  return out;
}

/// Runs every selected row on a worker pool. Row k of the selection uses seed
/// manifest.seed + k; results are stored in R order.
inline ScanResult run_scan(const RunManifest& m, const MoleculeTable& table) {
  const std::vector<std::size_t> rows = validate_manifest(m, table);
  const std::vector<bool> discontinuous = discontinuity_rows(table);
  std::vector<PointOutcome> outcomes(rows.size());

  std::size_t workers = m.jobs == 0 ? std::max(1U, std::thread::hardware_concurrency()) : m.jobs;
  workers = std::min(workers, rows.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) outcomes[k] = run_point(m, table, rows[k], m.seed + k);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  ScanResult result;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    outcomes[k].point.discontinuity = discontinuous[rows[k]];
    result.points.push_back(std::move(outcomes[k].point));
    result.trajectories.push_back(std::move(outcomes[k].trajectory));
    result.selections.push_back(std::move(outcomes[k].selection));
  }
  return result;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string describe_dtau(const DtauRule& rule) {
  if (const auto* fixed = std::get_if<DtauFixed>(&rule)) return format_number(fixed->value);
  return "auto(" + format_number(std::get<DtauAuto>(rule).c) + ")";
}

/// Resolved configuration as key=value lines, without the worker count.
inline std::string manifest_echo(const RunManifest& m) {
  std::string r = "all";
  if (m.r_values) {
    r.clear();
    for (std::size_t i = 0; i < m.r_values->size(); ++i) r += (i ? ";" : "") + format_number((*m.r_values)[i]);
  }
  std::string theta;
  const auto t0 = resolved_initial_theta(m);
  for (std::size_t i = 0; i < t0.size(); ++i) theta += (i ? ";" : "") + format_number(t0[i]);
  std::string out;
  out += "table=" + m.table_path.string() + "\n";
  out += "ansatz=" + std::string(to_string(m.ansatz)) + "\n";
  out += std::string("cmf=") + (m.cmf ? "on" : "off") + "\n";
  out += "r=" + r + "\n";
  out += "iterations=" + std::to_string(m.qite.iterations) + "\n";
  out += "dtau=" + describe_dtau(m.qite.dtau) + "\n";
  out += "route=" + m.qite.route.describe() + "\n";
  out += "seed=" + std::to_string(m.seed) + "\n";
  out += "theta0=" + theta + "\n";
  out += std::string("trace=") + (m.qite.record_intermediate ? "on" : "off") + "\n";
  return out;
}

inline std::string curve_csv(const ScanResult& result) {
  std::string out = "R,e_qite,e_exact,fidelity,iterations,flags\n";
  for (const auto& p : result.points) {
    out += p.r_text + "," + format_number(p.e_qite) + "," + format_number(p.e_exact) + "," +
           format_number(p.fidelity) + "," + std::to_string(p.iterations) + "," + p.flags() + "\n";
  }
  return out;
}

inline std::string trace_csv(const QiteTrajectory& traj) {
  const std::size_t n_theta = traj.records.front().theta.size();
  std::string out = "iter";
  for (std::size_t i = 0; i < n_theta; ++i) out += ",theta" + std::to_string(i + 1);
  out += ",energy,fidelity\n";
  for (const auto& rec : traj.records) {
    out += std::to_string(rec.iteration);
    for (double t : rec.theta) out += "," + format_number(t);
    out += "," + format_number(rec.energy) + "," + format_number(rec.fidelity) + "\n";
  }
  return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace detail

/// curve.csv, manifest.echo, trace_R<R>.csv per point when tracing, and
/// cmf_R<R>.txt selection records when CMF is on.
inline void emit_outputs(const ScanResult& result, const RunManifest& m, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  detail::write_file(dir / "curve.csv", curve_csv(result));
  detail::write_file(dir / "manifest.echo", manifest_echo(m));
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const std::string& r = result.points[k].r_text;
    if (m.qite.record_intermediate && result.trajectories[k]) {
      detail::write_file(dir / ("trace_R" + r + ".csv"), trace_csv(*result.trajectories[k]));
    }
    if (result.selections[k]) detail::write_file(dir / ("cmf_R" + r + ".txt"), result.selections[k]->serialize());
  }
}

struct ExcitedResult {
  EffectiveHamiltonian reduction;
  double ground_input_energy = 0.0;  // <H_eff> of the ground state that was lifted
  double e_max = 0.0;
  PauliHamiltonian lifted;
  SpectrumResult reduced_spectrum;  // of h_eff
  QiteTrajectory trajectory;        // on the lifted h_eff
};

/// First excited state at one 3-qubit row: CMF reduction, ground state of
/// h_eff (exact or from a ground-state QITE run with `ground_config`),
/// Gershgorin lift, then QITE on the lifted h_eff with `excited_config`.
inline ExcitedResult excited_state_run(const PauliHamiltonian& h, AnsatzKind ansatz, const QiteConfig& ground_config,
                                       const QiteConfig& excited_config, bool exact_ground) {
  EffectiveHamiltonian eff = cmf_reduce(h);
  const SpectrumResult spectrum = exact_spectrum(eff.h_eff);
  DensityMatrix ground = DensityMatrix::maximally_mixed(eff.h_eff.n_qubits());
  if (exact_ground) {
    ground = DensityMatrix::from_state(StateVector::from_amplitudes(spectrum.ground_state(), 1e-9));
  } else {
    const auto builder = make_builder(ansatz);
    const auto traj = run_qite(eff.h_eff, builder, ground_config, EnergyMap::from(eff, h));
    ground = DensityMatrix::from_state(builder(traj.final_record().theta).prepare());
  }
  const double e_max = gershgorin_emax(to_dense_matrix(eff.h_eff)).e_max;
  PauliHamiltonian lifted = lift_ground_state(eff.h_eff, ground, e_max);
  QiteTrajectory traj = run_qite(lifted, make_builder(ansatz), excited_config);
  const double e0 = expectation(eff.h_eff, ground);
  return {std::move(eff), e0, e_max, std::move(lifted), spectrum, std::move(traj)};
}

}  // namespace qite
