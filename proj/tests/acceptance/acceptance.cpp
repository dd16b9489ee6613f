// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "qite/qite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace qite;
using std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += " (over time limit " + format_number(limit_s) + " s)";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const MoleculeTable& lih_table() {
  static const MoleculeTable t = load_table(std::string(QITE_DATA_DIR) + "/lih_sto6g.csv");
  return t;
}

PauliHamiltonian lih(double r) { return hamiltonian_at(lih_table(), r); }

PauliHamiltonian h2() {
  static const MoleculeTable t = load_table(std::string(QITE_DATA_DIR) + "/h2_synthetic.csv");
  return hamiltonian_at(t, 0.7);
}

QiteConfig config(std::vector<double> theta, std::size_t iterations = 4) {
  QiteConfig c;
  c.initial_theta = std::move(theta);
  c.iterations = iterations;
  return c;
}

std::vector<std::vector<double>> random_thetas(std::size_t count, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-pi, pi);
  std::vector<std::vector<double>> out(count, std::vector<double>(size));
  for (auto& t : out) std::ranges::generate(t, [&] { return angle(rng); });
  return out;
}

std::vector<double> theta_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 32; ++k) grid.push_back(2 * pi * k / 32);
  return grid;
}

// One McLachlan evaluation point used by the route-equivalence check.
struct Case {
  std::string name;
  AnsatzCircuit circuit;
  PauliHamiltonian h;
};

std::vector<Case> route_cases() {
  std::vector<Case> cases;
  for (double t : theta_grid()) cases.push_back({"ucc-h2", build_ucc_h2(t), h2()});
  const auto h15 = lih(1.5);
  cases.push_back({"ucc-lih", build_ucc_lih(std::vector<double>{1.0, 1.0}), h15});
  for (const auto& t : random_thetas(10, 2, 2)) cases.push_back({"ucc-lih", build_ucc_lih(t), h15});
  const auto eff = cmf_reduce(h15);
  const auto he = make_builder(AnsatzKind::HardwareEfficient);
  for (const auto& rec :
       run_qite(eff.h_eff, he, config(std::vector<double>(6, 0.5)), EnergyMap::from(eff, h15)).records) {
    cases.push_back({"he", he(rec.theta), eff.h_eff});
  }
  const auto ucc = make_builder(AnsatzKind::UccLiH);
  for (const auto& rec : run_qite(h15, ucc, config({1.0, 1.0})).records) cases.push_back({"ucc-lih", ucc(rec.theta), h15});
  return cases;
}

double max_entry_difference(const McLachlanSystem& a, const McLachlanSystem& b) {
  return std::max((a.a_matrix - b.a_matrix).cwiseAbs().maxCoeff(), (a.b_vector - b.b_vector).cwiseAbs().maxCoeff());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
  criterion(1, "ucc-h2 analytic A", 1.0, [] {
    double worst = 0.0;
    for (double t : theta_grid()) {
      const auto sys = compute_exact(build_ucc_h2(t), h2());
      if (sys.a_matrix.rows() != 1) return Outcome{false, "A is not 1x1"};
      worst = std::max(worst, std::abs(sys.a_matrix(0, 0) - 0.25));
    }
    return Outcome{worst <= 1e-12, "max |A - 0.25| = " + fmt(worst) + " over 32 angles"};
  });

  criterion(2, "ucc-lih A off-diagonal", 0, [] {
    auto thetas = random_thetas(10, 2, 1);
    thetas.insert(thetas.begin(), {1.0, 1.0});
    double worst = 0.0;
    for (const auto& t : thetas) worst = std::max(worst, std::abs(compute_exact(build_ucc_lih(t), lih(1.5)).a_matrix(0, 1)));
    return Outcome{worst <= 1e-10, "max |A12| = " + fmt(worst) + " over 11 angle pairs"};
  });

  criterion(3, "cmf fidelity gate", 10.0, [] {
    double worst_f = 1.0;
    double worst_e = 0.0;
    for (double r : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      const auto h = lih(r);
      const auto eff = cmf_reduce(h);
      const auto full = exact_spectrum(h);
      const auto reduced = exact_spectrum(eff.h_eff);
      const CVector lifted = eff.basis_isometry * reduced.ground_state();
      worst_f = std::min(worst_f, std::norm(full.ground_state().dot(lifted)));
      worst_e = std::max(worst_e, std::abs(reduced.ground_energy() - full.ground_energy()));
    }
    return Outcome{worst_f > 0.999 && worst_e <= 1e-3,
                   "min fidelity = " + format_number(worst_f) + ", max |dE0| = " + fmt(worst_e)};
  });

  criterion(4, "lih he+cmf convergence", 5.0, [] {
    const auto h = lih(1.5);
    const auto eff = cmf_reduce(h);
    const auto traj = run_qite(eff.h_eff, make_builder(AnsatzKind::HardwareEfficient),
                               config(std::vector<double>(6, 0.5)), EnergyMap::from(eff, h));
    const double f = traj.final_record().fidelity;
    const double de = std::abs(traj.converged_energy - traj.exact_ground_energy);
    return Outcome{f >= 0.98 && de <= 1e-2, "fidelity " + format_number(traj.initial().fidelity) + " -> " +
                                                format_number(f) + ", |E - E0| = " + fmt(de)};
  });

  criterion(5, "lih ucc convergence", 5.0, [] {
    const auto traj = run_qite(lih(1.5), make_builder(AnsatzKind::UccLiH), config({1.0, 1.0}));
    const double f = traj.final_record().fidelity;
    return Outcome{f >= 0.98, "fidelity " + format_number(traj.initial().fidelity) + " -> " + format_number(f)};
  });

  criterion(6, "full lih curve", 180.0, [] {
    RunManifest m;
    m.table_path = std::string(QITE_DATA_DIR) + "/lih_sto6g.csv";
    m.ansatz = AnsatzKind::HardwareEfficient;
    m.cmf = true;
    m.qite.record_intermediate = false;
    const auto result = run_scan(m, lih_table());
    double worst = 0.0;
    std::string worst_r;
    std::string skipped;
    for (const auto& p : result.points) {
      if (!p.error.empty()) return Outcome{false, "R=" + p.r_text + ": " + p.error};
      if (p.discontinuity) {
        skipped += (skipped.empty() ? "" : ",") + p.r_text;
        continue;
      }
      const double err = std::abs(p.e_qite - p.e_exact);
      if (err > worst) {
        worst = err;
        worst_r = p.r_text;
      }
    }
    return Outcome{worst <= 2e-2 && result.points.size() == 50, std::to_string(result.points.size()) +
                                                                    " rows, max |e_qite - e_exact| = " + fmt(worst) +
                                                                    " at R=" + worst_r + ", flagged " + skipped};
  });

  criterion(7, "h2 initial-angle landscape", 0, [] {
    const auto h = h2();
    const double e0 = exact_spectrum(h).ground_energy();
    const auto points = theta_scan(h, make_builder(AnsatzKind::UccH2), theta_grid(), config({0.0}));
    double worst = 0.0;
    bool pi_stationary = false;
    for (const auto& p : points) {
      if (std::abs(p.theta0 - pi) > 0.2) worst = std::max(worst, std::abs(p.energy - e0));
      if (p.theta0 == pi) pi_stationary = p.stationary;
    }
    return Outcome{worst <= 1e-2 && pi_stationary,
                   "max |E - E0| off pi = " + fmt(worst) + ", pi stationary = " + (pi_stationary ? "yes" : "no")};
  });

  criterion(8, "hadamard route equivalence", 0, [] {
    double exact_diff = 0.0;
    double worst_z = 0.0;
    const auto cases = route_cases();
    std::uint64_t seed = 100;
    for (const auto& c : cases) {
      const auto reference = compute_exact(c.circuit, c.h);
      Rng unused(0);
      exact_diff = std::max(exact_diff, max_entry_difference(compute_hadamard(c.circuit, c.h, Route::hadamard_exact(), unused), reference));
      exact_diff =
          std::max(exact_diff, max_entry_difference(compute_hadamard(c.circuit, c.h, Route::hadamard_exact(true), unused), reference));
      const auto sampled = compute_sampled(c.circuit, c.h, 100000, seed++);
      for (Eigen::Index i = 0; i < reference.a_matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < reference.a_matrix.cols(); ++j) {
          const double dev = std::abs(sampled.a_matrix(i, j) - reference.a_matrix(i, j));
          if (dev > 1e-12) worst_z = std::max(worst_z, dev / sampled.a_stderr(i, j));
        }
        const double dev = std::abs(sampled.b_vector(i) - reference.b_vector(i));
        if (dev > 1e-12) worst_z = std::max(worst_z, dev / sampled.b_stderr(i));
      }
    }
    return Outcome{exact_diff <= 1e-10 && worst_z <= 5.0, std::to_string(cases.size()) +
                                                              " systems, exact-mode max diff = " + fmt(exact_diff) +
                                                              ", shots max deviation = " + fmt(worst_z) + " SE"};
  });

  criterion(9, "gershgorin lift", 0, [] {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    int violations = 0;
    for (int rep = 0; rep < 100; ++rep) {
      CMatrix m(8, 8);
      for (Eigen::Index i = 0; i < 8; ++i) {
        for (Eigen::Index j = 0; j < 8; ++j) m(i, j) = Complex(g(rng), g(rng));
      }
      m = (0.5 * (m + m.adjoint())).eval();
      if (gershgorin_emax(m).e_max < exact_spectrum(m).eigenvalues.maxCoeff()) ++violations;
    }
    const auto h = lih(1.5);
    QiteConfig ground = config(default_initial_theta(AnsatzKind::HardwareEfficient));
    QiteConfig excited = config(ground.initial_theta, 20);
    excited.dtau = DtauFixed{resolve_dtau(DtauAuto{}, h, 4)};
    const auto r = excited_state_run(h, AnsatzKind::HardwareEfficient, ground, excited, true);
    const double e1 = r.reduced_spectrum.eigenvalues(1);
    const double lift_err = std::abs(exact_spectrum(r.lifted).ground_energy() - e1);
    const double qite_err = std::abs(r.trajectory.converged_energy - e1);
    return Outcome{violations == 0 && lift_err <= 1e-9 && qite_err <= 1e-2,
                   std::to_string(violations) + "/100 bound violations, lifted E0 vs E1 = " + fmt(lift_err) +
                       ", QITE excited error = " + fmt(qite_err)};
  });

  criterion(10, "numerical hygiene", 0, [] {
    double worst_fd = 0.0;
    std::uint64_t seed = 10;
    for (auto kind : {AnsatzKind::UccH2, AnsatzKind::UccLiH, AnsatzKind::HardwareEfficient}) {
      const auto build = make_builder(kind);
      for (const auto& theta : random_thetas(5, parameter_count(kind), seed++)) {
        const auto base = build(theta);
        for (std::size_t i = 0; i < theta.size(); ++i) {
          const double eps = 1e-5;
          auto plus = theta;
          auto minus = theta;
          plus[i] += eps;
          minus[i] -= eps;
          const CVector fd = (build(plus).prepare().amplitudes() - build(minus).prepare().amplitudes()) / (2 * eps);
          worst_fd = std::max(worst_fd, (fd - base.derivative(i)).cwiseAbs().maxCoeff());
        }
      }
    }

    double worst_norm = 0.0;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-pi, pi);
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<std::size_t> qubit(0, 2);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<Gate> gates;
      for (int k = 0; k < 200; ++k) {
        const std::size_t q = qubit(rng);
        const std::size_t t = (q + 1 + qubit(rng) % 2) % 3;
        switch (pick(rng)) {
          case 0: gates.push_back(Gate::rx(q, angle(rng))); break;
          case 1: gates.push_back(Gate::ry(q, angle(rng))); break;
          case 2: gates.push_back(Gate::rz(q, angle(rng))); break;
          case 3: gates.push_back(Gate::h(q)); break;
          case 4: gates.push_back(Gate::cnot(q, t)); break;
          default: gates.push_back(Gate::cz(q, t)); break;
        }
      }
      const CMatrix u = circuit_unitary(gates, 3);
      worst_norm = std::max(worst_norm, (u.adjoint() * u - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff());
      const auto out = run_circuit(StateVector::basis("000"), gates);
      worst_norm = std::max(worst_norm, std::abs(out.amplitudes().norm() - 1.0));
    }
    for (const auto& wc : build_hadamard_circuits(build_hardware_efficient(std::vector<double>(6, 0.5)), cmf_reduce(lih(1.5)).h_eff)) {
      const CMatrix u = circuit_unitary(wc.circuit.gates, wc.circuit.n_qubits);
      worst_norm = std::max(worst_norm, (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff());
    }

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qite_acceptance_csv";
    fs::remove_all(dir);
    RunManifest m;
    m.table_path = std::string(QITE_DATA_DIR) + "/lih_sto6g.csv";
    m.ansatz = AnsatzKind::HardwareEfficient;
    m.cmf = true;
    m.r_values = std::vector<double>{1.0, 2.5, 4.0};
    m.qite.route = Route::hadamard_shots(5000, 0);
    m.qite.record_intermediate = true;
    m.seed = 1234;
    emit_outputs(run_scan(m, lih_table()), m, dir / "a");
    emit_outputs(run_scan(m, lih_table()), m, dir / "b");
    std::size_t files = 0;
    bool identical = true;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
      ++files;
      identical = identical && slurp(entry.path()) == slurp(dir / "b" / entry.path().filename());
    }
    fs::remove_all(dir);

    return Outcome{worst_fd <= 1e-6 && worst_norm <= 1e-10 && identical && files > 0,
                   "max FD error = " + fmt(worst_fd) + ", max norm drift = " + fmt(worst_norm) + ", " +
                       std::to_string(files) + " output files " + (identical ? "identical" : "DIFFER")};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
