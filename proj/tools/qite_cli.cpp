// qite: potential-energy scans, single points, spectra and excited states from
// Pauli coefficient tables.

#include "qite/qite.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPointFailure = 1;
constexpr int kExitInvalid = 2;

struct Options {
  std::string table = std::string(QITE_DATA_DIR) + "/lih_sto6g.csv";
  std::string ansatz = "he";
  bool cmf = false;
  std::string r = "all";
  std::size_t iters = 4;
  std::string dtau = "auto";
  std::string route = "exact";
  std::string readout;
  std::uint64_t seed = 0;
  std::string theta0;
  std::string out;
  bool trace = false;
  std::size_t jobs = 1;
  bool exact_ground = false;
  std::size_t dtau_iters = 4;
  std::size_t points = 32;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    if (!qite::detail::parse_number(std::string(qite::detail::trim(cell)), v)) {
      throw qite::ManifestError(std::string("bad ") + what + " value '" + cell + "'");
    }
    values.push_back(v);
  }
  return values;
}

qite::Route parse_route(const Options& o) {
  qite::Route route;
  if (o.route == "exact") {
    route = qite::Route::exact();
  } else if (o.route == "hadamard") {
    route = qite::Route::hadamard_exact();
  } else if (o.route.starts_with("shots:")) {
    double shots = 0.0;
    if (!qite::detail::parse_number(o.route.substr(6), shots) || shots < 1 || shots != std::floor(shots)) {
      throw qite::ManifestError("bad shot count in --route '" + o.route + "'");
    }
    route = qite::Route::hadamard_shots(static_cast<std::uint64_t>(shots), o.seed);
  } else {
    throw qite::ManifestError("--route must be exact, hadamard or shots:N");
  }
  if (!o.readout.empty()) {
    const auto f = parse_list(o.readout, "--readout");
    if (f.size() != 2) throw qite::ManifestError("--readout takes F_G,F_E");
    if (!route.sampled()) throw qite::ManifestError("--readout needs --route shots:N");
    route.readout = qite::ReadoutError{f[0], f[1]};
  }
  return route;
}

qite::DtauRule parse_dtau(const std::string& text) {
  if (text == "auto") return qite::DtauAuto{};
  double v = 0.0;
  if (!qite::detail::parse_number(text, v) || !(v > 0.0)) throw qite::ManifestError("--dtau must be auto or > 0");
  return qite::DtauFixed{v};
}

qite::RunManifest build_manifest(const Options& o) {
  qite::RunManifest m;
  m.table_path = o.table;
  try {
    m.ansatz = qite::parse_ansatz_kind(o.ansatz);
  } catch (const qite::ValueError& e) {
    throw qite::ManifestError(e.what());
  }
  m.cmf = o.cmf;
  if (o.r != "all") m.r_values = o.r.empty() ? std::vector<double>{} : parse_list(o.r, "--r");
  m.qite.iterations = o.iters;
  m.qite.dtau = parse_dtau(o.dtau);
  m.qite.route = parse_route(o);
  m.qite.record_intermediate = o.trace;
  if (!o.theta0.empty()) m.qite.initial_theta = parse_list(o.theta0, "--theta0");
  m.output_dir = o.out;
  m.seed = o.seed;
  m.jobs = o.jobs;
  return m;
}

void add_run_options(CLI::App* app, Options& o) {
  app->add_option("--table", o.table, "Coefficient table (CSV or TSV)");
  app->add_option("--ansatz", o.ansatz, "ucc-h2, ucc-lih or he");
  app->add_flag("--cmf", o.cmf, "Reduce 3-qubit rows to 2 qubits with cluster mean field");
  app->add_option("--r", o.r, "Comma-separated bond distances, or all");
  app->add_option("--iters", o.iters, "QITE iterations l");
  app->add_option("--dtau", o.dtau, "auto (0.8/(|h_z| l)) or a fixed step");
  app->add_option("--route", o.route, "exact, hadamard or shots:N");
  app->add_option("--readout", o.readout, "Readout fidelities F_G,F_E (shot route only)");
  app->add_option("--seed", o.seed, "Base seed; row k uses seed + k");
  app->add_option("--theta0", o.theta0, "Comma-separated initial parameters");
  app->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
}

void print_point(const qite::CurvePoint& p) {
  std::printf("R=%s e_qite=%s e_exact=%s fidelity=%s iterations=%zu flags=%s\n", p.r_text.c_str(),
              qite::format_number(p.e_qite).c_str(), qite::format_number(p.e_exact).c_str(),
              qite::format_number(p.fidelity).c_str(), p.iterations, p.flags().c_str());
  if (!p.error.empty()) std::fprintf(stderr, "R=%s: %s\n", p.r_text.c_str(), p.error.c_str());
}

int cmd_scan(const Options& o) {
  const auto m = build_manifest(o);
  const auto table = qite::load_table(m.table_path);
  const auto result = qite::run_scan(m, table);
  if (!o.out.empty()) qite::emit_outputs(result, m, o.out);
  std::cout << qite::curve_csv(result);
  for (const auto& p : result.points) {
    if (!p.error.empty()) std::fprintf(stderr, "R=%s: %s\n", p.r_text.c_str(), p.error.c_str());
  }
  return result.any_error() ? kExitPointFailure : kExitOk;
}

int cmd_point(Options o) {
  if (o.r == "all" || parse_list(o.r, "--r").size() != 1) throw qite::ManifestError("point needs a single --r value");
  o.trace = true;
  const auto m = build_manifest(o);
  const auto table = qite::load_table(m.table_path);
  const auto result = qite::run_scan(m, table);
  if (!o.out.empty()) qite::emit_outputs(result, m, o.out);
  if (result.trajectories.front()) {
    std::cout << qite::trace_csv(*result.trajectories.front());
    for (const auto& w : result.trajectories.front()->warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  print_point(result.points.front());
  return result.any_error() ? kExitPointFailure : kExitOk;
}

void print_levels(const char* name, const qite::SpectrumResult& s) {
  std::printf("%s", name);
  for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) std::printf(" %s", qite::format_number(s.eigenvalues(k)).c_str());
  std::printf("\n");
}

int cmd_spectrum(const Options& o) {
  const auto table = qite::load_table(o.table);
  const auto rs = parse_list(o.r == "all" ? "" : o.r, "--r");
  if (rs.size() != 1) throw qite::ManifestError("spectrum needs a single --r value");
  const auto h = qite::hamiltonian_at(table, rs.front());
  const auto dense = qite::to_dense_matrix(h);
  print_levels("eigenvalues", qite::exact_spectrum(dense));
  std::printf("gershgorin_emax %s\n", qite::format_number(qite::gershgorin_emax(dense).e_max).c_str());
  std::printf("pauli_norm_bound %s\n", qite::format_number(qite::pauli_norm_bound(h)).c_str());
  if (o.cmf) {
    const auto eff = qite::cmf_reduce(h);
    print_levels("h_eff_eigenvalues", qite::exact_spectrum(eff.h_eff));
    for (const auto& t : eff.h_eff.terms()) {
      std::printf("h_eff %s %s\n", t.string.letters().c_str(), qite::format_number(t.coefficient).c_str());
    }
    std::cout << eff.selection.serialize();
  }
  return kExitOk;
}

int cmd_excited(Options o) {
  const auto rs = parse_list(o.r == "all" ? "" : o.r, "--r");
  if (rs.size() != 1) throw qite::ManifestError("excited needs a single --r value");
  const auto table = qite::load_table(o.table);
  if (table.n_qubits != 3) throw qite::ManifestError("excited runs on a 3-qubit table (CMF reduction)");
  const auto h = qite::hamiltonian_at(table, rs.front());
  const auto kind = qite::parse_ansatz_kind(o.ansatz);
  if (qite::system_qubits(kind) != 2) throw qite::ManifestError("excited needs a 2-qubit ansatz");

  qite::QiteConfig ground;
  ground.initial_theta = o.theta0.empty() ? qite::default_initial_theta(kind) : parse_list(o.theta0, "--theta0");
  ground.route = parse_route(o);
  ground.route.seed = o.seed;
  qite::QiteConfig excited = ground;
  excited.iterations = o.iters;
  excited.dtau = qite::DtauFixed{o.dtau == "auto" ? qite::resolve_dtau(qite::DtauAuto{}, h, o.dtau_iters)
                                                  : std::get<qite::DtauFixed>(parse_dtau(o.dtau)).value};
  const auto r = qite::excited_state_run(h, kind, ground, excited, o.exact_ground);
  std::cout << qite::trace_csv(r.trajectory);
  std::printf("ground_input_energy %s\n", qite::format_number(r.ground_input_energy).c_str());
  std::printf("gershgorin_emax %s\n", qite::format_number(r.e_max).c_str());
  std::printf("e_excited_qite %s\n", qite::format_number(r.trajectory.converged_energy).c_str());
  std::printf("e_excited_exact %s\n", qite::format_number(r.reduced_spectrum.eigenvalues(1)).c_str());
  return kExitOk;
}

int cmd_landscape(const Options& o) {
  const auto rs = parse_list(o.r == "all" ? "" : o.r, "--r");
  if (rs.size() != 1) throw qite::ManifestError("landscape needs a single --r value");
  if (o.points == 0) throw qite::ManifestError("--points must be positive");
  const auto kind = qite::parse_ansatz_kind(o.ansatz);
  if (qite::parameter_count(kind) != 1) throw qite::ManifestError("landscape needs a 1-parameter ansatz (ucc-h2)");
  const auto table = qite::load_table(o.table);
  if (table.n_qubits != qite::system_qubits(kind)) throw qite::ManifestError("table and ansatz qubit counts differ");
  const auto h = qite::hamiltonian_at(table, rs.front());
  qite::QiteConfig config;
  config.iterations = o.iters;
  config.dtau = parse_dtau(o.dtau);
  config.route = parse_route(o);
  config.record_intermediate = false;
  std::vector<double> grid;
  for (std::size_t k = 0; k < o.points; ++k) grid.push_back(2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(o.points));
  const double e0 = qite::exact_spectrum(h).ground_energy();
  std::printf("theta0,energy,e_exact,fidelity,flags\n");
  for (const auto& p : qite::theta_scan(h, qite::make_builder(kind), grid, config)) {
    std::printf("%s,%s,%s,%s,%s\n", qite::format_number(p.theta0).c_str(), qite::format_number(p.energy).c_str(),
                qite::format_number(e0).c_str(), qite::format_number(p.fidelity).c_str(),
                p.stationary ? "stationary" : "-");
  }
  return kExitOk;
}

int cmd_validate(const Options& o) {
  const auto table = qite::load_table(o.table);
  const auto disc = qite::discontinuity_rows(table);
  bool ok = true;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto dense = qite::to_dense_matrix(qite::row_hamiltonian(table, i));
    const double herm = (dense - dense.adjoint()).cwiseAbs().maxCoeff();
    const auto bound = qite::gershgorin_emax(dense);
    const auto spec = qite::exact_spectrum(dense);
    bool contained = true;
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) contained = contained && bound.contains(spec.eigenvalues(k));
    if (herm > 1e-12 || !contained) {
      ok = false;
      std::fprintf(stderr, "R=%s: hermiticity %g, spectrum in Gershgorin union: %s\n", table.rows[i].r_text.c_str(),
                   herm, contained ? "yes" : "no");
    }
    if (disc[i]) std::printf("discontinuity R=%s\n", table.rows[i].r_text.c_str());
  }
  std::printf("table %s: molecule=%s qubits=%zu labels=%zu rows=%zu R=[%s, %s] %s\n", o.table.c_str(),
              table.molecule_name.c_str(), table.n_qubits, table.pauli_labels.size(), table.rows.size(),
              table.rows.empty() ? "-" : table.rows.front().r_text.c_str(),
              table.rows.empty() ? "-" : table.rows.back().r_text.c_str(), ok ? "ok" : "INVALID");
  return ok ? kExitOk : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational imaginary-time evolution on Pauli coefficient tables"};
  app.require_subcommand(1);
  Options o;

  auto* scan = app.add_subcommand("scan", "QITE at every selected bond distance; writes curve.csv");
  add_run_options(scan, o);
  scan->add_option("--out", o.out, "Output directory");
  scan->add_flag("--trace", o.trace, "Write per-iteration trace_R<R>.csv files");

  auto* point = app.add_subcommand("point", "QITE at one bond distance, printing the trace");
  add_run_options(point, o);
  point->add_option("--out", o.out, "Output directory");

  auto* spectrum = app.add_subcommand("spectrum", "Exact spectrum and Gershgorin bound of one row");
  spectrum->add_option("--table", o.table, "Coefficient table");
  spectrum->add_option("--r", o.r, "Bond distance")->required();
  spectrum->add_flag("--cmf", o.cmf, "Also print the CMF effective Hamiltonian");

  auto* excited = app.add_subcommand("excited", "First excited state via Gershgorin lift of the CMF ground state");
  add_run_options(excited, o);
  excited->add_flag("--exact-ground", o.exact_ground, "Lift the exact h_eff ground state instead of a QITE result");
  excited->add_option("--dtau-iters", o.dtau_iters, "l used by the auto dtau rule (default 4)");

  auto* landscape = app.add_subcommand("landscape", "QITE from evenly spaced initial angles of a 1-parameter ansatz");
  add_run_options(landscape, o);
  landscape->add_option("--points", o.points, "Number of initial angles in [0, 2 pi)");

  auto* validate = app.add_subcommand("validate", "Lint a coefficient table");
  validate->add_option("--table", o.table, "Coefficient table");

  excited->preparse_callback([&](std::size_t) { o.iters = 20; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (scan->parsed()) return cmd_scan(o);
    if (point->parsed()) return cmd_point(o);
    if (spectrum->parsed()) return cmd_spectrum(o);
    if (excited->parsed()) return cmd_excited(o);
    if (landscape->parsed()) return cmd_landscape(o);
    if (validate->parsed()) return cmd_validate(o);
  } catch (const qite::ValueError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
  return kExitInvalid;
}
