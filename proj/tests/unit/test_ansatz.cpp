#include "test_support.hpp"

#include <numbers>

namespace qite {
namespace {

using testing::max_abs;

CMatrix exp_pauli(const std::string& letters, double half_angle) {
  const CMatrix s = to_dense_matrix(PauliString(letters));
  const auto dim = s.rows();
  return std::cos(half_angle) * CMatrix::Identity(dim, dim) - Complex(0, std::sin(half_angle)) * s;
}

// |Tr(A^dag B)| / dim, which is 1 exactly when A and B agree up to a global phase.
double phase_overlap(const CMatrix& a, const CMatrix& b) {
  return std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

CMatrix ansatz_unitary(const AnsatzCircuit& c) { return circuit_unitary(c.gates, c.n_system_qubits); }

// dV/dtheta_i from the descriptor: sum_k p_k U_n .. U_i sigma_k .. U_1.
CMatrix descriptor_derivative(const AnsatzCircuit& c, std::size_t parameter) {
  const auto& d = c.descriptors.at(parameter);
  const auto dim = Eigen::Index{1} << c.n_system_qubits;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const auto& f : d.factors) {
    std::vector<Gate> gates(c.gates.begin(), c.gates.begin() + static_cast<std::ptrdiff_t>(d.insertion_point) + 1);
    const CMatrix head = circuit_unitary(gates, c.n_system_qubits);
    std::vector<Gate> tail(c.gates.begin() + static_cast<std::ptrdiff_t>(d.insertion_point) + 1, c.gates.end());
    out += f.p * circuit_unitary(tail, c.n_system_qubits) * to_dense_matrix(f.sigma) * head;
  }
  return out;
}

void expect_descriptors_match_finite_differences(const AnsatzBuilder& build, std::vector<double> theta) {
  const double eps = 1e-5;
  const auto base = build(theta);
  ASSERT_EQ(base.descriptors.size(), base.parameters.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto plus = theta;
    auto minus = theta;
    plus[i] += eps;
    minus[i] -= eps;
    const CMatrix fd = (ansatz_unitary(build(plus)) - ansatz_unitary(build(minus))) / (2 * eps);
    EXPECT_LT(max_abs(fd - descriptor_derivative(base, i)), 1e-6) << "parameter " << i;
    const CVector state_fd = (build(plus).prepare().amplitudes() - build(minus).prepare().amplitudes()) / (2 * eps);
    EXPECT_LT((state_fd - base.derivative(i)).cwiseAbs().maxCoeff(), 1e-6) << "parameter " << i;
  }
}

TEST(UccH2, ZeroAngleIsIdentityOnReference) {
  const auto c = build_ucc_h2(0.0);
  EXPECT_NEAR(fidelity(c.prepare(), StateVector::basis("10")), 1.0, 1e-12);
}

TEST(UccH2, GateListAndDescriptor) {
  const auto c = build_ucc_h2(0.4);
  ASSERT_EQ(c.gates.size(), 7U);
  EXPECT_EQ(c.gates[3], Gate::rz(1, 0.4));
  ASSERT_EQ(c.descriptors.size(), 1U);
  EXPECT_EQ(c.descriptors[0].insertion_point, 3U);
  ASSERT_EQ(c.descriptors[0].factors.size(), 1U);
  EXPECT_EQ(c.descriptors[0].factors[0].p, Complex(0, -0.5));
  EXPECT_EQ(c.descriptors[0].factors[0].sigma.letters(), "IZ");
  EXPECT_NEAR(fidelity(c.reference_state, StateVector::basis("10")), 1.0, 1e-15);
}

TEST(UccH2, DescriptorFiniteDifference) {
  const double theta = 0.7;
  const double eps = 1e-5;
  const CMatrix fd = (ansatz_unitary(build_ucc_h2(theta + eps)) - ansatz_unitary(build_ucc_h2(theta - eps))) / (2 * eps);
  EXPECT_LT(max_abs(fd - descriptor_derivative(build_ucc_h2(theta), 0)), 1e-6);
}

// The gate list realizes exp(-i theta/2 Y0 X1).
TEST(UccH2, MatchesExponentialOfY0X1) {
  for (double theta : {0.3, 1.1, 2.0, -2.7}) {
    EXPECT_NEAR(phase_overlap(ansatz_unitary(build_ucc_h2(theta)), exp_pauli("YX", theta / 2)), 1.0, 1e-10);
  }
}

TEST(UccH2, StateFamilyOnReference) {
  const double theta = 1.3;
  CVector expected = CVector::Zero(4);
  expected(2) = std::cos(theta / 2);
  expected(1) = -std::sin(theta / 2);
  EXPECT_NEAR(fidelity(build_ucc_h2(theta).prepare(), StateVector::from_amplitudes(expected)), 1.0, 1e-12);
}

TEST(UccLiH, ZeroAngleIsIdentityOnReference) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_NEAR(fidelity(build_ucc_lih(zero).prepare(), StateVector::basis("100")), 1.0, 1e-12);
}

TEST(UccLiH, MatchesProductOfExponentials) {
  const std::vector<double> theta{0.8, -1.4};
  const CMatrix expected = exp_pauli("YIX", theta[1] / 2) * exp_pauli("YXI", theta[0] / 2);
  EXPECT_NEAR(phase_overlap(ansatz_unitary(build_ucc_lih(theta)), expected), 1.0, 1e-10);
}

TEST(UccLiH, DescriptorFiniteDifferenceAtInitialGuess) {
  expect_descriptors_match_finite_differences(make_builder(AnsatzKind::UccLiH), {1.0, 1.0});
}

TEST(UccLiH, ArityError) {
  const std::vector<double> three{1, 2, 3};
  EXPECT_THROW(build_ucc_lih(three), ValueError);
}

TEST(HardwareEfficient, GateOrder) {
  const std::vector<double> t{1, 2, 3, 4, 5, 6};
  const auto c = build_hardware_efficient(t);
  const std::vector<Gate> expected{Gate::rx(0, 1), Gate::rx(1, 2), Gate::cnot(0, 1), Gate::rz(0, 3),
                                   Gate::rz(1, 4), Gate::rx(0, 5), Gate::rx(1, 6)};
  EXPECT_EQ(c.gates, expected);
  EXPECT_EQ(c.descriptors[2].factors[0].sigma.letters(), "ZI");
  EXPECT_EQ(c.descriptors[5].factors[0].sigma.letters(), "IX");
  EXPECT_EQ(c.descriptors[5].insertion_point, 6U);
}

TEST(HardwareEfficient, ZeroAnglesReduceToCnot) {
  const std::vector<double> zero(6, 0.0);
  const auto c = build_hardware_efficient(zero);
  const auto out = run_circuit(StateVector::basis("10"), c.gates);
  EXPECT_NEAR(fidelity(out, StateVector::basis("11")), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(out[3]), 1.0, 1e-15);
}

TEST(HardwareEfficient, InitialGuessDescriptors) {
  expect_descriptors_match_finite_differences(make_builder(AnsatzKind::HardwareEfficient), std::vector<double>(6, 0.5));
}

TEST(HardwareEfficient, DepthRequiresExtensionFlag) {
  const std::vector<double> twelve(12, 0.1);
  EXPECT_THROW(build_hardware_efficient(twelve, 2), ValueError);
  const auto c = build_hardware_efficient(twelve, 2, true);
  EXPECT_EQ(c.parameters.size(), 12U);
  EXPECT_EQ(c.descriptors.size(), 12U);
  EXPECT_THROW(build_hardware_efficient(std::vector<double>(5, 0.1)), ValueError);
}

TEST(Ansatz, RandomAngleDerivativesAllBuilders) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (auto kind : {AnsatzKind::UccH2, AnsatzKind::UccLiH, AnsatzKind::HardwareEfficient}) {
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> theta(parameter_count(kind));
      for (auto& t : theta) t = angle(rng);
      expect_descriptors_match_finite_differences(make_builder(kind), theta);
    }
  }
}

TEST(Ansatz, ConstructionIsPure) {
  const auto build = make_builder(AnsatzKind::HardwareEfficient);
  const std::vector<double> a(6, 0.5);
  const std::vector<double> b{1, -2, 3, -4, 5, -6};
  const auto first = build(a);
  (void)build(b);
  const auto again = build(a);
  EXPECT_EQ(first.gates, again.gates);
  EXPECT_EQ(first.parameters, again.parameters);
}

TEST(HartreeFock, ReferenceStates) {
  EXPECT_NEAR(fidelity(hartree_fock_state(Molecule::H2), StateVector::basis("10")), 1.0, 1e-15);
  EXPECT_NEAR(fidelity(hartree_fock_state(Molecule::LiH), StateVector::basis("100")), 1.0, 1e-15);
  EXPECT_NEAR(hartree_fock_state(Molecule::LiH).amplitudes().norm(), 1.0, 1e-15);
  EXPECT_EQ(parse_molecule("LiH"), Molecule::LiH);
  EXPECT_THROW(parse_molecule("BeH2"), ValueError);
}

TEST(AnsatzKind, Names) {
  EXPECT_EQ(parse_ansatz_kind("he"), AnsatzKind::HardwareEfficient);
  EXPECT_EQ(to_string(AnsatzKind::UccLiH), "ucc-lih");
  EXPECT_THROW(parse_ansatz_kind("uccsd"), ValueError);
}

}  // namespace
}  // namespace qite
