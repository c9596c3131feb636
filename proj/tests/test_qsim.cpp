// Copyright 2026 The blg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "blg/qsim.hpp"
#include "blg/symmetry.hpp"
#include "oracles.hpp"

namespace blg {
namespace {

// |<a|b>| = 1 and the phase-corrected difference vanishes.
double phase_distance(const MatXc& a, const MatXc& b) {
  const cplx ov = (b.adjoint() * a).trace();
  if (std::abs(ov) < 1e-300) return 1.0;
  return (a - b * (ov / std::abs(ov))).cwiseAbs().maxCoeff();
}

MatXc controlled(const MatXc& u) {
  const auto n = u.rows();
  MatXc m = MatXc::Identity(2 * n, 2 * n);
  m.bottomRightCorner(n, n) = u;
  return m;
}

Circuit random_circuit(std::mt19937_64& rng, int n, int depth) {
  std::uniform_int_distribution<int> kind(0, 3), q(0, n - 1);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  Circuit c(n);
  for (int i = 0; i < depth; ++i) {
    const int a = q(rng);
    switch (kind(rng)) {
      case 0: c.ry(a, ang(rng)); break;
      case 1: c.rz(a, ang(rng)); break;
      case 2: c.x(a); break;
      default: {
        int b = q(rng);
        if (b == a) b = (a + 1) % n;
        c.cz(a, b);
      }
    }
  }
  return c;
}

TEST(Gates, QubitZeroIsMostSignificant) {
  Circuit c(2);
  c.x(0);
  const auto s = apply(QuantumState::zero(2, Mode::statevector), c);
  EXPECT_NEAR(std::abs(s.psi(2)), 1.0, 1e-15);
  EXPECT_NEAR(marginal_p0(s, 0), 0.0, 1e-15);
  EXPECT_NEAR(marginal_p0(s, 1), 1.0, 1e-15);
}

TEST(Gates, RejectsBadOperands) {
  Circuit c(2);
  EXPECT_THROW(c.cz(0, 0), Error);
  EXPECT_THROW(c.ry(2, 0.1), Error);
  EXPECT_THROW(QuantumState::zero(6, Mode::statevector), Error);
}

TEST(Noise, KrausCompleteness) {
  for (double p : {0.0, 0.005, 0.01, 0.3, 1.0})
    for (const std::array<double, 4>& w : {std::array<double, 4>{0.25, 0.25, 0.25, 0.25}, std::array<double, 4>{0.1, 0.5, 0.2, 0.2}}) {
      Mat2c s = Mat2c::Zero();
      for (const auto& k : kraus_operators(p, w)) s += k.adjoint() * k;
      EXPECT_LT((s - Mat2c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Noise, SingleQubitChannel) {
  for (double p : {0.0, 0.2, 1.0}) {
    MatXc rho = MatXc::Zero(2, 2);
    rho(0, 0) = 1.0;
    depolarize(rho, 0, 1, p, {0.25, 0.25, 0.25, 0.25});
    EXPECT_NEAR(rho(0, 0).real(), 1 - p / 2, 1e-15);
    EXPECT_NEAR(rho(1, 1).real(), p / 2, 1e-15);
    EXPECT_NEAR(std::abs(rho(0, 1)), 0.0, 1e-15);
  }
}

TEST(Noise, ValidatesParameters) {
  EXPECT_THROW((NoiseModel{-0.1, 0.0, {0.25, 0.25, 0.25, 0.25}}.validate()), Error);
  EXPECT_THROW((NoiseModel{0.0, 0.0, {0.5, 0.5, 0.5, 0.5}}.validate()), Error);
  EXPECT_NO_THROW(NoiseModel::from_p2(0.01).validate());
  EXPECT_DOUBLE_EQ(NoiseModel::from_p2(0.01).p1, 0.005);
}

TEST(Noise, NoisyStatevectorIsAModeMismatch) {
  Circuit c(1);
  c.x(0);
  try {
    apply(QuantumState::zero(1, Mode::statevector), c, NoiseModel::from_p2(0.01));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::mode_mismatch);
  }
}

TEST(Noise, TracePreserved) {
  std::mt19937_64 rng(11);
  for (double p : {0.0, 0.005, 0.01})
    for (int t = 0; t < 20; ++t) {
      const auto c = random_circuit(rng, 4, 30);
      const auto s = apply(QuantumState::zero(4, Mode::density_matrix), c, NoiseModel::from_p2(p));
      EXPECT_NEAR(s.rho.trace().real(), 1.0, 1e-12);
      EXPECT_LT((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Simulator, DensityMatrixMatchesStatevectorWithoutNoise) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const auto c = random_circuit(rng, 5, 40);
    const auto sv = apply(QuantumState::zero(5, Mode::statevector), c);
    const auto dm = apply(QuantumState::zero(5, Mode::density_matrix), c, NoiseModel::from_p2(0.0));
    EXPECT_LT((sv.density() - dm.rho).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Simulator, CircuitUnitaryIsUnitaryAndConsistent) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto c = random_circuit(rng, 3, 25);
    const MatXc u = circuit_unitary(c);
    EXPECT_TRUE(is_unitary(u, 1e-12));
    const auto s = apply(QuantumState::zero(3, Mode::statevector), c);
    EXPECT_LT((u.col(0) - s.psi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Measure, GroundStateAlwaysZero) {
  const auto c = measure_qubit(QuantumState::zero(3, Mode::statevector), 1, 12345, 1);
  EXPECT_EQ(c.n0, 12345u);
  EXPECT_EQ(c.n1, 0u);
}

TEST(Measure, BalancedQubitConcentrates) {
  Circuit c(1);
  c.ry(0, kPi / 2);
  const auto s = apply(QuantumState::zero(1, Mode::statevector), c);
  const auto counts = measure_qubit(s, 0, 1000000, 2026);
  EXPECT_NEAR(counts.p0_exact, 0.5, 1e-15);
  const double f = static_cast<double>(counts.n0) / 1e6;
  EXPECT_GE(f, 0.498);
  EXPECT_LE(f, 0.502);
  EXPECT_THROW(measure_qubit(s, 0, 0, 1), Error);
}

TEST(Measure, SameSeedSameCounts) {
  Circuit c(1);
  c.ry(0, 1.0);
  const auto s = apply(QuantumState::zero(1, Mode::statevector), c);
  EXPECT_EQ(measure_qubit(s, 0, 1000, 7).n0, measure_qubit(s, 0, 1000, 7).n0);
}

TEST(Synthesis, ZYZReconstructsRandomUnitaries) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Mat2c m;
    m << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
    const Mat2c u = Eigen::HouseholderQR<Mat2c>(m).householderQ();
    const ZYZ z = zyz_decompose(u);
    const Mat2c r = std::polar(1.0, z.alpha) * rz_matrix(z.beta) * ry_matrix(z.gamma) * rz_matrix(z.delta);
    EXPECT_LT((r - u).cwiseAbs().maxCoeff(), 1e-12);
    Circuit c(1);
    emit_1q(c, u, 0);
    EXPECT_LE(c.gates.size(), 3u);
    EXPECT_LT(phase_distance(circuit_unitary(c), u), 1e-12);
    for (const auto& g : c.gates) {
      EXPECT_GT(g.angle, -kPi);
      EXPECT_LE(g.angle, kPi);
    }
  }
}

TEST(Synthesis, IdentityAndPauliX) {
  Circuit c(1);
  emit_1q(c, std::polar(1.0, 0.7) * Mat2c::Identity(), 0);
  EXPECT_TRUE(c.gates.empty());
  emit_1q(c, pauli_matrix('X'), 0);
  ASSERT_EQ(c.gates.size(), 1u);
  EXPECT_EQ(c.gates[0].kind, GateKind::bit_flip_x);
}

TEST(Synthesis, PeepholePreservesTheUnitary) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_circuit(rng, 3, 40);
    const auto p = peephole(c);
    EXPECT_LE(p.gates.size(), c.gates.size() + 3);
    EXPECT_EQ(p.count_2q(), c.count_2q());
    EXPECT_LT(phase_distance(circuit_unitary(p), circuit_unitary(c)), 1e-10);
  }
}

TEST(Synthesis, ControlledSingleQubitIsExact) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 50; ++t) {
    const Mat4c u4 = oracle::random_unitary(rng);
    const Mat2c u = u4.topLeftCorner(2, 2).householderQr().householderQ();
    Circuit c(2);
    emit_controlled_1q(c, u, 0, 1);
    EXPECT_LT(phase_distance(circuit_unitary(c), controlled(u)), 1e-10);
  }
}

TEST(Synthesis, SquareRootSquares) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const Mat2c u = Mat4c(oracle::random_unitary(rng)).topLeftCorner(2, 2).householderQr().householderQ();
    const Mat2c v = unitary_sqrt(u);
    EXPECT_LT((v * v - u).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Synthesis, DoublyControlledIsExact) {
  std::mt19937_64 rng(18);
  for (int t = 0; t < 20; ++t) {
    const Mat2c w = Mat4c(oracle::random_unitary(rng)).topLeftCorner(2, 2).householderQr().householderQ();
    Circuit c(3);
    emit_doubly_controlled(c, w, 0, 1, 2);
    MatXc want = MatXc::Identity(8, 8);
    want.bottomRightCorner(2, 2) = w;
    EXPECT_LT(phase_distance(circuit_unitary(c), want), 1e-10);
  }
}

TEST(Synthesis, ControlledTwoQubitRandom) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 50; ++t) {
    const Mat4c u = oracle::random_unitary(rng);
    Circuit c(3);
    emit_controlled_2q(c, u, 0, 1, 2);
    EXPECT_LT(phase_distance(circuit_unitary(c), controlled(u)), 1e-10);
  }
}

TEST(Synthesis, ControlledSublatticeSwap) {
  const auto geo = build_geometry(StackingConfig::defaults(Stacking::AA));
  const auto lg = little_group(named_kpoint(geo, "Γ"), geo);
  const Mat4c c6 = lg.reps[static_cast<std::size_t>(lg.op_of_class("C6"))];
  Circuit c(3);
  emit_controlled_2q(c, c6, 0, 1, 2);
  EXPECT_LT(phase_distance(circuit_unitary(c), controlled(c6)), 1e-10);
  // The swap acts on the sublattice qubit alone: one controlled X, built from two CZs.
  EXPECT_EQ(c.count_2q(), 2);
  for (const auto& g : c.gates) {
    if (!g.two_qubit()) continue;
    EXPECT_TRUE((g.q0 == 0 && g.q1 == 2) || (g.q0 == 2 && g.q1 == 0));
  }
}

TEST(Synthesis, ControlledDiagonalUsesNoFlips) {
  const cplx w = std::polar(1.0, -2 * kPi / 3);
  Mat4c d = Mat4c::Zero();
  d.diagonal() << 1.0, w, std::conj(w), -1.0;
  Circuit c(3);
  emit_controlled_2q(c, d, 0, 1, 2);
  EXPECT_LT(phase_distance(circuit_unitary(c), controlled(d)), 1e-10);
  for (const auto& g : c.gates) EXPECT_NE(g.kind, GateKind::bit_flip_x);
}

TEST(Synthesis, IdentityRepsEmitNothing) {
  const auto c = controlled_symmetry(Mat4c::Identity(), Mat4c::Identity(), 0, {1, 2}, {3, 4});
  EXPECT_TRUE(c.gates.empty());
}

TEST(Synthesis, ControlledSymmetryOnFiveQubits) {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 5; ++t) {
    const Mat4c a = oracle::random_unitary(rng), b = oracle::random_involution(rng);
    const auto c = controlled_symmetry(a, b, 0, {1, 2}, {3, 4});
    MatXc ab(16, 16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) ab.block(4 * i, 4 * j, 4, 4) = a(i, j) * b;
    EXPECT_LT(phase_distance(circuit_unitary(c), controlled(ab)), 1e-10);
  }
}

// Schmidt rank from an SVD of the 2x2 amplitude matrix, computed here rather than in the library.
int schmidt_rank(const Vec4c& v) {
  Mat2c m;
  m << v(0), v(1), v(2), v(3);
  const auto s = Eigen::JacobiSVD<Mat2c>(m).singularValues();
  return s(1) > 1e-12 ? 2 : 1;
}

TEST(StatePrep, ProductAndEntangledCounts) {
  Vec4c v;
  v << 1, 0, 0, 0;
  EXPECT_TRUE(prepare_state(v, {0, 1}).gates.empty());
  v << 0.5, 0.5, 0.5, 0.5;
  EXPECT_EQ(schmidt_rank(v), 1);
  EXPECT_EQ(prepare_state(v, {0, 1}).count_2q(), 0);
  v << 1 / std::sqrt(2.0), 0, 0, -1 / std::sqrt(2.0);
  EXPECT_EQ(schmidt_rank(v), 2);
  EXPECT_EQ(prepare_state(v, {0, 1}).count_2q(), 1);
  EXPECT_THROW(prepare_state(2 * v, {0, 1}), Error);
}

TEST(StatePrep, RandomTargets) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const Vec4c v = oracle::random_state(rng);
    const auto c = prepare_state(v, {0, 1});
    EXPECT_EQ(c.count_2q(), schmidt_rank(v) == 2 ? 1 : 0);
    const auto s = apply(QuantumState::zero(2, Mode::statevector), c);
    EXPECT_NEAR(std::abs(s.psi.dot(v)), 1.0, 1e-12);
  }
}

TEST(StatePrep, OnAnyRegister) {
  std::mt19937_64 rng(22);
  const Vec4c v = oracle::random_state(rng);
  const auto c = prepare_state(v, {3, 1}, 5);
  const auto s = apply(QuantumState::zero(5, Mode::statevector), c);
  // Qubit 3 is the high bit of the register, qubit 1 the low bit.
  Vec4c got;
  for (int hi = 0; hi < 2; ++hi)
    for (int lo = 0; lo < 2; ++lo) got(2 * hi + lo) = s.psi((hi << 1) | (lo << 3));
  EXPECT_NEAR(std::abs(got.dot(v)), 1.0, 1e-12);
}

}  // namespace
}  // namespace blg
