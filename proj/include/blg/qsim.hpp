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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "blg/common.hpp"
#include "blg/tightbinding.hpp"

namespace blg {

using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

inline constexpr int kMaxQubits = 5;

enum class GateKind { rot_y, rot_z, bit_flip_x, cz };

struct Gate {
  GateKind kind = GateKind::rot_z;
  int q0 = 0;
  int q1 = -1;  // second qubit of cz
  double angle = 0.0;

  bool two_qubit() const { return kind == GateKind::cz; }
};

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;

  explicit Circuit(int n = 0) : n_qubits(n) {}

  int count_1q() const {
    int n = 0;
    for (const auto& g : gates) n += g.two_qubit() ? 0 : 1;
    return n;
  }
  int count_2q() const { return static_cast<int>(gates.size()) - count_1q(); }

  void add(const Gate& g) {
    if (g.q0 < 0 || g.q0 >= n_qubits || (g.two_qubit() && (g.q1 < 0 || g.q1 >= n_qubits || g.q1 == g.q0)))
      throw Error(ErrorKind::invalid_config, "gate qubit index out of range");
    gates.push_back(g);
  }
  void ry(int q, double a) { add({GateKind::rot_y, q, -1, a}); }
  void rz(int q, double a) { add({GateKind::rot_z, q, -1, a}); }
  void x(int q) { add({GateKind::bit_flip_x, q, -1, 0.0}); }
  void cz(int a, int b) { add({GateKind::cz, a, b, 0.0}); }
  void append(const Circuit& c) {
    for (const auto& g : c.gates) add(g);
  }

  // One gate per line: name, angle, qubits.
  std::string dump() const {
    std::string out;
    for (const auto& g : gates) {
      switch (g.kind) {
        case GateKind::rot_y: out += fmt::format("ry {:.12f} {}\n", g.angle, g.q0); break;
        case GateKind::rot_z: out += fmt::format("rz {:.12f} {}\n", g.angle, g.q0); break;
        case GateKind::bit_flip_x: out += fmt::format("x 0 {}\n", g.q0); break;
        case GateKind::cz: out += fmt::format("cz 0 {} {}\n", g.q0, g.q1); break;
      }
    }
    return out;
  }
};

inline Mat2c ry_matrix(double t) {
  Mat2c m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

inline Mat2c rz_matrix(double t) {
  Mat2c m;
  m << std::polar(1.0, -t / 2), 0, 0, std::polar(1.0, t / 2);
  return m;
}

inline Mat2c gate_matrix(const Gate& g) {
  switch (g.kind) {
    case GateKind::rot_y: return ry_matrix(g.angle);
    case GateKind::rot_z: return rz_matrix(g.angle);
    case GateKind::bit_flip_x: return pauli_matrix('X');
    case GateKind::cz: break;
  }
  throw Error(ErrorKind::invalid_config, "two-qubit gate has no 2x2 matrix");
}

// ---------------------------------------------------------------------------
// States and simulation. Qubit 0 is the most significant bit of the index.

enum class Mode { statevector, density_matrix };

struct QuantumState {
  Mode mode = Mode::statevector;
  int n_qubits = 0;
  VecXc psi;
  MatXc rho;

  static QuantumState zero(int n, Mode mode) {
    if (n < 1 || n > kMaxQubits) throw Error(ErrorKind::invalid_config, "1..5 qubits supported");
    QuantumState s;
    s.mode = mode;
    s.n_qubits = n;
    const int dim = 1 << n;
    if (mode == Mode::statevector) {
      s.psi = VecXc::Zero(dim);
      s.psi(0) = 1.0;
    } else {
      s.rho = MatXc::Zero(dim, dim);
      s.rho(0, 0) = 1.0;
    }
    return s;
  }

  static QuantumState from_vector(const VecXc& v, Mode mode = Mode::statevector) {
    const int dim = static_cast<int>(v.size());
    int n = 0;
    while ((1 << n) < dim) ++n;
    if ((1 << n) != dim || n < 1 || n > kMaxQubits) throw Error(ErrorKind::invalid_config, "dimension must be 2^n, n <= 5");
    if (std::abs(v.norm() - 1.0) > 1e-10) throw Error(ErrorKind::not_normalized, "state is not normalized");
    QuantumState s;
    s.mode = mode;
    s.n_qubits = n;
    if (mode == Mode::statevector) s.psi = v;
    else s.rho = v * v.adjoint();
    return s;
  }

  int dim() const { return 1 << n_qubits; }
  MatXc density() const { return mode == Mode::statevector ? MatXc(psi * psi.adjoint()) : rho; }
};

namespace detail {

inline int bit_of(int q, int n) { return 1 << (n - 1 - q); }

// Left-multiplies every column of m by the 1-qubit unitary u on qubit q.
inline void left_1q(MatXc& m, const Mat2c& u, int q, int n) {
  const int b = bit_of(q, n);
  for (int col = 0; col < m.cols(); ++col)
    for (int i = 0; i < m.rows(); ++i) {
      if (i & b) continue;
      const cplx x0 = m(i, col), x1 = m(i | b, col);
      m(i, col) = u(0, 0) * x0 + u(0, 1) * x1;
      m(i | b, col) = u(1, 0) * x0 + u(1, 1) * x1;
    }
}

inline void left_cz(MatXc& m, int a, int c, int n) {
  const int ba = bit_of(a, n), bc = bit_of(c, n);
  for (int i = 0; i < m.rows(); ++i)
    if ((i & ba) && (i & bc)) m.row(i) *= -1.0;
}

inline void conjugate_1q(MatXc& rho, const Mat2c& u, int q, int n) {
  left_1q(rho, u, q, n);
  MatXc t = rho.adjoint();
  left_1q(t, u, q, n);
  rho = t.adjoint();
}

inline void conjugate_cz(MatXc& rho, int a, int c, int n) {
  left_cz(rho, a, c, n);
  MatXc t = rho.adjoint();
  left_cz(t, a, c, n);
  rho = t.adjoint();
}

}  // namespace detail

struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};  // I, X, Y, Z

  static NoiseModel from_p2(double p2) { return NoiseModel{p2 / 2.0, p2, {0.25, 0.25, 0.25, 0.25}}; }

  void validate() const {
    if (p1 < 0 || p1 > 1 || p2 < 0 || p2 > 1) throw Error(ErrorKind::invalid_config, "noise probabilities must lie in [0,1]");
    double s = 0.0;
    for (double w : weights) {
      if (w < 0) throw Error(ErrorKind::invalid_config, "Pauli weights must be non-negative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw Error(ErrorKind::invalid_config, "Pauli weights must sum to 1");
  }
};

inline std::vector<Mat2c> kraus_operators(double p, const std::array<double, 4>& w) {
  const char names[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<Mat2c> ks;
  for (int e = 0; e < 4; ++e) {
    const double weight = (e == 0 ? 1.0 - p : 0.0) + p * w[static_cast<std::size_t>(e)];
    ks.push_back(std::sqrt(weight) * pauli_matrix(names[e]));
  }
  return ks;
}

inline void depolarize(MatXc& rho, int q, int n, double p, const std::array<double, 4>& w) {
  if (p <= 0.0) return;
  MatXc out = (1.0 - p + p * w[0]) * rho;
  const char names[3] = {'X', 'Y', 'Z'};
  for (int e = 0; e < 3; ++e) {
    MatXc t = rho;
    detail::conjugate_1q(t, pauli_matrix(names[e]), q, n);
    out += p * w[static_cast<std::size_t>(e + 1)] * t;
  }
  rho = out;
}

inline QuantumState apply(const QuantumState& in, const Circuit& c, const std::optional<NoiseModel>& noise = std::nullopt) {
  if (c.n_qubits != in.n_qubits) throw Error(ErrorKind::invalid_config, "circuit and state qubit counts differ");
  if (noise && in.mode != Mode::density_matrix) throw Error(ErrorKind::mode_mismatch, "noise needs the density-matrix backend");
  if (noise) noise->validate();
  QuantumState s = in;
  const int n = s.n_qubits;
  if (s.mode == Mode::statevector) {
    MatXc v = s.psi;
    for (const auto& g : c.gates) {
      if (g.two_qubit()) detail::left_cz(v, g.q0, g.q1, n);
      else detail::left_1q(v, gate_matrix(g), g.q0, n);
    }
    s.psi = v.col(0);
    return s;
  }
  for (const auto& g : c.gates) {
    if (g.two_qubit()) {
      detail::conjugate_cz(s.rho, g.q0, g.q1, n);
      if (noise) {
        depolarize(s.rho, g.q0, n, noise->p2, noise->weights);
        depolarize(s.rho, g.q1, n, noise->p2, noise->weights);
      }
    } else {
      detail::conjugate_1q(s.rho, gate_matrix(g), g.q0, n);
      if (noise) depolarize(s.rho, g.q0, n, noise->p1, noise->weights);
    }
  }
  return s;
}

inline MatXc circuit_unitary(const Circuit& c) {
  MatXc u = MatXc::Identity(1 << c.n_qubits, 1 << c.n_qubits);
  for (const auto& g : c.gates) {
    if (g.two_qubit()) detail::left_cz(u, g.q0, g.q1, c.n_qubits);
    else detail::left_1q(u, gate_matrix(g), g.q0, c.n_qubits);
  }
  return u;
}

inline double marginal_p0(const QuantumState& s, int q) {
  const int b = detail::bit_of(q, s.n_qubits);
  double p0 = 0.0;
  for (int i = 0; i < s.dim(); ++i) {
    if (i & b) continue;
    p0 += s.mode == Mode::statevector ? std::norm(s.psi(i)) : s.rho(i, i).real();
  }
  return std::clamp(p0, 0.0, 1.0);
}

struct Counts {
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
  double p0_exact = 0.0;
};

inline Counts measure_qubit(const QuantumState& s, int q, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw Error(ErrorKind::invalid_config, "shots must be >= 1");
  Counts c;
  c.p0_exact = marginal_p0(s, q);
  Rng rng = make_rng(seed, 0x6d656173ULL);
  std::binomial_distribution<std::uint64_t> bin(shots, c.p0_exact);
  c.n0 = bin(rng);
  c.n1 = shots - c.n0;
  return c;
}

// Basis change that maps the eigenbasis of P onto Z.
inline void measurement_rotation(Circuit& c, char p, int q) {
  if (p == 'X') {
    c.ry(q, -kPi / 2);
  } else if (p == 'Y') {
    c.rz(q, -kPi / 2);
    c.ry(q, -kPi / 2);
  }
}

// Energy of a 2-qubit state from its Pauli terms. shots = 0 returns trace(rho H).
inline double expval_sampling(const QuantumState& s, const std::vector<PauliTerm>& terms, std::uint64_t shots,
                              std::uint64_t seed) {
  if (s.n_qubits != 2) throw Error(ErrorKind::invalid_config, "Hamiltonian sampling acts on a 2-qubit register");
  const MatXc rho = s.density();
  double e = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    if (term.pauli == "II") {
      e += term.coeff;
      continue;
    }
    if (shots == 0) {
      e += term.coeff * (rho * pauli_string(term.pauli)).trace().real();
      continue;
    }
    Circuit rot(2);
    measurement_rotation(rot, term.pauli[0], 0);
    measurement_rotation(rot, term.pauli[1], 1);
    const QuantumState r = apply(s, rot);
    std::array<double, 4> prob{};
    for (int i = 0; i < 4; ++i)
      prob[static_cast<std::size_t>(i)] = r.mode == Mode::statevector ? std::norm(r.psi(i)) : r.rho(i, i).real();
    Rng rng = make_rng(seed, t + 1);
    std::uint64_t left = shots;
    double rest = 1.0;
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      std::uint64_t k = left;
      if (i < 3) {
        const double pi = rest > 0 ? std::clamp(prob[static_cast<std::size_t>(i)] / rest, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> bin(left, pi);
        k = bin(rng);
      }
      int parity = 0;
      if (term.pauli[0] != 'I') parity ^= (i >> 1) & 1;
      if (term.pauli[1] != 'I') parity ^= i & 1;
      acc += (parity ? -1.0 : 1.0) * static_cast<double>(k);
      left -= k;
      rest -= prob[static_cast<std::size_t>(i)];
    }
    e += term.coeff * acc / static_cast<double>(shots);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Synthesis into the native alphabet.

inline bool is_unitary(const MatXc& u, double tol = 1e-10) {
  return (u.adjoint() * u - MatXc::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < tol;
}

struct ZYZ {
  double alpha, beta, gamma, delta;  // U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)
};

inline ZYZ zyz_decompose(const Mat2c& u) {
  const cplx det = u.determinant();
  const double alpha = std::arg(det) / 2.0;
  const Mat2c v = u * std::polar(1.0, -alpha);
  const cplx a = v(0, 0), b = v(1, 0);
  const double gamma = 2.0 * std::atan2(std::abs(b), std::abs(a));
  double beta, delta;
  if (std::abs(b) < 1e-14) {
    beta = -2.0 * std::arg(a);
    delta = 0.0;
  } else if (std::abs(a) < 1e-14) {
    beta = 2.0 * std::arg(b);
    delta = 0.0;
  } else {
    beta = std::arg(b) - std::arg(a);
    delta = -std::arg(a) - std::arg(b);
  }
  return {alpha, beta, gamma, delta};
}

// Angle folded into (-pi, pi]; Rz/Ry differ from the folded gate by a sign only.
inline double fold_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline bool equal_up_to_phase(const Mat2c& a, const Mat2c& b, double tol = 1e-12) {
  const cplx ov = (b.adjoint() * a).trace() / 2.0;
  return std::abs(std::abs(ov) - 1.0) < tol && (a - ov * b).cwiseAbs().maxCoeff() < 1e-10;
}

// Emits u on q up to a global phase, dropping identities.
inline void emit_1q(Circuit& c, const Mat2c& u, int q) {
  if (equal_up_to_phase(u, Mat2c::Identity())) return;
  if (equal_up_to_phase(u, pauli_matrix('X'))) {
    c.x(q);
    return;
  }
  const ZYZ z = zyz_decompose(u);
  const double d = fold_angle(z.delta), g = fold_angle(z.gamma), b = fold_angle(z.beta);
  if (std::abs(d) > 1e-12) c.rz(q, d);
  if (std::abs(g) > 1e-12) c.ry(q, g);
  if (std::abs(b) > 1e-12) c.rz(q, b);
}

// Merges runs of 1-qubit gates on each qubit.
inline Circuit peephole(const Circuit& in) {
  Circuit out(in.n_qubits);
  std::vector<std::optional<Mat2c>> pending(static_cast<std::size_t>(in.n_qubits));
  auto flush = [&](int q) {
    auto& p = pending[static_cast<std::size_t>(q)];
    if (p) emit_1q(out, *p, q);
    p.reset();
  };
  for (const auto& g : in.gates) {
    if (g.two_qubit()) {
      flush(g.q0);
      flush(g.q1);
      out.add(g);
    } else {
      auto& p = pending[static_cast<std::size_t>(g.q0)];
      p = gate_matrix(g) * (p ? *p : Mat2c(Mat2c::Identity()));
    }
  }
  for (int q = 0; q < in.n_qubits; ++q) flush(q);
  return out;
}

inline void emit_cnot(Circuit& c, int control, int target) {
  c.ry(target, -kPi / 2);
  c.cz(control, target);
  c.ry(target, kPi / 2);
}

// Exact controlled-u (relative phase included) via u = e^{ia} A X B X C, ABC = I.
inline void emit_controlled_1q(Circuit& c, const Mat2c& u, int control, int target) {
  if ((u - Mat2c::Identity()).cwiseAbs().maxCoeff() < 1e-12) return;
  const ZYZ z = zyz_decompose(u);
  const Mat2c A = rz_matrix(z.beta) * ry_matrix(z.gamma / 2);
  const Mat2c B = ry_matrix(-z.gamma / 2) * rz_matrix(-(z.delta + z.beta) / 2);
  const Mat2c C = rz_matrix((z.delta - z.beta) / 2);
  const bool scalar = std::abs(u(0, 1)) < 1e-14 && std::abs(u(1, 0)) < 1e-14 && std::abs(u(0, 0) - u(1, 1)) < 1e-14;
  if (!scalar) {
    emit_1q(c, C, target);
    emit_cnot(c, control, target);
    emit_1q(c, B, target);
    emit_cnot(c, control, target);
    emit_1q(c, A, target);
  }
  const double phase = scalar ? std::arg(u(0, 0)) : z.alpha;
  if (std::abs(fold_angle(phase)) > 1e-12) c.rz(control, phase);
}

inline Mat2c unitary_sqrt(const Mat2c& w) {
  Eigen::ComplexSchur<Mat2c> schur(w);
  const Mat2c& t = schur.matrixT();
  const Mat2c& q = schur.matrixU();
  Mat2c d = Mat2c::Zero();
  d(0, 0) = std::sqrt(t(0, 0));
  d(1, 1) = std::sqrt(t(1, 1));
  return q * d * q.adjoint();
}

// Doubly-controlled w on target, active when c1 = 1 and c2 = 1.
inline void emit_doubly_controlled(Circuit& c, const Mat2c& w, int c1, int c2, int target) {
  const Mat2c v = unitary_sqrt(w);
  emit_controlled_1q(c, v, c1, target);
  emit_cnot(c, c1, c2);
  emit_controlled_1q(c, v.adjoint(), c2, target);
  emit_cnot(c, c1, c2);
  emit_controlled_1q(c, v, c2, target);
}

struct TwoLevel {
  int target;  // 0 = hi, 1 = lo
  int cond;    // value the other register qubit must have, or -1 for none
  Mat2c m;     // acts on the target qubit (|0>, |1>)
};

// Controlled diagonal diag(d) on a 2-qubit register, via a Walsh expansion of the phases.
inline void emit_controlled_diagonal(Circuit& c, const Eigen::Vector4cd& d, int control, int hi, int lo) {
  std::array<double, 4> ph{};
  for (int j = 0; j < 4; ++j) ph[static_cast<std::size_t>(j)] = std::arg(d(j));
  const double c0 = (ph[0] + ph[1] + ph[2] + ph[3]) / 4;
  const double c1 = (ph[0] + ph[1] - ph[2] - ph[3]) / 4;
  const double c2 = (ph[0] - ph[1] + ph[2] - ph[3]) / 4;
  const double c3 = (ph[0] - ph[1] - ph[2] + ph[3]) / 4;
  const double eps = 1e-12;
  if (std::abs(c0) > eps) c.rz(control, c0);
  if (std::abs(c1) > eps) {
    c.rz(hi, -c1);
    emit_cnot(c, control, hi);
    c.rz(hi, c1);
    emit_cnot(c, control, hi);
  }
  if (std::abs(c2) > eps) {
    c.rz(lo, -c2);
    emit_cnot(c, control, lo);
    c.rz(lo, c2);
    emit_cnot(c, control, lo);
  }
  if (std::abs(c3) > eps) {
    emit_cnot(c, hi, lo);
    c.rz(lo, -c3);
    emit_cnot(c, hi, lo);
    emit_cnot(c, control, lo);
    emit_cnot(c, hi, lo);
    c.rz(lo, c3);
    emit_cnot(c, hi, lo);
    emit_cnot(c, control, lo);
  }
}

// Splits u = a (x) b when the operator-Schmidt rank is 1.
inline std::optional<std::pair<Mat2c, Mat2c>> tensor_factors(const Mat4c& u) {
  Mat4c r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) r(2 * i + j, 2 * k + l) = u(2 * i + k, 2 * j + l);
  Eigen::JacobiSVD<Mat4c> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  if (s(1) > 1e-10 * s(0)) return std::nullopt;
  Mat2c a, b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a(i, j) = std::sqrt(s(0)) * svd.matrixU()(2 * i + j, 0);
      b(i, j) = std::sqrt(s(0)) * std::conj(svd.matrixV()(2 * i + j, 0));
    }
  const double scale = std::sqrt(std::abs(a.determinant()));
  a /= scale;
  b *= scale;
  if ((kron(a, b) - u).cwiseAbs().maxCoeff() > 1e-10) return std::nullopt;
  return std::make_pair(a, b);
}

// Two-level elimination along hypercube edges: rows (keep, elim) differ in one bit.
inline std::pair<std::vector<TwoLevel>, Eigen::Vector4cd> givens_decompose(const Mat4c& u) {
  static const std::array<std::array<int, 3>, 6> schedule = {{
      {0, 1, 3}, {0, 0, 1}, {0, 0, 2},  // column 00
      {1, 3, 2}, {1, 1, 3},             // column 01
      {2, 2, 3},                        // column 10
  }};
  Mat4c w = u;
  std::vector<TwoLevel> ops;
  for (const auto& [col, keep, elim] : schedule) {
    const cplx a = w(keep, col), b = w(elim, col);
    if (std::abs(b) < 1e-14) continue;
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    Mat2c g;
    g << std::conj(a) / n, std::conj(b) / n, b / n, -a / n;
    const Eigen::Matrix<cplx, 1, 4> rk = w.row(keep), re = w.row(elim);
    w.row(keep) = g(0, 0) * rk + g(0, 1) * re;
    w.row(elim) = g(1, 0) * rk + g(1, 1) * re;
    const int diff = keep ^ elim;
    TwoLevel t;
    t.target = diff == 2 ? 0 : 1;
    const int other_bit = diff == 2 ? 1 : 2;
    t.cond = (keep & other_bit) ? 1 : 0;
    const bool keep_is_zero = (keep & diff) == 0;
    t.m = keep_is_zero ? g : Mat2c(pauli_matrix('X') * g * pauli_matrix('X'));
    ops.push_back(t);
  }
  return {ops, w.diagonal()};
}

// |0><0| (x) I + |1><1| (x) u on (control; hi, lo), up to global phase.
inline void emit_controlled_2q(Circuit& c, const Mat4c& u, int control, int hi, int lo) {
  if (!is_unitary(MatXc(u))) throw Error(ErrorKind::not_unitary, "representation matrix is not unitary");
  if ((u - Mat4c::Identity()).cwiseAbs().maxCoeff() < 1e-12) return;
  if (auto f = tensor_factors(u)) {
    emit_controlled_1q(c, f->first, control, hi);
    emit_controlled_1q(c, f->second, control, lo);
    return;
  }
  auto [ops, diag] = givens_decompose(u);
  // u = G_1^dag ... G_K^dag D, so D acts first.
  std::vector<TwoLevel> seq;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) seq.push_back({it->target, it->cond, it->m.adjoint()});
  std::vector<TwoLevel> merged;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i + 1 < seq.size() && seq[i].target == seq[i + 1].target && seq[i].cond + seq[i + 1].cond == 1 &&
        (seq[i].m - seq[i + 1].m).cwiseAbs().maxCoeff() < 1e-12) {
      merged.push_back({seq[i].target, -1, seq[i].m});
      ++i;
    } else {
      merged.push_back(seq[i]);
    }
  }
  emit_controlled_diagonal(c, diag, control, hi, lo);
  for (const auto& t : merged) {
    const int tq = t.target == 0 ? hi : lo;
    const int oq = t.target == 0 ? lo : hi;
    if (t.cond < 0) {
      emit_controlled_1q(c, t.m, control, tq);
      continue;
    }
    if (t.cond == 0) c.x(oq);
    emit_doubly_controlled(c, t.m, control, oq, tq);
    if (t.cond == 0) c.x(oq);
  }
}

struct Register {
  int hi;
  int lo;
};

inline Circuit controlled_symmetry(const Mat4c& rep1, const Mat4c& rep2, int control, Register a, Register b,
                                   int n_qubits = 5) {
  Circuit c(n_qubits);
  emit_controlled_2q(c, rep1, control, a.hi, a.lo);
  emit_controlled_2q(c, rep2, control, b.hi, b.lo);
  return peephole(c);
}

// Schmidt form: one Ry for the Schmidt angle, one CNOT if entangled, then local bases.
inline Circuit prepare_state(const Vec4c& target, Register r, int n_qubits = 2) {
  if (std::abs(target.norm() - 1.0) > 1e-10) throw Error(ErrorKind::not_normalized, "target state is not normalized");
  Mat2c m;
  m << target(0), target(1), target(2), target(3);
  Eigen::JacobiSVD<Mat2c> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  Circuit c(n_qubits);
  const double theta = std::atan2(s(1), s(0));
  if (std::abs(theta) > 1e-12) c.ry(r.hi, 2.0 * theta);
  if (s(1) > 1e-12) emit_cnot(c, r.hi, r.lo);
  emit_1q(c, svd.matrixU(), r.hi);
  emit_1q(c, svd.matrixV().conjugate(), r.lo);
  return peephole(c);
}

}  // namespace blg
