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

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "blg/common.hpp"
#include "blg/qsim.hpp"
#include "blg/symmetry.hpp"

namespace blg {

inline constexpr int kAncilla = 0;
inline constexpr Register kRegA{1, 2};
inline constexpr Register kRegB{3, 4};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for k successes out of n.
inline Interval wilson_interval(std::uint64_t k, std::uint64_t n, double level = 0.95) {
  if (n == 0) throw Error(ErrorKind::invalid_config, "shots must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::invalid_config, "confidence level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct CheckOutcome {
  std::string op_name;
  std::uint64_t shots = 0;
  std::uint64_t n0 = 0;
  std::uint64_t n1 = 0;
  double p0_hat = 0.0;
  Interval ci;
  std::optional<double> exact_p0;  // analytic noiseless value
  double model_p0 = 0.0;           // ancilla marginal of the simulated state
  int gates_1q = 0;
  int gates_2q = 0;
  std::uint64_t seed = 0;
};

enum class CharDecision { SameCharacter, DifferentCharacter, Inconclusive };
enum class IRDecision { SameIR, DifferentIR, Inconclusive };

inline std::string to_string(CharDecision d) {
  switch (d) {
    case CharDecision::SameCharacter: return "SameCharacter";
    case CharDecision::DifferentCharacter: return "DifferentCharacter";
    case CharDecision::Inconclusive: break;
  }
  return "Inconclusive";
}

inline std::string to_string(IRDecision d) {
  switch (d) {
    case IRDecision::SameIR: return "SameIR";
    case IRDecision::DifferentIR: return "DifferentIR";
    case IRDecision::Inconclusive: break;
  }
  return "Inconclusive";
}

struct Backend {
  std::optional<NoiseModel> noise;  // nullopt: ideal statevector

  static Backend ideal() { return {}; }
  static Backend noisy(const NoiseModel& m) { return Backend{m}; }
  bool is_ideal() const { return !noise.has_value(); }
};

// Hadamard-test probabilities from the eigen-expansion of rep1 (x) rep2.
inline std::pair<double, double> predict_ideal(const Vec4c& psi1, const Vec4c& psi2, const Mat4c& rep1,
                                               const Mat4c& rep2) {
  if (std::abs(psi1.norm() - 1.0) > 1e-10 || std::abs(psi2.norm() - 1.0) > 1e-10)
    throw Error(ErrorKind::not_normalized, "states must be unit norm");
  auto expand = [](const Vec4c& psi, const Mat4c& rep) {
    Eigen::ComplexSchur<Mat4c> schur(rep);
    const Mat4c& T = schur.matrixT();
    std::vector<std::pair<cplx, double>> terms;
    for (int m = 0; m < 4; ++m) {
      if (std::abs(std::abs(T(m, m)) - 1.0) > 1e-10) throw Error(ErrorKind::not_unitary, "rep eigenvalue off the unit circle");
      for (int j = m + 1; j < 4; ++j)
        if (std::abs(T(m, j)) > 1e-10) throw Error(ErrorKind::not_unitary, "rep is not normal");
      const cplx a = (schur.matrixU().col(m).adjoint() * psi)(0, 0);
      terms.emplace_back(T(m, m), std::norm(a));
    }
    return terms;
  };
  const auto e1 = expand(psi1, rep1);
  const auto e2 = expand(psi2, rep2);
  double p0 = 0.0, p1 = 0.0;
  for (const auto& [c1, w1] : e1)
    for (const auto& [c2, w2] : e2) {
      const cplx l = c1 * c2;
      p0 += 0.25 * w1 * w2 * std::norm(1.0 + l);
      p1 += 0.25 * w1 * w2 * std::norm(1.0 - l);
    }
  return {p0, p1};
}

inline Mat2c hadamard() {
  Mat2c h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

inline Circuit build_check_circuit(const Vec4c& psi1, const Vec4c& psi2, const Mat4c& rep1, const Mat4c& rep2) {
  Circuit c(5);
  c.append(prepare_state(psi1, kRegA, 5));
  c.append(prepare_state(psi2, kRegB, 5));
  emit_1q(c, hadamard(), kAncilla);
  Circuit ctrl(5);
  emit_controlled_2q(ctrl, rep1, kAncilla, kRegA.hi, kRegA.lo);
  emit_controlled_2q(ctrl, rep2, kAncilla, kRegB.hi, kRegB.lo);
  c.append(ctrl);
  emit_1q(c, hadamard(), kAncilla);
  return peephole(c);
}

inline CheckOutcome run_check(const Vec4c& psi1, const Vec4c& psi2, const Mat4c& rep1, const Mat4c& rep2,
                              const Backend& backend, std::uint64_t shots, std::uint64_t seed,
                              const std::string& op_name = "") {
  const Circuit c = build_check_circuit(psi1, psi2, rep1, rep2);
  const Mode mode = backend.is_ideal() ? Mode::statevector : Mode::density_matrix;
  const QuantumState out = apply(QuantumState::zero(5, mode), c, backend.noise);
  const Counts counts = measure_qubit(out, kAncilla, shots, seed);
  CheckOutcome o;
  o.op_name = op_name;
  o.shots = shots;
  o.n0 = counts.n0;
  o.n1 = counts.n1;
  o.p0_hat = static_cast<double>(counts.n0) / static_cast<double>(shots);
  o.ci = wilson_interval(counts.n0, shots);
  o.model_p0 = counts.p0_exact;
  o.exact_p0 = predict_ideal(psi1, psi2, rep1, rep2).first;
  o.gates_1q = c.count_1q();
  o.gates_2q = c.count_2q();
  o.seed = seed;
  return o;
}

inline CharDecision decide(const CheckOutcome& o, double threshold = 0.5) {
  if (o.shots < 1) throw Error(ErrorKind::invalid_config, "shots must be >= 1");
  if (o.ci.lo > threshold) return CharDecision::SameCharacter;
  if (o.ci.hi < threshold) return CharDecision::DifferentCharacter;
  return CharDecision::Inconclusive;
}

struct IRVerdict {
  std::string first;
  std::string second;
  std::vector<CheckOutcome> outcomes;
  std::vector<CharDecision> decisions;
  IRDecision decision = IRDecision::Inconclusive;
  std::string offending_op;  // first inconclusive op, if any
};

inline IRDecision aggregate(const std::vector<CharDecision>& d) {
  bool any_diff = false;
  for (auto x : d) {
    if (x == CharDecision::Inconclusive) return IRDecision::Inconclusive;
    any_diff = any_diff || x == CharDecision::DifferentCharacter;
  }
  return any_diff ? IRDecision::DifferentIR : IRDecision::SameIR;
}

struct CheckRequest {
  Backend backend;
  std::uint64_t shots = 100000;
  std::uint64_t seed = 0;
  double threshold = 0.5;
};

// Runs one check per op (class representatives unless names are given). States and reps
// are moved into the phase-aligned basis first, which leaves every character unchanged.
inline IRVerdict check_irrep_equality(const Vec4c& psi1, const Vec4c& psi2, const LittleGroup& lg,
                                      const CheckRequest& req, const std::vector<std::string>& op_classes = {},
                                      const std::string& first = "psi1", const std::string& second = "psi2") {
  std::vector<int> ops;
  if (op_classes.empty()) {
    ops = lg.group.class_representatives();
  } else {
    for (const auto& name : op_classes) {
      const int idx = lg.op_of_class(name);
      if (idx < 0) throw Error(ErrorKind::unknown_label, "no operation of class " + name + " in " + lg.group.label);
      ops.push_back(idx);
    }
  }
  const Vec4c a = lg.U * psi1, b = lg.U * psi2;
  IRVerdict v;
  v.first = first;
  v.second = second;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto idx = static_cast<std::size_t>(ops[i]);
    const Mat4c rep = lg.aligned_rep(idx);
    const auto& op = lg.group.operations[idx];
    const std::string name = lg.group.class_names[static_cast<std::size_t>(op.cls)];
    CheckOutcome o = run_check(a, b, rep, rep, req.backend, req.shots, derive_seed(req.seed, i), name);
    const CharDecision d = decide(o, req.threshold);
    if (d == CharDecision::Inconclusive && v.offending_op.empty()) v.offending_op = name;
    v.outcomes.push_back(std::move(o));
    v.decisions.push_back(d);
  }
  v.decision = aggregate(v.decisions);
  return v;
}

inline nlohmann::json to_json(const CheckOutcome& o) {
  nlohmann::json j{{"op", o.op_name},       {"shots", o.shots},     {"n0", o.n0},
                   {"n1", o.n1},            {"p0_hat", o.p0_hat},   {"ci", {o.ci.lo, o.ci.hi}},
                   {"model_p0", o.model_p0}, {"gates_1q", o.gates_1q}, {"gates_2q", o.gates_2q},
                   {"seed", o.seed}};
  j["exact_p0"] = o.exact_p0 ? nlohmann::json(*o.exact_p0) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const IRVerdict& v) {
  nlohmann::json ops = nlohmann::json::array();
  for (std::size_t i = 0; i < v.outcomes.size(); ++i) {
    auto j = to_json(v.outcomes[i]);
    j["decision"] = to_string(v.decisions[i]);
    ops.push_back(j);
  }
  nlohmann::json out{{"pair", {v.first, v.second}}, {"decision", to_string(v.decision)}, {"ops", ops}};
  if (!v.offending_op.empty()) out["offending_op"] = v.offending_op;
  return out;
}

}  // namespace blg
