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
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "blg/common.hpp"
#include "blg/lattice.hpp"

namespace blg {

// Non-positive r0 / cutoffs mean "derive from the geometry".
struct TBParams {
  double v_pps = 0.48;
  double v_ppp = -0.27;
  double r0 = 0.0;
  double cutoff = 0.0;
  double inplane_cutoff = 0.0;

  TBParams resolved(const StackingConfig& c) const {
    TBParams p = *this;
    if (p.r0 <= 0.0) p.r0 = 0.184 * std::sqrt(3.0) * c.a_cc;
    if (p.cutoff <= 0.0) p.cutoff = 1.05 * std::sqrt(c.a_cc * c.a_cc + c.d * c.d);
    if (p.inplane_cutoff <= 0.0) p.inplane_cutoff = 1.05 * c.a_cc;
    return p;
  }
};

using HamiltonianMatrix = Mat4c;

inline double hopping_integral(const Vec3& disp, const TBParams& p, double d, double a_cc) {
  const double r = disp.norm();
  if (!(r > 0.0)) throw Error(ErrorKind::invalid_config, "zero-length bond");
  const double r0 = p.r0 > 0.0 ? p.r0 : 0.184 * std::sqrt(3.0) * a_cc;
  const double c2 = (disp.z() / r) * (disp.z() / r);
  return p.v_pps * std::exp((d - r) / r0) * c2 + p.v_ppp * std::exp((a_cc - r) / r0) * (1.0 - c2);
}

inline double hopping_integral(const NeighborBond& b, const TBParams& p, const StackingConfig& c) {
  return hopping_integral(b.displacement, p, c.d, c.a_cc);
}

// Bonds kept by the model: in-plane up to inplane_cutoff, interlayer up to cutoff.
inline std::vector<NeighborBond> model_bonds(const LatticeGeometry& g, const TBParams& params) {
  const TBParams p = params.resolved(g.config);
  const double reach = std::max(p.cutoff, p.inplane_cutoff);
  std::vector<NeighborBond> all = enumerate_bonds(g, reach);
  std::vector<NeighborBond> kept;
  for (const auto& b : all) {
    const bool inplane = std::abs(b.displacement.z()) < 1e-9;
    const double r = b.displacement.norm();
    if (inplane ? r <= p.inplane_cutoff + 1e-9 : r <= p.cutoff + 1e-9) kept.push_back(b);
  }
  if (kept.empty()) throw Error(ErrorKind::empty_bond_set, "model keeps no bonds");
  return kept;
}

// atomic: phases exp(i k.displacement), matches the tabulated SALCs.
// periodic: phases exp(i k.R), strictly periodic in k.
enum class Gauge { atomic, periodic };

class TightBindingModel {
 public:
  TightBindingModel(const LatticeGeometry& g, const TBParams& params = {})
      : geometry_(g), params_(params.resolved(g.config)) {
    for (const auto& b : model_bonds(g, params_)) {
      hops_.push_back(Hop{b.from, b.to, b.displacement,
                          b.cell_offset[0] * g.a1 + b.cell_offset[1] * g.a2,
                          hopping_integral(b, params_, g.config)});
    }
  }

  const LatticeGeometry& geometry() const { return geometry_; }
  const TBParams& params() const { return params_; }
  std::size_t bond_count() const { return hops_.size(); }

  HamiltonianMatrix hamiltonian(const Vec3& k, Gauge gauge = Gauge::atomic) const {
    HamiltonianMatrix h = HamiltonianMatrix::Zero();
    for (const auto& hop : hops_) {
      const double phase = k.dot(gauge == Gauge::atomic ? hop.disp : hop.cell);
      h(hop.from, hop.to) += hop.t * std::polar(1.0, phase);
    }
    return h;
  }

 private:
  struct Hop {
    int from, to;
    Vec3 disp, cell;
    double t;
  };
  LatticeGeometry geometry_;
  TBParams params_;
  std::vector<Hop> hops_;
};

inline HamiltonianMatrix bloch_hamiltonian(const KPoint& k, const LatticeGeometry& g,
                                           const TBParams& params = {}, Gauge gauge = Gauge::atomic) {
  return TightBindingModel(g, params).hamiltonian(k.coords, gauge);
}

inline double hermiticity_error(const Mat4c& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

struct Eigensystem {
  Eigen::Vector4d energies;
  Mat4c vectors;  // column j belongs to energies(j)
};

// First component above 1e-8 in magnitude becomes real positive.
inline void fix_gauge(Vec4c& v) {
  for (int i = 0; i < 4; ++i) {
    if (std::abs(v(i)) > 1e-8) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = cplx(v(i).real(), 0.0);
      return;
    }
  }
}

// Cyclic complex Jacobi. Each rotation first removes the phase of a_pq, then
// applies the real symmetric Jacobi rotation.
inline Eigensystem eigensolve(const Mat4c& h_in, double tol = 1e-12, int max_sweeps = 100) {
  if (!h_in.allFinite()) throw Error(ErrorKind::not_hermitian, "non-finite entries");
  if (hermiticity_error(h_in) > 1e-10) throw Error(ErrorKind::not_hermitian, "input is not Hermitian");
  Mat4c a = 0.5 * (h_in + h_in.adjoint());
  Mat4c v = Mat4c::Identity();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

  auto off = [&] {
    double s = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) s += std::norm(a(p, q));
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off() > tol * scale; ++sweep) {
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 4; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag < 1e-300) continue;
        const cplx ph = a(p, q) / mag;
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // G = diag(1, conj(ph)) * [[c, s], [-s, c]] on the (p, q) plane.
        Mat4c g = Mat4c::Identity();
        g(p, p) = c;
        g(p, q) = s;
        g(q, p) = -s * std::conj(ph);
        g(q, q) = c * std::conj(ph);
        a = g.adjoint() * a * g;
        v = v * g;
      }
  }
  if (off() > tol * scale * 10.0)
    throw Error(ErrorKind::not_converged, "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");

  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  Eigensystem out;
  for (int j = 0; j < 4; ++j) {
    out.energies(j) = a(order[j], order[j]).real();
    Vec4c col = v.col(order[j]);
    fix_gauge(col);
    out.vectors.col(j) = col;
  }
  return out;
}

struct BandData {
  std::vector<KPoint> path;
  std::vector<Eigen::Vector4d> energies;
  std::vector<Mat4c> vectors;

  std::size_t size() const { return path.size(); }
};

inline BandData band_structure(const std::vector<KPoint>& path, const TightBindingModel& model,
                               Gauge gauge = Gauge::atomic) {
  if (path.empty()) throw Error(ErrorKind::invalid_path, "empty k-path");
  BandData b;
  b.path = path;
  b.energies.reserve(path.size());
  b.vectors.reserve(path.size());
  for (const auto& k : path) {
    Eigensystem es = eigensolve(model.hamiltonian(k.coords, gauge));
    b.energies.push_back(es.energies);
    b.vectors.push_back(es.vectors);
  }
  return b;
}

inline BandData band_structure(const std::vector<KPoint>& path, const LatticeGeometry& g,
                               const TBParams& params = {}) {
  return band_structure(path, TightBindingModel(g, params));
}

inline std::string bands_csv(const BandData& b) {
  std::string out = "path_index,k_x,k_y,k_z,E1,E2,E3,E4\n";
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3& k = b.path[i].coords;
    out += fmt::format("{},{:.10f},{:.10f},{:.10f}", i, k.x(), k.y(), k.z());
    for (int j = 0; j < 4; ++j) out += fmt::format(",{:.10f}", b.energies[i](j));
    out += "\n";
  }
  return out;
}

inline nlohmann::json eigenvectors_json(const BandData& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < b.size(); ++i) {
    nlohmann::json bands = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) {
      nlohmann::json v = nlohmann::json::array();
      for (int c = 0; c < 4; ++c) v.push_back({b.vectors[i](c, j).real(), b.vectors[i](c, j).imag()});
      bands.push_back(v);
    }
    nlohmann::json row = {{"path_index", i}, {"vectors", bands}};
    if (b.path[i].label) row["label"] = *b.path[i].label;
    rows.push_back(row);
  }
  return nlohmann::json{{"basis", {"A1", "B1", "A2", "B2"}}, {"points", rows}};
}

// Two-qubit Paulis. The first letter acts on the layer qubit (high bit of the
// basis index), the second on the sublattice qubit.
inline Mat2c pauli_matrix(char c) {
  Mat2c m;
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -kI, kI, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw Error(ErrorKind::unknown_label, std::string("bad Pauli letter ") + c);
  }
  return m;
}

inline Mat4c kron(const Mat2c& hi, const Mat2c& lo) {
  Mat4c m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = hi(i, j) * lo(k, l);
  return m;
}

inline Mat4c pauli_string(const std::string& s) {
  if (s.size() != 2) throw Error(ErrorKind::unknown_label, "Pauli string must have 2 letters");
  return kron(pauli_matrix(s[0]), pauli_matrix(s[1]));
}

struct PauliTerm {
  std::string pauli;
  double coeff;
};

inline std::vector<PauliTerm> pauli_decompose(const Mat4c& h, double drop_below = 1e-14) {
  if (hermiticity_error(h) > 1e-10) throw Error(ErrorKind::not_hermitian, "Pauli decomposition needs a Hermitian matrix");
  std::vector<PauliTerm> terms;
  for (char p : std::string("IXYZ"))
    for (char q : std::string("IXYZ")) {
      const std::string s{p, q};
      const double c = (pauli_string(s) * h).trace().real() / 4.0;
      if (std::abs(c) > drop_below) terms.push_back({s, c});
    }
  return terms;
}

inline Mat4c pauli_reconstruct(const std::vector<PauliTerm>& terms) {
  Mat4c h = Mat4c::Zero();
  for (const auto& t : terms) h += t.coeff * pauli_string(t.pauli);
  return h;
}

inline double expval_classical(const Vec4c& psi, const Mat4c& h) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error(ErrorKind::not_normalized, "state is not normalized");
  return (psi.adjoint() * h * psi)(0, 0).real();
}

}  // namespace blg
