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
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "blg/common.hpp"
#include "blg/lattice.hpp"
#include "blg/tables_data.hpp"
#include "blg/tightbinding.hpp"

namespace blg {

// How a p_z orbital transforms. `scalar` treats orbitals as bare sites;
// `odd_z` multiplies by -1 for operations that flip z.
enum class OrbitalParity { scalar, odd_z };

struct Irrep {
  std::string label;
  int dim = 1;
  std::vector<double> chars;  // one per class
};

struct SymmetryOp {
  std::string name;
  Mat3 R = Mat3::Identity();
  int cls = -1;  // index into PointGroup::class_names
};

struct PointGroup {
  std::string label;
  std::vector<std::string> class_names;
  std::vector<int> class_sizes;
  std::vector<Irrep> irreps;
  std::vector<SymmetryOp> operations;

  int order() const {
    int h = 0;
    for (int c : class_sizes) h += c;
    return h;
  }
  int class_count() const { return static_cast<int>(class_names.size()); }

  int class_index(const std::string& name) const;
  const Irrep& irrep(const std::string& label) const;
  // First operation of each class, in class order.
  std::vector<int> class_representatives() const {
    std::vector<int> reps(class_names.size(), -1);
    for (std::size_t i = 0; i < operations.size(); ++i)
      if (reps[static_cast<std::size_t>(operations[i].cls)] < 0)
        reps[static_cast<std::size_t>(operations[i].cls)] = static_cast<int>(i);
    return reps;
  }
};

// ASCII spellings for primes and mirrors: C2' -> C2′, sv -> σv, A1'' -> A1″.
inline std::string normalize_symbol(const std::string& in) {
  std::string s;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '\'' && i + 1 < in.size() && in[i + 1] == '\'') {
      s += "″";
      ++i;
    } else if (in[i] == '\'') {
      s += "′";
    } else {
      s += in[i];
    }
  }
  if (s.size() >= 2 && s[0] == 's' && (s[1] == 'h' || s[1] == 'd' || s[1] == 'v' || s[1] == '('))
    s = "σ" + s.substr(1);
  return s;
}

inline int PointGroup::class_index(const std::string& name) const {
  const std::string n = normalize_symbol(name);
  for (std::size_t i = 0; i < class_names.size(); ++i)
    if (class_names[i] == n) return static_cast<int>(i);
  throw Error(ErrorKind::unknown_label, "class '" + name + "' not in " + label);
}

inline const Irrep& PointGroup::irrep(const std::string& l) const {
  const std::string n = normalize_symbol(l);
  for (const auto& ir : irreps)
    if (ir.label == n) return ir;
  throw Error(ErrorKind::unknown_label, "irrep '" + l + "' not in " + label);
}

// ---------------------------------------------------------------------------
// Embedded tables

struct SALCVector {
  Vec4c amplitudes = Vec4c::Zero();
  std::string irrep;
  std::string k_label;
  std::string group;
  Stacking stacking = Stacking::AA;
  bool superseded = false;
};

struct TableData {
  int version = 0;
  std::map<std::string, PointGroup> groups;  // without operations
  std::vector<SALCVector> salcs;
};

inline cplx parse_amplitude(const std::string& tok) {
  std::string t = tok;
  double sign = 1.0;
  if (!t.empty() && t[0] == '-') {
    sign = -1.0;
    t = t.substr(1);
  }
  cplx v;
  if (t == "0") v = 0.0;
  else if (t == "1") v = 1.0;
  else if (t == "i") v = kI;
  else if (t == "w") v = std::polar(1.0, -2.0 * kPi / 3.0);
  else if (t == "w2") v = std::polar(1.0, -4.0 * kPi / 3.0);
  else throw Error(ErrorKind::table_mismatch, "bad amplitude token '" + tok + "'");
  return sign * v;
}

inline double parse_scale(const std::string& s) {
  if (s == "1") return 1.0;
  if (s == "1/2") return 0.5;
  if (s == "1/sqrt2") return 1.0 / std::sqrt(2.0);
  throw Error(ErrorKind::table_mismatch, "bad scale '" + s + "'");
}

inline void check_character_table(const PointGroup& g) {
  const int h = g.order();
  for (std::size_t i = 0; i < g.irreps.size(); ++i) {
    if (g.irreps[i].chars.size() != g.class_names.size())
      throw Error(ErrorKind::table_mismatch, g.label + " " + g.irreps[i].label + ": wrong character count");
    for (std::size_t j = 0; j < g.irreps.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < g.class_names.size(); ++c)
        s += g.class_sizes[c] * g.irreps[i].chars[c] * g.irreps[j].chars[c];
      const double want = i == j ? h : 0.0;
      if (std::abs(s - want) > 1e-9)
        throw Error(ErrorKind::table_mismatch, g.label + ": rows " + g.irreps[i].label + ", " +
                                                   g.irreps[j].label + " are not orthogonal");
    }
  }
  double dims = 0.0;
  for (const auto& ir : g.irreps) dims += ir.dim * ir.dim;
  if (std::abs(dims - h) > 1e-9) throw Error(ErrorKind::table_mismatch, g.label + ": sum of dim^2 != order");
}

inline TableData parse_tables(const std::string& jsonl) {
  TableData t;
  std::istringstream in(jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::table_mismatch, fmt::format("line {}: {}", lineno, e.what()));
    }
    const std::string kind = j.at("record").get<std::string>();
    if (kind == "meta") {
      t.version = j.at("version").get<int>();
    } else if (kind == "group") {
      PointGroup g;
      g.label = j.at("group").get<std::string>();
      g.class_names = j.at("classes").get<std::vector<std::string>>();
      g.class_sizes = j.at("sizes").get<std::vector<int>>();
      t.groups[g.label] = g;
    } else if (kind == "irrep") {
      auto it = t.groups.find(j.at("group").get<std::string>());
      if (it == t.groups.end()) throw Error(ErrorKind::table_mismatch, fmt::format("line {}: irrep before its group", lineno));
      Irrep ir;
      ir.label = j.at("label").get<std::string>();
      ir.chars = j.at("chars").get<std::vector<double>>();
      ir.dim = static_cast<int>(std::lround(ir.chars.at(0)));
      it->second.irreps.push_back(ir);
    } else if (kind == "salc") {
      SALCVector s;
      s.stacking = parse_stacking(j.at("stacking").get<std::string>());
      s.k_label = canonical_label(j.at("k").get<std::string>());
      s.group = j.at("group").get<std::string>();
      s.irrep = j.at("irrep").get<std::string>();
      const auto amps = j.at("amplitudes").get<std::vector<std::string>>();
      if (amps.size() != 4) throw Error(ErrorKind::table_mismatch, fmt::format("line {}: need 4 amplitudes", lineno));
      const double scale = parse_scale(j.at("scale").get<std::string>());
      for (int i = 0; i < 4; ++i) s.amplitudes(i) = scale * parse_amplitude(amps[static_cast<std::size_t>(i)]);
      s.superseded = j.value("status", std::string()) == "superseded";
      t.salcs.push_back(s);
    } else {
      throw Error(ErrorKind::table_mismatch, fmt::format("line {}: unknown record '{}'", lineno, kind));
    }
  }
  if (t.version != 1) throw Error(ErrorKind::table_mismatch, "unsupported table version");
  for (const auto& [name, g] : t.groups) check_character_table(g);
  return t;
}

inline const TableData& embedded_tables() {
  static const TableData t = parse_tables(kEmbeddedTables);
  return t;
}

// ---------------------------------------------------------------------------
// Geometry of operations

inline Mat3 rot_z(double phi) {
  Mat3 m;
  m << std::cos(phi), -std::sin(phi), 0, std::sin(phi), std::cos(phi), 0, 0, 0, 1;
  return m;
}

inline Mat3 c2_about(const Vec3& axis) {
  const Vec3 n = axis.normalized();
  return 2.0 * n * n.transpose() - Mat3::Identity();
}

inline bool same_matrix(const Mat3& a, const Mat3& b, double tol = 1e-9) {
  return (a - b).cwiseAbs().maxCoeff() < tol;
}

struct RotationInfo {
  double angle = 0.0;  // degrees in [0, 180]
  Vec3 axis = Vec3::UnitZ();
};

inline RotationInfo rotation_info(const Mat3& p) {
  RotationInfo info;
  if ((p - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9) return info;
  const double c = std::clamp((p.trace() - 1.0) / 2.0, -1.0, 1.0);
  info.angle = std::acos(c) * 180.0 / kPi;
  if (180.0 - info.angle < 1e-4) {
    const Mat3 nn = 0.5 * (p + Mat3::Identity());
    int j = 0;
    nn.diagonal().maxCoeff(&j);
    info.axis = nn.col(j).normalized();
  } else {
    info.axis = Vec3(p(2, 1) - p(1, 2), p(0, 2) - p(2, 0), p(1, 0) - p(0, 1)).normalized();
  }
  return info;
}

inline bool near(double a, double b, double tol = 1e-5) { return std::abs(a - b) < tol; }

// In-plane axis direction in degrees, folded into [0, 180).
inline double axis_angle_deg(const Vec3& n) {
  double a = std::atan2(n.y(), n.x()) * 180.0 / kPi;
  a = std::fmod(a + 360.0, 180.0);
  if (a > 180.0 - 1e-6) a -= 180.0;
  return a;
}

// Name of a proper rotation expressed in the canonical frame.
inline std::string proper_kind(const Mat3& p) {
  const RotationInfo r = rotation_info(p);
  if (r.angle == 0.0) return "E";
  if (std::abs(std::abs(r.axis.z()) - 1.0) < 1e-6) {
    if (near(r.angle, 60.0)) return "C6";
    if (near(r.angle, 120.0)) return "C3";
    if (near(r.angle, 180.0)) return "C2z";
  } else if (std::abs(r.axis.z()) < 1e-6 && near(r.angle, 180.0)) {
    return fmt::format("C2@{:.0f}", axis_angle_deg(r.axis));
  }
  throw Error(ErrorKind::unsupported_group, "rotation outside the hexagonal set");
}

inline double inplane_angle(const std::string& kind) { return std::stod(kind.substr(3)); }

// Canonical class of op R for the given group. `frame` has rows x', y', z'.
inline std::string canonical_class(const std::string& group, const Mat3& R, const Mat3& frame) {
  const Mat3 rc = frame * R * frame.transpose();
  const bool improper = rc.determinant() < 0.0;
  const Mat3 p = improper ? Mat3(-rc) : rc;
  const std::string k = proper_kind(p);
  const bool inplane = k.rfind("C2@", 0) == 0;
  const double phi = inplane ? inplane_angle(k) : 0.0;
  auto fold = [](double a, double period) {
    double r = std::fmod(a, period);
    return std::min(r, period - r);
  };

  if (group == "D6h") {
    std::string pc = k == "C2z" ? "C2" : k;
    if (inplane) pc = fold(phi, 60.0) < 1e-3 ? "C2′" : "C2″";
    if (!improper) return pc;
    static const std::map<std::string, std::string> inv = {
        {"E", "i"}, {"C6", "S3"}, {"C3", "S6"}, {"C2", "σh"}, {"C2′", "σd"}, {"C2″", "σv"}};
    return inv.at(pc);
  }
  if (group == "D3h") {
    if (!improper) return inplane ? "C2′" : k;
    if (k == "C2z") return "σh";
    if (k == "C6") return "S3";
    if (inplane) return "σv";
  }
  if (group == "D3d" || group == "D3") {
    std::string pc = inplane ? "C2" : k;
    if (!improper) return pc;
    static const std::map<std::string, std::string> inv = {{"E", "i"}, {"C3", "S6"}, {"C2", "σd"}};
    return inv.at(pc);
  }
  if (group == "D2h") {
    std::string pc = k;
    if (k == "C2z") pc = "C2(z)";
    if (inplane) pc = fold(phi, 180.0) < 1e-3 ? "C2(x)" : "C2(y)";
    if (!improper) return pc;
    static const std::map<std::string, std::string> inv = {
        {"E", "i"}, {"C2(z)", "σ(xy)"}, {"C2(y)", "σ(xz)"}, {"C2(x)", "σ(yz)"}};
    return inv.at(pc);
  }
  if (group == "C2v") {
    if (!improper) return k == "C2z" ? "C2" : k;
    // Mirror normal along y' lies in the xz plane.
    if (inplane) return fold(phi, 180.0) < 1e-3 ? "σv′(yz)" : "σv(xz)";
  }
  if (group == "C2h") {
    if (!improper) return k == "C2z" ? "C2" : k;
    if (k == "E") return "i";
    if (k == "C2z") return "σh";
  }
  if (group == "C2" && !improper) return k == "C2z" ? "C2" : k;
  if (group == "Cs") {
    if (!improper) return k;
    if (k == "C2z") return "σh";
  }
  if (group == "C1" && k == "E" && !improper) return "E";
  throw Error(ErrorKind::unsupported_group, "operation does not fit group " + group);
}

inline std::string op_name(const Mat3& R) {
  const bool improper = R.determinant() < 0.0;
  const Mat3 p = improper ? Mat3(-R) : R;
  const RotationInfo r = rotation_info(p);
  std::string base;
  if (r.angle == 0.0) {
    base = "E";
  } else if (std::abs(std::abs(r.axis.z()) - 1.0) < 1e-6) {
    const int n = static_cast<int>(std::lround(360.0 / r.angle));
    const bool plus = r.axis.z() > 0 || n == 2;
    base = n == 2 ? "C2z" : fmt::format("C{}{}", n, plus ? "+" : "-");
  } else {
    base = fmt::format("C2[{:.0f}]", axis_angle_deg(r.axis));
  }
  if (!improper) return base;
  if (base == "E") return "i";
  if (base == "C2z") return "σh";
  if (base[1] == '2') return fmt::format("σ[{:.0f}]", axis_angle_deg(r.axis));
  if (base == "C6+") return "S3-";
  if (base == "C6-") return "S3+";
  if (base == "C3+") return "S6-";
  return "S6+";
}

// The 24 operations of the hexagonal holohedry about z, with x along the crystal x axis.
inline std::vector<Mat3> hexagonal_candidates() {
  std::vector<Mat3> ops;
  for (int n = 0; n < 6; ++n) ops.push_back(rot_z(n * kPi / 3.0));
  for (int m = 0; m < 6; ++m) ops.push_back(c2_about(Vec3(std::cos(m * kPi / 6.0), std::sin(m * kPi / 6.0), 0.0)));
  const std::size_t n = ops.size();
  for (std::size_t i = 0; i < n; ++i) ops.push_back(-ops[i]);
  return ops;
}

inline std::vector<Mat3> group_closure(const std::vector<Mat3>& generators) {
  std::vector<Mat3> g{Mat3::Identity()};
  for (bool grown = true; grown;) {
    grown = false;
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& s : generators) {
        const Mat3 p = s * g[i];
        if (std::none_of(g.begin(), g.end(), [&](const Mat3& q) { return same_matrix(p, q); })) {
          g.push_back(p);
          grown = true;
        }
      }
  }
  return g;
}

// Orders operations by class, then by the fixed candidate order, so every
// realization of a group lists its operations the same way.
inline void sort_operations(PointGroup& g) {
  const auto cands = hexagonal_candidates();
  auto rank = [&](const Mat3& R) {
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (same_matrix(R, cands[i])) return static_cast<int>(i);
    return 1000;
  };
  std::stable_sort(g.operations.begin(), g.operations.end(), [&](const SymmetryOp& a, const SymmetryOp& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    return rank(a.R) < rank(b.R);
  });
}

inline void assign_classes(PointGroup& g, const Mat3& frame) {
  std::vector<int> counts(g.class_names.size(), 0);
  for (auto& op : g.operations) {
    op.cls = g.class_index(canonical_class(g.label, op.R, frame));
    ++counts[static_cast<std::size_t>(op.cls)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] != g.class_sizes[c])
      throw Error(ErrorKind::unsupported_group,
                  fmt::format("{}: class {} has {} ops, expected {}", g.label, g.class_names[c], counts[c], g.class_sizes[c]));
  sort_operations(g);
}

// Abstract group with a standard realization: principal axis z, x' = x.
inline PointGroup point_group(const std::string& label) {
  const auto& tables = embedded_tables();
  auto it = tables.groups.find(label);
  if (it == tables.groups.end()) throw Error(ErrorKind::unsupported_group, "unsupported point group '" + label + "'");
  PointGroup g = it->second;
  const Mat3 c6 = rot_z(kPi / 3.0), c3 = rot_z(2.0 * kPi / 3.0), c2z = rot_z(kPi);
  const Mat3 c2x = c2_about(Vec3::UnitX()), inv = -Mat3::Identity();
  const Mat3 sh = -c2z, sxz = -c2_about(Vec3::UnitY());
  std::vector<Mat3> gens;
  if (label == "D6h") gens = {c6, c2x, inv};
  else if (label == "D3h") gens = {c3, c2x, sh};
  else if (label == "D3d") gens = {c3, c2x, inv};
  else if (label == "D3") gens = {c3, c2x};
  else if (label == "D2h") gens = {c2z, c2x, inv};
  else if (label == "C2v") gens = {c2z, sxz};
  else if (label == "C2h") gens = {c2z, inv};
  else if (label == "C2") gens = {c2z};
  else if (label == "Cs") gens = {sh};
  for (const auto& R : group_closure(gens)) g.operations.push_back(SymmetryOp{op_name(R), R, -1});
  assign_classes(g, Mat3::Identity());
  return g;
}

// Image of site alpha under R: returns beta and the lattice vector t with R r_alpha = r_beta + t.
inline std::optional<std::pair<int, Vec3>> site_image(const LatticeGeometry& geo, const Mat3& R, int alpha) {
  const Vec3 img = R * geo.site(alpha);
  for (int beta = 0; beta < 4; ++beta) {
    const Vec3 t = img - geo.site(beta);
    if (lattice_coords(geo, t, 1e-6)) return std::make_pair(beta, t);
  }
  return std::nullopt;
}

inline bool maps_crystal(const LatticeGeometry& geo, const Mat3& R) {
  for (int a = 0; a < 4; ++a)
    if (!site_image(geo, R, a)) return false;
  return true;
}

inline std::vector<Mat3> crystal_operations(const LatticeGeometry& geo) {
  std::vector<Mat3> ops;
  for (const auto& R : hexagonal_candidates())
    if (maps_crystal(geo, R)) ops.push_back(R);
  return ops;
}

inline bool in_little_group(const LatticeGeometry& geo, const Mat3& R, const Vec3& k) {
  return is_reciprocal_vector(geo, R * k - k, 1e-7);
}

// Entry (beta, alpha) = exp(i G.r_beta) for the image site beta, G = Rk - k.
inline Mat4c orbital_rep(const Mat3& R, const LatticeGeometry& geo, const Vec3& k,
                         OrbitalParity parity = OrbitalParity::scalar) {
  const Vec3 G = R * k - k;
  if (!is_reciprocal_vector(geo, G, 1e-7))
    throw Error(ErrorKind::not_in_little_group, "operation " + op_name(R) + " does not map k onto k+G");
  const double sign = parity == OrbitalParity::odd_z ? R(2, 2) : 1.0;
  Mat4c D = Mat4c::Zero();
  for (int a = 0; a < 4; ++a) {
    const auto img = site_image(geo, R, a);
    if (!img) throw Error(ErrorKind::not_in_little_group, "operation " + op_name(R) + " is not a crystal symmetry");
    const int b = img->first;
    D(b, a) = sign * std::polar(1.0, G.dot(geo.site(b)));
  }
  return D;
}

inline Mat4c orbital_rep(const SymmetryOp& op, const LatticeGeometry& geo, const KPoint& k,
                         OrbitalParity parity = OrbitalParity::scalar) {
  return orbital_rep(op.R, geo, k.coords, parity);
}

struct LittleGroup {
  PointGroup group;  // operations in crystal coordinates
  Mat3 frame = Mat3::Identity();  // rows x', y', z'
  Vec3 k = Vec3::Zero();
  OrbitalParity parity = OrbitalParity::scalar;
  std::vector<Mat4c> reps;  // one per operation
  Mat4c U = Mat4c::Identity();  // diagonal phase alignment
  bool real_aligned = false;  // every U D U^dagger is real

  Mat4c aligned_rep(std::size_t i) const { return U * reps[i] * U.adjoint(); }
  int op_of_class(int cls) const {
    for (std::size_t i = 0; i < group.operations.size(); ++i)
      if (group.operations[i].cls == cls) return static_cast<int>(i);
    return -1;
  }
  int op_of_class(const std::string& cls) const { return op_of_class(group.class_index(cls)); }
};

inline std::string identify_group(const std::vector<Mat3>& ops) {
  const std::size_t h = ops.size();
  auto has = [&](const Mat3& m) { return std::any_of(ops.begin(), ops.end(), [&](const Mat3& q) { return same_matrix(q, m); }); };
  const bool inv = has(-Mat3::Identity());
  const bool sh = has(-rot_z(kPi));
  int proper = 0;
  for (const auto& R : ops) proper += R.determinant() > 0 ? 1 : 0;
  if (h == 24) return "D6h";
  if (h == 12 && inv) return "D3d";
  if (h == 12 && sh) return "D3h";
  if (h == 8 && inv) return "D2h";
  if (h == 6 && proper == 6) return "D3";
  if (h == 4 && inv) return "C2h";
  if (h == 4 && proper == 2) return "C2v";
  if (h == 2 && proper == 2) return "C2";
  if (h == 2 && !inv) return "Cs";
  if (h == 1) return "C1";
  throw Error(ErrorKind::unsupported_group, fmt::format("little group of order {} not supported", h));
}

// Canonical frame: z' is the principal axis. x' is chosen so that class
// labels are fixed (see README, "Canonical frame").
inline Mat3 canonical_frame(const std::string& label, const std::vector<Mat3>& ops, const LatticeGeometry& geo,
                            const Vec3& k) {
  Vec3 z = Vec3::UnitZ(), x = Vec3::UnitX();
  auto inplane_c2_axes = [&] {
    std::vector<Vec3> axes;
    for (const auto& R : ops) {
      if (R.determinant() < 0) continue;
      const RotationInfo r = rotation_info(R);
      if (near(r.angle, 180.0) && std::abs(r.axis.z()) < 1e-6) {
        Vec3 n = r.axis;
        if (n.x() < -1e-9 || (std::abs(n.x()) < 1e-9 && n.y() < 0)) n = -n;
        axes.push_back(n);
      }
    }
    std::sort(axes.begin(), axes.end(), [](const Vec3& a, const Vec3& b) { return axis_angle_deg(a) < axis_angle_deg(b); });
    return axes;
  };
  auto unique_c2 = [&]() -> Vec3 {
    for (const auto& R : ops) {
      if (R.determinant() < 0) continue;
      const RotationInfo r = rotation_info(R);
      if (near(r.angle, 180.0)) return r.axis;
    }
    return Vec3::UnitZ();
  };
  const Vec3 kdir = k.head<2>().norm() > 1e-9 ? Vec3(k.x(), k.y(), 0.0).normalized() : Vec3::UnitX();

  if (label == "D6h") {
    // x' along the C2 axis that passes through atoms.
    for (const Vec3& n : inplane_c2_axes()) {
      bool through_atom = false;
      for (int a = 0; a < 4 && !through_atom; ++a)
        for (int n1 = -2; n1 <= 2 && !through_atom; ++n1)
          for (int n2 = -2; n2 <= 2 && !through_atom; ++n2) {
            Vec3 p = geo.site(a) + n1 * geo.a1 + n2 * geo.a2;
            p.z() = 0.0;
            if (p.norm() > 1e-6 && std::abs(n.cross(p).z()) < 1e-6) through_atom = true;
          }
      if (through_atom) {
        x = n;
        break;
      }
    }
  } else if (label == "D3h" || label == "D3d" || label == "D3") {
    x = inplane_c2_axes().front();
  } else if (label == "D2h") {
    x = Vec3::UnitZ().cross(kdir);
  } else if (label == "C2v" || label == "C2" || label == "C2h") {
    z = unique_c2();
    if (std::abs(z.z()) > 0.5) {
      z = Vec3::UnitZ();
      x = kdir;
    } else {
      if (z.x() < -1e-9 || (std::abs(z.x()) < 1e-9 && z.y() < 0)) z = -z;
      x = Vec3::UnitZ();
    }
  } else if (label == "Cs") {
    for (const auto& R : ops)
      if (R.determinant() < 0) z = rotation_info(-R).axis;
    if (std::abs(z.z()) > 0.5) {
      z = Vec3::UnitZ();
      x = kdir;
    } else {
      x = Vec3::UnitZ();
    }
  }
  Mat3 f;
  f.row(0) = x.transpose();
  f.row(1) = z.cross(x).transpose();
  f.row(2) = z.transpose();
  return f;
}

// Diagonal U making every U D U^dagger real where possible (phase BFS over
// the sites linked by the reps).
inline std::pair<Mat4c, bool> phase_alignment(const std::vector<Mat4c>& reps) {
  std::array<double, 4> phase{};
  std::array<bool, 4> seen{};
  for (int root = 0; root < 4; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto& D : reps)
        for (int b = 0; b < 4; ++b) {
          if (std::abs(D(b, a)) < 0.5 || seen[static_cast<std::size_t>(b)]) continue;
          // (U D U^dag)(b, a) = u_b D(b, a) conj(u_a), real when phase_b = phase_a - arg D(b, a).
          phase[static_cast<std::size_t>(b)] = phase[static_cast<std::size_t>(a)] - std::arg(D(b, a));
          seen[static_cast<std::size_t>(b)] = true;
          q.push(b);
        }
    }
  }
  Mat4c U = Mat4c::Zero();
  for (int i = 0; i < 4; ++i) U(i, i) = std::polar(1.0, phase[static_cast<std::size_t>(i)]);
  bool real = true;
  for (const auto& D : reps) real = real && (U * D * U.adjoint()).imag().cwiseAbs().maxCoeff() < 1e-10;
  return {U, real};
}

inline LittleGroup little_group(const Vec3& k, const LatticeGeometry& geo,
                                OrbitalParity parity = OrbitalParity::scalar) {
  std::vector<Mat3> ops;
  for (const auto& R : crystal_operations(geo))
    if (in_little_group(geo, R, k)) ops.push_back(R);
  const std::string label = identify_group(ops);
  LittleGroup lg;
  lg.k = k;
  lg.parity = parity;
  lg.group = embedded_tables().groups.at(label);
  for (const auto& R : ops) lg.group.operations.push_back(SymmetryOp{op_name(R), R, -1});
  lg.frame = canonical_frame(label, ops, geo, k);
  assign_classes(lg.group, lg.frame);
  for (const auto& op : lg.group.operations) lg.reps.push_back(orbital_rep(op.R, geo, k, parity));
  std::tie(lg.U, lg.real_aligned) = phase_alignment(lg.reps);
  return lg;
}

inline LittleGroup little_group(const KPoint& k, const LatticeGeometry& geo,
                                OrbitalParity parity = OrbitalParity::scalar) {
  return little_group(k.coords, geo, parity);
}

// Characters per class from one representative per class.
inline std::vector<cplx> reducible_character(const LittleGroup& lg) {
  std::vector<cplx> chi;
  for (int idx : lg.group.class_representatives()) chi.push_back(lg.reps[static_cast<std::size_t>(idx)].trace());
  return chi;
}

inline std::vector<int> decompose_rep(const std::vector<cplx>& chi, const PointGroup& g) {
  if (chi.size() != g.class_names.size())
    throw Error(ErrorKind::inconsistent_characters, "need one character per class");
  std::vector<int> n;
  for (const auto& ir : g.irreps) {
    cplx s = 0.0;
    for (std::size_t c = 0; c < chi.size(); ++c) s += static_cast<double>(g.class_sizes[c]) * chi[c] * ir.chars[c];
    s /= static_cast<double>(g.order());
    const double r = std::round(s.real());
    if (std::abs(s.real() - r) > 1e-9 || std::abs(s.imag()) > 1e-9 || r < 0)
      throw Error(ErrorKind::inconsistent_characters,
                  fmt::format("multiplicity of {} is {:.6f}{:+.6f}i", ir.label, s.real(), s.imag()));
    n.push_back(static_cast<int>(r));
  }
  return n;
}

inline std::string format_decomposition(const std::vector<int>& n, const PointGroup& g) {
  std::string out;
  for (std::size_t i = 0; i < n.size(); ++i)
    for (int m = 0; m < n[i]; ++m) out += (out.empty() ? "" : " ⊕ ") + g.irreps[i].label;
  return out;
}

inline SALCVector project_salc(const std::string& irrep, const LittleGroup& lg, int seed) {
  const Irrep& ir = lg.group.irrep(irrep);
  if (ir.dim != 1) throw Error(ErrorKind::unsupported_group, "projection is implemented for 1-D irreps only");
  if (seed < 0 || seed > 3) throw Error(ErrorKind::unknown_label, "seed must be a site index");
  Vec4c psi = Vec4c::Zero();
  for (std::size_t j = 0; j < lg.group.operations.size(); ++j)
    psi += ir.chars[static_cast<std::size_t>(lg.group.operations[j].cls)] * lg.reps[j].col(seed);
  if (psi.norm() < 1e-9) throw Error(ErrorKind::zero_projection, "seed " + std::string(kSiteNames[seed]) + " has no " + irrep + " component; try another seed");
  SALCVector s;
  s.amplitudes = psi / psi.norm();
  s.irrep = ir.label;
  s.group = lg.group.label;
  return s;
}

inline cplx character_of_state(const Vec4c& psi, const Mat4c& rep) {
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw Error(ErrorKind::not_normalized, "state is not normalized");
  return (psi.adjoint() * rep * psi)(0, 0);
}

// 1-D irrep of an eigenstate of every rep; nullopt if some character is not unimodular
// or no row matches.
inline std::optional<std::string> irrep_of_state(const Vec4c& psi, const LittleGroup& lg) {
  const auto reps = lg.group.class_representatives();
  std::vector<double> chi;
  for (int idx : reps) {
    const cplx c = character_of_state(psi, lg.reps[static_cast<std::size_t>(idx)]);
    if (std::abs(std::abs(c) - 1.0) > 1e-7 || std::abs(c.imag()) > 1e-7) return std::nullopt;
    chi.push_back(c.real());
  }
  for (const auto& ir : lg.group.irreps) {
    if (ir.dim != 1) continue;
    bool ok = true;
    for (std::size_t c = 0; c < chi.size(); ++c) ok = ok && std::abs(chi[c] - ir.chars[c]) < 1e-7;
    if (ok) return ir.label;
  }
  return std::nullopt;
}

inline double orthonormality_error(const std::vector<SALCVector>& s) {
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      const cplx g = s[i].amplitudes.dot(s[j].amplitudes);
      err = std::max(err, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  return err;
}

inline double verify_block_diagonal(const Mat4c& H, const std::vector<SALCVector>& salcs) {
  if (salcs.size() != 4 || orthonormality_error(salcs) > 1e-9)
    throw Error(ErrorKind::not_orthonormal, "SALC set is not an orthonormal basis of 4 vectors");
  double res = 0.0;
  for (std::size_t i = 0; i < salcs.size(); ++i)
    for (std::size_t j = 0; j < salcs.size(); ++j) {
      if (salcs[i].irrep == salcs[j].irrep) continue;
      res = std::max(res, std::abs(salcs[i].amplitudes.dot(H * salcs[j].amplitudes)));
    }
  return res;
}

inline std::vector<SALCVector> select_salcs(const TableData& t, Stacking s, const std::string& k_label,
                                            bool include_superseded = false) {
  const std::string k = canonical_label(k_label);
  std::vector<SALCVector> out;
  for (const auto& v : t.salcs)
    if (v.stacking == s && v.k_label == k && v.superseded == include_superseded) out.push_back(v);
  return out;
}

// Tabulated SALCs, validated against H(k) of the default model.
inline std::vector<SALCVector> salc_table(const StackingConfig& config, const std::string& k_label) {
  auto rows = select_salcs(embedded_tables(), config.kind, k_label);
  if (rows.empty()) throw Error(ErrorKind::unknown_label, "no tabulated SALCs at '" + k_label + "'");
  const LatticeGeometry geo = build_geometry(config);
  const Mat4c H = TightBindingModel(geo).hamiltonian(named_kpoint(geo, k_label).coords);
  const double res = verify_block_diagonal(H, rows);
  if (res > 1e-9)
    throw Error(ErrorKind::table_mismatch, fmt::format("{} {} rows leave off-block residual {:.3e}", to_string(config.kind), k_label, res));
  return rows;
}

// Labels of the points that carry tabulated SALCs, in path order.
inline std::vector<std::string> tabulated_kpoints() { return {"Γ", "Λ", "K", "T", "M", "Σ"}; }

}  // namespace blg
