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

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blg/common.hpp"

namespace blg {

enum class Stacking { AA, AB };

inline const char* to_string(Stacking s) { return s == Stacking::AA ? "AA" : "AB"; }

inline Stacking parse_stacking(const std::string& s) {
  if (s == "AA" || s == "aa") return Stacking::AA;
  if (s == "AB" || s == "ab") return Stacking::AB;
  throw Error(ErrorKind::invalid_config, "unknown stacking '" + s + "'");
}

struct StackingConfig {
  Stacking kind = Stacking::AA;
  double a_cc = 1.42;
  double d = 3.6;

  static StackingConfig defaults(Stacking kind) {
    return StackingConfig{kind, 1.42, kind == Stacking::AA ? 3.6 : 3.3};
  }
};

// Basis order of every 4x4 object in the library.
inline constexpr std::array<const char*, 4> kSiteNames = {"A1", "B1", "A2", "B2"};

inline int site_index(const std::string& name) {
  for (int i = 0; i < 4; ++i)
    if (name == kSiteNames[i]) return i;
  throw Error(ErrorKind::unknown_label, "unknown site '" + name + "'");
}

struct LatticeGeometry {
  StackingConfig config;
  Vec3 a1, a2;
  Vec3 b1, b2;
  std::array<Vec3, 4> sites;  // A1, B1, A2, B2

  const Vec3& site(int i) const { return sites[static_cast<std::size_t>(i)]; }
};

inline LatticeGeometry build_geometry(const StackingConfig& config) {
  if (!(config.a_cc > 0.0) || !std::isfinite(config.a_cc))
    throw Error(ErrorKind::invalid_config, "a_cc must be positive");
  if (!(config.d > 0.0) || !std::isfinite(config.d))
    throw Error(ErrorKind::invalid_config, "d must be positive");

  const double a = config.a_cc;
  const double h = config.d / 2.0;
  const double s3 = std::sqrt(3.0);
  LatticeGeometry g;
  g.config = config;
  g.a1 = Vec3(1.5 * a, 0.5 * s3 * a, 0.0);
  g.a2 = Vec3(1.5 * a, -0.5 * s3 * a, 0.0);
  const double f = 2.0 * kPi / (3.0 * a);
  g.b1 = Vec3(f, f * s3, 0.0);
  g.b2 = Vec3(f, -f * s3, 0.0);

  if (config.kind == Stacking::AA) {
    // Origin at a hexagon centre, so the sixfold axis is the z axis.
    g.sites = {Vec3(a, 0, h), Vec3(0.5 * a, 0.5 * s3 * a, h),
               Vec3(a, 0, -h), Vec3(0.5 * a, 0.5 * s3 * a, -h)};
  } else {
    // Origin on the A1-B2 dimer, which is the threefold axis.
    g.sites = {Vec3(0, 0, h), Vec3(a, 0, h), Vec3(-a, 0, -h), Vec3(0, 0, -h)};
  }
  return g;
}

// Integer coordinates of v in the (a1, a2) basis when v is a lattice vector.
inline std::optional<std::array<int, 2>> lattice_coords(const LatticeGeometry& g, const Vec3& v,
                                                        double tol = 1e-8) {
  if (std::abs(v.z()) > tol) return std::nullopt;
  const double x1 = g.b1.dot(v) / (2.0 * kPi);
  const double x2 = g.b2.dot(v) / (2.0 * kPi);
  const double n1 = std::round(x1), n2 = std::round(x2);
  if (std::abs(x1 - n1) > tol || std::abs(x2 - n2) > tol) return std::nullopt;
  return std::array<int, 2>{static_cast<int>(n1), static_cast<int>(n2)};
}

inline bool is_reciprocal_vector(const LatticeGeometry& g, const Vec3& q, double tol = 1e-8) {
  if (std::abs(q.z()) > tol) return false;
  const double x1 = g.a1.dot(q) / (2.0 * kPi);
  const double x2 = g.a2.dot(q) / (2.0 * kPi);
  return std::abs(x1 - std::round(x1)) < tol && std::abs(x2 - std::round(x2)) < tol;
}

struct KPoint {
  Vec3 coords = Vec3::Zero();
  std::optional<std::string> label;
};

// Canonical labels are the Greek/primed symbols; ASCII aliases are accepted on input.
inline std::string canonical_label(const std::string& s) {
  static const std::map<std::string, std::string> alias = {
      {"Γ", "Γ"}, {"G", "Γ"}, {"Gamma", "Γ"}, {"GAMMA", "Γ"},
      {"K", "K"},
      {"K′", "K′"}, {"K'", "K′"}, {"Kp", "K′"},
      {"M", "M"},
      {"Λ", "Λ"}, {"L", "Λ"}, {"Lambda", "Λ"},
      {"T", "T"},
      {"Σ", "Σ"}, {"S", "Σ"}, {"Sigma", "Σ"}};
  auto it = alias.find(s);
  if (it == alias.end()) throw Error(ErrorKind::unknown_label, "unknown k-point label '" + s + "'");
  return it->second;
}

inline std::map<std::string, KPoint> high_symmetry_points(const LatticeGeometry& g) {
  const double a = g.config.a_cc;
  const Vec3 gamma = Vec3::Zero();
  const Vec3 k(2.0 * kPi / (3.0 * a), 2.0 * kPi / (3.0 * std::sqrt(3.0) * a), 0.0);
  const Vec3 kp(k.x(), -k.y(), 0.0);
  const Vec3 m = 0.5 * (k + kp);
  std::map<std::string, KPoint> out;
  auto put = [&](const char* name, const Vec3& v) { out[name] = KPoint{v, std::string(name)}; };
  put("Γ", gamma);
  put("K", k);
  put("K′", kp);
  put("M", m);
  put("Λ", 0.5 * (gamma + k));
  put("T", 0.5 * (k + m));
  put("Σ", 0.5 * (m + gamma));
  return out;
}

inline KPoint named_kpoint(const LatticeGeometry& g, const std::string& label) {
  return high_symmetry_points(g).at(canonical_label(label));
}

struct NeighborBond {
  int from = 0;
  int to = 0;
  Vec3 displacement = Vec3::Zero();
  std::array<int, 2> cell_offset{0, 0};
};

inline std::vector<NeighborBond> enumerate_bonds(const LatticeGeometry& g, double cutoff) {
  if (!(cutoff >= g.config.a_cc - 1e-12))
    throw Error(ErrorKind::empty_bond_set, "cutoff below a_cc leaves no bonds");
  const double cell = std::min(g.a1.norm(), (g.a1 - g.a2).norm());
  const int n = static_cast<int>(std::ceil(cutoff / cell)) + 2;
  const double tol = 1e-9;
  std::vector<NeighborBond> bonds;
  for (int from = 0; from < 4; ++from)
    for (int to = 0; to < 4; ++to)
      for (int n1 = -n; n1 <= n; ++n1)
        for (int n2 = -n; n2 <= n; ++n2) {
          const Vec3 disp = g.site(to) + n1 * g.a1 + n2 * g.a2 - g.site(from);
          const double r = disp.norm();
          if (r < tol || r > cutoff + tol) continue;
          bonds.push_back(NeighborBond{from, to, disp, {n1, n2}});
        }
  if (bonds.empty()) throw Error(ErrorKind::empty_bond_set, "no bonds within cutoff");
  return bonds;
}

inline std::vector<KPoint> kpath(const std::vector<KPoint>& anchors, int intervals_per_segment) {
  if (anchors.size() < 2) throw Error(ErrorKind::invalid_path, "a k-path needs at least two anchors");
  if (intervals_per_segment < 1) throw Error(ErrorKind::invalid_path, "intervals must be >= 1");
  std::vector<KPoint> path;
  path.reserve((anchors.size() - 1) * static_cast<std::size_t>(intervals_per_segment) + 1);
  path.push_back(anchors.front());
  for (std::size_t s = 0; s + 1 < anchors.size(); ++s) {
    const Vec3& p = anchors[s].coords;
    const Vec3& q = anchors[s + 1].coords;
    for (int j = 1; j <= intervals_per_segment; ++j) {
      if (j == intervals_per_segment) {
        path.push_back(anchors[s + 1]);
      } else {
        const double t = static_cast<double>(j) / intervals_per_segment;
        path.push_back(KPoint{p + t * (q - p), std::nullopt});
      }
    }
  }
  return path;
}

inline std::vector<KPoint> labelled_path(const LatticeGeometry& g, const std::vector<std::string>& labels,
                                         int intervals_per_segment) {
  std::vector<KPoint> anchors;
  for (const auto& l : labels) anchors.push_back(named_kpoint(g, l));
  return kpath(anchors, intervals_per_segment);
}

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

inline nlohmann::json to_json(const LatticeGeometry& g) {
  nlohmann::json j;
  j["config"] = {{"stacking", to_string(g.config.kind)}, {"a_cc", g.config.a_cc}, {"d", g.config.d}};
  j["a1"] = vec_json(g.a1);
  j["a2"] = vec_json(g.a2);
  j["b1"] = vec_json(g.b1);
  j["b2"] = vec_json(g.b2);
  nlohmann::json sites = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) sites.push_back({{"label", kSiteNames[i]}, {"position", vec_json(g.site(i))}});
  j["sites"] = sites;
  return j;
}

}  // namespace blg
