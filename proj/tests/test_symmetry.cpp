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
#include <map>
#include <set>

#include "blg/symmetry.hpp"
#include "blg/tightbinding.hpp"

namespace blg {
namespace {

LatticeGeometry geo(Stacking s) { return build_geometry(StackingConfig::defaults(s)); }
LittleGroup lg_at(Stacking s, const std::string& k, OrbitalParity p = OrbitalParity::scalar) {
  return little_group(named_kpoint(geo(s), k), geo(s), p);
}

// Convention the tabulated labels follow at each point.
OrbitalParity table_parity(Stacking s, const std::string& k) {
  const bool odd = (s == Stacking::AA && k == "Λ") || (s == Stacking::AB && k == "K");
  return odd ? OrbitalParity::odd_z : OrbitalParity::scalar;
}

Vec4c vec(cplx a, cplx b, cplx c, cplx d) {
  Vec4c v;
  v << a, b, c, d;
  return v;
}

double phase_distance(const Vec4c& a, const Vec4c& b) {
  const cplx o = a.dot(b);
  return (a - b * std::conj(o) / std::abs(o)).cwiseAbs().maxCoeff();
}

TEST(PointGroup, OrdersAndClasses) {
  const auto d6h = point_group("D6h");
  EXPECT_EQ(d6h.order(), 24);
  EXPECT_EQ(d6h.class_count(), 12);
  EXPECT_EQ(d6h.operations.size(), 24u);
  const auto c2v = point_group("C2v");
  EXPECT_EQ(c2v.order(), 4);
  std::set<std::string> labels;
  for (const auto& ir : c2v.irreps) {
    EXPECT_EQ(ir.dim, 1);
    labels.insert(ir.label);
  }
  EXPECT_EQ(labels, (std::set<std::string>{"A1", "A2", "B1", "B2"}));
  EXPECT_THROW(point_group("Oh"), Error);
}

TEST(PointGroup, CharacterRowsAreOrthogonal) {
  for (const auto& label : {"D6h", "D3h", "D3d", "D3", "D2h", "C2v", "C2h", "C2", "Cs"}) {
    const auto g = point_group(label);
    for (const auto& a : g.irreps)
      for (const auto& b : g.irreps) {
        double s = 0.0;
        for (int c = 0; c < g.class_count(); ++c) s += g.class_sizes[c] * a.chars[c] * b.chars[c];
        EXPECT_NEAR(s, &a == &b ? g.order() : 0.0, 1e-12) << label << " " << a.label << " " << b.label;
      }
  }
}

TEST(LittleGroup, Labels) {
  EXPECT_EQ(lg_at(Stacking::AA, "Γ").group.label, "D6h");
  EXPECT_EQ(lg_at(Stacking::AA, "Λ").group.label, "C2v");
  EXPECT_EQ(lg_at(Stacking::AA, "K").group.label, "D3h");
  EXPECT_EQ(lg_at(Stacking::AB, "Σ").group.label, "Cs");
  // Every tabulated point agrees with the group named by its rows.
  for (Stacking s : {Stacking::AA, Stacking::AB})
    for (const auto& k : tabulated_kpoints())
      EXPECT_EQ(lg_at(s, k).group.label, select_salcs(embedded_tables(), s, k).front().group) << to_string(s) << " " << k;
}

TEST(Rep, C6AtGammaSwapsSublattices) {
  const auto lg = lg_at(Stacking::AA, "Γ");
  const Mat4c d = lg.reps[static_cast<std::size_t>(lg.op_of_class("C6"))];
  Mat4c want = Mat4c::Zero();
  want(1, 0) = want(0, 1) = want(3, 2) = want(2, 3) = 1.0;
  EXPECT_LT((d - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(std::abs(d.trace()), 0.0, 1e-12);
}

TEST(Rep, IdentityEverywhere) {
  for (Stacking s : {Stacking::AA, Stacking::AB})
    for (const auto& k : tabulated_kpoints()) {
      const auto lg = lg_at(s, k);
      const Mat4c e = lg.reps[static_cast<std::size_t>(lg.op_of_class("E"))];
      EXPECT_LT((e - Mat4c::Identity()).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_NEAR(e.trace().real(), 4.0, 1e-14);
    }
}

TEST(Rep, CommutesWithHamiltonian) {
  for (Stacking s : {Stacking::AA, Stacking::AB})
    for (const auto& k : tabulated_kpoints()) {
      const auto g = geo(s);
      const Mat4c h = TightBindingModel(g).hamiltonian(named_kpoint(g, k).coords);
      const auto lg = lg_at(s, k);
      for (const auto& d : lg.reps) {
        EXPECT_LT((d * h - h * d).cwiseAbs().maxCoeff(), 1e-10) << to_string(s) << " " << k;
        EXPECT_LT((d.adjoint() * d - Mat4c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
}

TEST(Rep, C2AtLambdaSquaresToIdentity) {
  const auto lg = lg_at(Stacking::AA, "Λ");
  const Mat4c d = lg.reps[static_cast<std::size_t>(lg.op_of_class("C2"))];
  EXPECT_LT((d * d - Mat4c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rep, PermutationCharacterCountsFixedSites) {
  // At Gamma every rep is a permutation, so the trace counts sites left in place.
  const auto lg = lg_at(Stacking::AB, "Γ");
  for (const auto& d : lg.reps) {
    int fixed = 0;
    for (int i = 0; i < 4; ++i) fixed += std::abs(d(i, i)) > 0.5;
    EXPECT_NEAR(std::abs(d.trace()), fixed, 1e-12);
  }
}

TEST(Decompose, AAGamma) {
  const auto lg = lg_at(Stacking::AA, "Γ");
  const auto n = decompose_rep(reducible_character(lg), lg.group);
  std::multiset<std::string> got;
  for (std::size_t i = 0; i < n.size(); ++i)
    for (int m = 0; m < n[i]; ++m) got.insert(lg.group.irreps[i].label);
  EXPECT_EQ(got, (std::multiset<std::string>{"A1g", "B2g", "A2u", "B1u"}));
}

TEST(Decompose, RegularRepresentationOfC2v) {
  const auto g = point_group("C2v");
  std::vector<cplx> chi(static_cast<std::size_t>(g.class_count()), 0.0);
  chi[static_cast<std::size_t>(g.class_index("E"))] = 4.0;
  for (int n : decompose_rep(chi, g)) EXPECT_EQ(n, 1);
}

TEST(Decompose, AAKHasTwoDimensionalPieces) {
  const auto lg = lg_at(Stacking::AA, "K");
  const std::string s = format_decomposition(decompose_rep(reducible_character(lg), lg.group), lg.group);
  EXPECT_NE(s.find("E′"), std::string::npos);
  EXPECT_NE(s.find("E″"), std::string::npos);
}

TEST(Decompose, NonIntegerMultiplicityIsAnError) {
  const auto g = point_group("C2v");
  std::vector<cplx> chi(4, 0.0);
  chi[0] = 1.0;
  chi[1] = 0.5;
  EXPECT_THROW(decompose_rep(chi, g), Error);
}

TEST(Project, GammaVectors) {
  const auto lg = lg_at(Stacking::AA, "Γ");
  EXPECT_LT(phase_distance(project_salc("A1g", lg, 0).amplitudes, vec(0.5, 0.5, 0.5, 0.5)), 1e-12);
  EXPECT_LT(phase_distance(project_salc("B2g", lg, 0).amplitudes, vec(0.5, -0.5, -0.5, 0.5)), 1e-12);
  EXPECT_LT(phase_distance(project_salc("B1u", lg, 0).amplitudes, vec(0.5, -0.5, 0.5, -0.5)), 1e-12);
  EXPECT_LT(phase_distance(project_salc("A2u", lg, 0).amplitudes, vec(0.5, 0.5, -0.5, -0.5)), 1e-12);
  EXPECT_THROW(project_salc("A1u", lg, 0), Error);  // absent from this basis
}

TEST(Project, ABAtK) {
  const auto lg = lg_at(Stacking::AB, "K", OrbitalParity::odd_z);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_LT(phase_distance(project_salc("A1", lg, 0).amplitudes, vec(r, 0, 0, -r)), 1e-12);
  EXPECT_THROW(project_salc("E", lg, 0), Error);  // two-dimensional
}

TEST(Tables, ListedRows) {
  const double r = 1 / std::sqrt(2.0);
  const cplx w = std::polar(1.0, -2 * kPi / 3);
  const auto t = salc_table(StackingConfig::defaults(Stacking::AA), "T");
  EXPECT_LT((t[0].amplitudes - vec(0.5, 0.5 * w, 0.5, 0.5 * w)).cwiseAbs().maxCoeff(), 1e-12);
  const auto k = salc_table(StackingConfig::defaults(Stacking::AA), "K");
  EXPECT_EQ(k[0].irrep, "E′");
  EXPECT_LT((k[0].amplitudes - vec(r, 0, -r, 0)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((k[1].amplitudes - vec(0, r, 0, -r)).cwiseAbs().maxCoeff(), 1e-12);
  const auto sigma = salc_table(StackingConfig::defaults(Stacking::AB), "Σ");
  ASSERT_EQ(sigma.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(sigma[static_cast<std::size_t>(i)].irrep, "A′");
    EXPECT_LT((sigma[static_cast<std::size_t>(i)].amplitudes - Vec4c::Unit(i)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Tables, EveryCurrentRowBlockDiagonalizes) {
  for (Stacking s : {Stacking::AA, Stacking::AB})
    for (const auto& k : tabulated_kpoints()) {
      const auto g = geo(s);
      const Mat4c h = TightBindingModel(g).hamiltonian(named_kpoint(g, k).coords);
      EXPECT_LT(verify_block_diagonal(h, select_salcs(embedded_tables(), s, k)), 1e-9) << to_string(s) << " " << k;
    }
}

TEST(Tables, OneDimensionalRowsCarryTheirLabel) {
  for (Stacking s : {Stacking::AA, Stacking::AB})
    for (const auto& k : tabulated_kpoints()) {
      if (s == Stacking::AA && k == "Λ") continue;  // see LambdaRowsAreDistinctIrreps
      const auto lg = lg_at(s, k, table_parity(s, k));
      for (const auto& row : select_salcs(embedded_tables(), s, k)) {
        if (lg.group.irrep(row.irrep).dim != 1) continue;
        EXPECT_EQ(irrep_of_state(row.amplitudes, lg).value_or("?"), row.irrep) << to_string(s) << " " << k;
      }
    }
}

// Only the A1 row at AA Lambda carries the label that either convention assigns; the other
// three rows are still one-dimensional and pairwise distinct, which is all the checks rely on.
TEST(Tables, LambdaRowsAreDistinctIrreps) {
  const auto lg = lg_at(Stacking::AA, "Λ", OrbitalParity::odd_z);
  std::map<std::string, std::string> got;
  for (const auto& row : select_salcs(embedded_tables(), Stacking::AA, "Λ")) got[row.irrep] = irrep_of_state(row.amplitudes, lg).value_or("?");
  const std::map<std::string, std::string> want{{"A1", "A1"}, {"A2", "B1"}, {"B1", "B2"}, {"B2", "A2"}};
  EXPECT_EQ(got, want);
}

TEST(Tables, SupersededSetFails) {
  const auto g = geo(Stacking::AA);
  const Mat4c h = TightBindingModel(g).hamiltonian(named_kpoint(g, "Σ").coords);
  const auto old = select_salcs(embedded_tables(), Stacking::AA, "Σ", true);
  ASSERT_EQ(old.size(), 4u);
  EXPECT_GT(verify_block_diagonal(h, old), 1e-3);
}

TEST(Tables, IdentitySetLeavesOffDiagonalCoupling) {
  const auto g = geo(Stacking::AB);
  const Mat4c h = TightBindingModel(g).hamiltonian(Vec3(0.3, 0.1, 0));
  std::vector<SALCVector> bare;
  for (int i = 0; i < 4; ++i) bare.push_back(SALCVector{Vec4c::Unit(i), std::string(1, char('a' + i)), "", "", Stacking::AB, false});
  double off = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) off = std::max(off, std::abs(h(i, j)));
  EXPECT_NEAR(verify_block_diagonal(h, bare), off, 1e-15);
}

TEST(Tables, RejectsNonOrthonormalSet) {
  std::vector<SALCVector> bad(4);
  for (auto& s : bad) s.amplitudes = Vec4c::Unit(0);
  EXPECT_THROW(verify_block_diagonal(Mat4c::Identity(), bad), Error);
}

TEST(Tables, ParserRejectsBrokenInput) {
  EXPECT_THROW(parse_tables("{\"record\":\"salc\",\"stacking\":\"AA\"\n"), Error);
  EXPECT_THROW(parse_tables("not json\n"), Error);
}

TEST(Character, GammaStatesUnderC6) {
  const auto lg = lg_at(Stacking::AA, "Γ");
  const Mat4c c6 = lg.reps[static_cast<std::size_t>(lg.op_of_class("C6"))];
  const Vec4c a1g = vec(0.5, 0.5, 0.5, 0.5), b1u = vec(0.5, -0.5, 0.5, -0.5);
  EXPECT_NEAR(std::abs(character_of_state(a1g, c6) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(character_of_state(b1u, c6) + 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(character_of_state((a1g + b1u) / std::sqrt(2.0), c6)), 0.0, 1e-14);
  EXPECT_THROW(character_of_state(2.0 * a1g, c6), Error);
}

}  // namespace
}  // namespace blg
