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
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "blg/charcheck.hpp"
#include "blg/common.hpp"
#include "blg/lattice.hpp"
#include "blg/symmetry.hpp"
#include "blg/tightbinding.hpp"

namespace blg {

enum class CrossingKind { Crossing, AntiCrossing, Inconclusive };

inline std::string to_string(CrossingKind k) {
  switch (k) {
    case CrossingKind::Crossing: return "Crossing";
    case CrossingKind::AntiCrossing: return "AntiCrossing";
    case CrossingKind::Inconclusive: break;
  }
  return "Inconclusive";
}

struct TouchingPoint {
  int k_index = 0;
  std::array<int, 2> band_pair{0, 1};
  double gap = 0.0;
  std::optional<CrossingKind> kind_hypothesis;
};

struct BandSegment {
  std::string id;
  int band = 0;  // sorted index
  int start = 0;
  int end = 0;   // inclusive; touching indices are shared by both neighbours
  int left_tp = -1;
  int right_tp = -1;
};

// Gaussian jitter on every energy, then per-k re-sorting that carries the eigenvectors along.
inline BandData add_energy_noise(const BandData& in, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw Error(ErrorKind::invalid_config, "noise sigma must be >= 0");
  BandData out = in;
  Rng rng = make_rng(seed, hash_tag("energy-noise"));
  std::normal_distribution<double> nd(0.0, sigma);
  for (std::size_t i = 0; i < in.size(); ++i) {
    std::array<std::pair<double, int>, 4> e;
    for (int b = 0; b < 4; ++b) e[static_cast<std::size_t>(b)] = {in.energies[i](b) + (sigma > 0 ? nd(rng) : 0.0), b};
    std::stable_sort(e.begin(), e.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (int b = 0; b < 4; ++b) {
      out.energies[i](b) = e[static_cast<std::size_t>(b)].first;
      out.vectors[i].col(b) = in.vectors[i].col(e[static_cast<std::size_t>(b)].second);
    }
  }
  return out;
}

inline bool interior_vertex(const BandData& b, int i) {
  return i > 0 && i + 1 < static_cast<int>(b.size()) && b.path[static_cast<std::size_t>(i)].label.has_value();
}

struct DetectOptions {
  double gap_threshold = 0.07;      // a basin must dip below this
  double release_threshold = 0.10; // and ends once the smoothed gap climbs above this
  int smoothing = 3;                // moving-average width, odd
  int merge_gap = 2;                // same-pair basins this close are merged
  bool snap_to_vertices = true;
  int n_bands = 4;

  // Thresholds tied to the energy noise; sigma = 0 gives plain gap minima.
  static DetectOptions for_noise(double sigma) {
    DetectOptions o;
    o.gap_threshold = std::max(0.03, 3.5 * sigma);
    o.release_threshold = std::max(0.045, 5.0 * sigma);
    o.smoothing = sigma > 0 ? 3 : 1;
    return o;
  }
};

inline std::vector<double> moving_average(const std::vector<double>& x, int width) {
  const int n = static_cast<int>(x.size()), h = std::max(0, width / 2);
  std::vector<double> y(x.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - h), hi = std::min(n - 1, i + h);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  return y;
}

inline std::vector<TouchingPoint> detect_touching_points(const BandData& bands, const DetectOptions& opt = {}) {
  const int n = static_cast<int>(bands.size());
  if (n < 3) throw Error(ErrorKind::invalid_path, "touching-point detection needs at least 3 k-points");
  if (opt.n_bands < 2 || opt.n_bands > 4) throw Error(ErrorKind::invalid_config, "n_bands must be 2..4");
  std::vector<TouchingPoint> out;
  for (int b = 0; b + 1 < opt.n_bands; ++b) {
    std::vector<double> gap(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) gap[static_cast<std::size_t>(i)] = bands.energies[static_cast<std::size_t>(i)](b + 1) - bands.energies[static_cast<std::size_t>(i)](b);
    const auto gs = moving_average(gap, opt.smoothing);
    // Runs below the release level that dip below the entry level.
    std::vector<std::pair<int, int>> basins;
    for (int i = 0; i < n;) {
      if (gs[static_cast<std::size_t>(i)] >= opt.release_threshold) {
        ++i;
        continue;
      }
      int j = i;
      double m = gs[static_cast<std::size_t>(i)];
      while (j + 1 < n && gs[static_cast<std::size_t>(j + 1)] < opt.release_threshold) m = std::min(m, gs[static_cast<std::size_t>(++j)]);
      if (m < opt.gap_threshold) basins.emplace_back(i, j);
      i = j + 1;
    }
    std::vector<std::pair<int, int>> merged;
    for (const auto& r : basins) {
      if (!merged.empty() && r.first - merged.back().second - 1 <= opt.merge_gap) merged.back().second = r.second;
      else merged.push_back(r);
    }
    for (const auto& [lo, hi] : merged) {
      int cand = -1;
      if (opt.snap_to_vertices) {
        for (int i = lo; i <= hi; ++i)
          if (interior_vertex(bands, i) && (cand < 0 || gs[static_cast<std::size_t>(i)] < gs[static_cast<std::size_t>(cand)])) cand = i;
      }
      if (cand < 0) {
        if (lo == 0 || hi == n - 1) continue;  // an edge basin without a vertex is not localized
        cand = lo;
        for (int i = lo; i <= hi; ++i)
          if (gs[static_cast<std::size_t>(i)] < gs[static_cast<std::size_t>(cand)]) cand = i;
      }
      if (cand <= 0 || cand >= n - 1) continue;
      double g = gap[static_cast<std::size_t>(cand)];
      for (int i = std::max(0, cand - 2); i <= std::min(n - 1, cand + 2); ++i) g = std::min(g, gap[static_cast<std::size_t>(i)]);
      out.push_back({cand, {b, b + 1}, g, std::nullopt});
    }
  }
  std::sort(out.begin(), out.end(), [](const TouchingPoint& a, const TouchingPoint& b) {
    return std::tie(a.k_index, a.band_pair[0]) < std::tie(b.k_index, b.band_pair[0]);
  });
  // Same-pair duplicates within +-2 keep the smaller gap.
  std::vector<TouchingPoint> dedup;
  for (const auto& t : out) {
    auto it = std::find_if(dedup.begin(), dedup.end(), [&](const TouchingPoint& d) {
      return d.band_pair == t.band_pair && std::abs(d.k_index - t.k_index) <= 2;
    });
    if (it == dedup.end()) dedup.push_back(t);
    else if (t.gap < it->gap) *it = t;
  }
  return dedup;
}

// ---------------------------------------------------------------------------
// Probes

struct ProbeOptions {
  int min_offset = 3;
  double noise_scale = 0.0;
  double clearance_factor = 5.0;
  int n_bands = 4;
};

struct ProbePair {
  int left = -1;
  int right = -1;
  bool left_fallback = false;
  bool right_fallback = false;
  std::string group;
};

inline bool shares_band(const TouchingPoint& a, const TouchingPoint& b) {
  for (int x : a.band_pair)
    for (int y : b.band_pair)
      if (x == y) return true;
  return false;
}

// Smallest adjacent gap touching either band of the pair.
inline double clearance(const BandData& bands, int i, const std::array<int, 2>& pair, int n_bands) {
  const auto& e = bands.energies[static_cast<std::size_t>(i)];
  double c = e(pair[1]) - e(pair[0]);
  if (pair[0] > 0) c = std::min(c, e(pair[0]) - e(pair[0] - 1));
  if (pair[1] + 1 < n_bands) c = std::min(c, e(pair[1] + 1) - e(pair[1]));
  return c;
}

inline ProbePair select_probe_kpoints(const BandData& bands, const TouchingPoint& tp,
                                      const std::vector<TouchingPoint>& all, const std::vector<std::string>& group_labels,
                                      const ProbeOptions& opt = {}) {
  const int n = static_cast<int>(bands.size());
  const int c = tp.k_index;
  if (c <= 0 || c >= n - 1) throw Error(ErrorKind::probe_selection, fmt::format("touching point at path end (index {})", c));
  if (static_cast<int>(group_labels.size()) != n) throw Error(ErrorKind::invalid_config, "one little-group label per k-point required");
  int lo_bound = 0, hi_bound = n - 1;
  for (const auto& o : all) {
    if (o.k_index == c && o.band_pair == tp.band_pair) continue;
    if (!shares_band(o, tp)) continue;
    if (o.k_index < c) lo_bound = std::max(lo_bound, o.k_index);
    if (o.k_index > c) hi_bound = std::min(hi_bound, o.k_index);
  }
  const double need = opt.clearance_factor * opt.noise_scale;
  auto search = [&](int dir, const std::string& label, bool& fallback) -> int {
    const int stop = dir < 0 ? lo_bound : hi_bound;
    auto in_range = [&](int i) { return dir < 0 ? i > stop : i < stop; };
    auto ok_label = [&](int i) { return i > 0 && i < n - 1 && group_labels[static_cast<std::size_t>(i)] == label; };
    for (int i = c + dir * opt.min_offset; in_range(i); i += dir)
      if (ok_label(i) && clearance(bands, i, tp.band_pair, opt.n_bands) > need) return i;
    for (int min_off : {opt.min_offset, 1}) {
      int best = -1;
      double best_c = -1.0;
      for (int i = c + dir * min_off; in_range(i); i += dir) {
        if (!ok_label(i)) continue;
        const double cl = clearance(bands, i, tp.band_pair, opt.n_bands);
        if (cl > best_c) {
          best = i;
          best_c = cl;
        }
      }
      if (best >= 0 && best_c > 0) {
        fallback = true;
        return best;
      }
    }
    return -1;
  };
  // Candidate labels: those of the two nearest neighbours, left one first.
  std::vector<std::string> labels{group_labels[static_cast<std::size_t>(c - 1)]};
  if (group_labels[static_cast<std::size_t>(c + 1)] != labels[0]) labels.push_back(group_labels[static_cast<std::size_t>(c + 1)]);
  for (const auto& label : labels) {
    ProbePair p;
    p.group = label;
    p.left = search(-1, label, p.left_fallback);
    p.right = search(+1, label, p.right_fallback);
    if (p.left >= 0 && p.right >= 0) return p;
  }
  throw Error(ErrorKind::probe_selection,
              fmt::format("no probe pair with a common little group around index {} (bands {},{})", c, tp.band_pair[0],
                          tp.band_pair[1]));
}

// ---------------------------------------------------------------------------
// Segments

inline std::vector<BandSegment> segment_bands(const BandData& bands, const std::vector<TouchingPoint>& tps, int n_bands = 4) {
  const int n = static_cast<int>(bands.size());
  for (std::size_t i = 0; i < tps.size(); ++i)
    for (std::size_t j = i + 1; j < tps.size(); ++j) {
      if (!shares_band(tps[i], tps[j])) continue;
      if (std::abs(tps[i].k_index - tps[j].k_index) <= 2)
        throw Error(ErrorKind::ambiguous_segments,
                    fmt::format("touching points at {} (bands {},{}) and {} (bands {},{}) overlap", tps[i].k_index,
                                tps[i].band_pair[0], tps[i].band_pair[1], tps[j].k_index, tps[j].band_pair[0],
                                tps[j].band_pair[1]));
    }
  std::vector<BandSegment> segs;
  for (int b = 0; b < n_bands; ++b) {
    std::vector<int> cuts;
    for (std::size_t t = 0; t < tps.size(); ++t)
      if (tps[t].band_pair[0] == b || tps[t].band_pair[1] == b) cuts.push_back(static_cast<int>(t));
    std::sort(cuts.begin(), cuts.end(), [&](int x, int y) { return tps[static_cast<std::size_t>(x)].k_index < tps[static_cast<std::size_t>(y)].k_index; });
    int start = 0, left = -1;
    for (int t : cuts) {
      segs.push_back({"", b, start, tps[static_cast<std::size_t>(t)].k_index, left, t});
      start = tps[static_cast<std::size_t>(t)].k_index;
      left = t;
    }
    segs.push_back({"", b, start, n - 1, left, -1});
  }
  std::sort(segs.begin(), segs.end(), [](const BandSegment& a, const BandSegment& b) {
    return std::tie(a.start, a.band) < std::tie(b.start, b.band);
  });
  for (std::size_t i = 0; i < segs.size(); ++i) segs[i].id = fmt::format("e{}", i + 1);
  return segs;
}

struct Incident {
  int l_lo = -1, l_hi = -1, r_lo = -1, r_hi = -1;  // indices into the segment list
};

inline Incident incident_segments(const std::vector<BandSegment>& segs, int tp_index, const TouchingPoint& tp) {
  Incident in;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto& g = segs[s];
    const int si = static_cast<int>(s);
    if (g.right_tp == tp_index) (g.band == tp.band_pair[0] ? in.l_lo : in.l_hi) = si;
    if (g.left_tp == tp_index) (g.band == tp.band_pair[0] ? in.r_lo : in.r_hi) = si;
  }
  if (in.l_lo < 0 || in.l_hi < 0 || in.r_lo < 0 || in.r_hi < 0)
    throw Error(ErrorKind::ambiguous_segments, "touching point does not have four incident segments");
  return in;
}

// ---------------------------------------------------------------------------
// Classification

enum class PairPlan { minimal, exhaustive };

struct PairCheck {
  int first = -1;   // segment indices
  int second = -1;
  IRVerdict verdict;
};

struct CrossingVerdict {
  TouchingPoint tp;
  ProbePair probes;
  Incident segments;
  std::vector<PairCheck> checks;
  std::vector<int> grouping;  // component id per incident segment (l_lo, l_hi, r_lo, r_hi)
  CrossingKind decision = CrossingKind::Inconclusive;
  std::string note;
};

struct ProbeState {
  Vec4c psi;
  const LittleGroup* lg = nullptr;
};

using PairChecker = std::function<IRVerdict(const ProbeState&, const ProbeState&, const std::string&, const std::string&,
                                            std::uint64_t seed)>;

// Runs class-matched checks across two little groups with the same label.
inline IRVerdict check_pair(const ProbeState& a, const ProbeState& b, const CheckRequest& req,
                            const std::string& first, const std::string& second) {
  if (a.lg->group.label != b.lg->group.label)
    throw Error(ErrorKind::unsupported_group, "probe little groups differ: " + a.lg->group.label + " vs " + b.lg->group.label);
  const Vec4c x = a.lg->U * a.psi, y = b.lg->U * b.psi;
  IRVerdict v;
  v.first = first;
  v.second = second;
  const auto reps = a.lg->group.class_representatives();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const int cls = a.lg->group.operations[static_cast<std::size_t>(reps[i])].cls;
    const int j = b.lg->op_of_class(cls);
    const std::string name = a.lg->group.class_names[static_cast<std::size_t>(cls)];
    const Mat4c r1 = a.lg->aligned_rep(static_cast<std::size_t>(reps[i]));
    const Mat4c r2 = b.lg->aligned_rep(static_cast<std::size_t>(j));
    CheckOutcome o = run_check(x, y, r1, r2, req.backend, req.shots, derive_seed(req.seed, i), name);
    const CharDecision d = decide(o, req.threshold);
    if (d == CharDecision::Inconclusive && v.offending_op.empty()) v.offending_op = name;
    v.outcomes.push_back(std::move(o));
    v.decisions.push_back(d);
  }
  v.decision = aggregate(v.decisions);
  return v;
}

// Classical reference: same decision from exact characters.
inline IRVerdict check_pair_classical(const ProbeState& a, const ProbeState& b, const std::string& first,
                                      const std::string& second) {
  IRVerdict v;
  v.first = first;
  v.second = second;
  const auto reps = a.lg->group.class_representatives();
  for (int idx : reps) {
    const int cls = a.lg->group.operations[static_cast<std::size_t>(idx)].cls;
    const int j = b.lg->op_of_class(cls);
    const cplx c1 = character_of_state(a.psi, a.lg->reps[static_cast<std::size_t>(idx)]);
    const cplx c2 = character_of_state(b.psi, b.lg->reps[static_cast<std::size_t>(j)]);
    const double re = (c1 * c2).real();
    v.decisions.push_back(re > 1e-9 ? CharDecision::SameCharacter
                                    : re < -1e-9 ? CharDecision::DifferentCharacter : CharDecision::Inconclusive);
  }
  v.decision = aggregate(v.decisions);
  return v;
}

inline std::vector<std::pair<int, int>> pair_plan(const Incident& in, PairPlan plan) {
  // The minimal plan is the four left/right pairs; same-side pairs are added for redundancy.
  std::vector<std::pair<int, int>> p{{in.l_lo, in.r_lo}, {in.l_lo, in.r_hi}, {in.l_hi, in.r_lo}, {in.l_hi, in.r_hi}};
  if (plan == PairPlan::exhaustive) {
    p.emplace_back(in.l_lo, in.l_hi);
    p.emplace_back(in.r_lo, in.r_hi);
  }
  return p;
}

// Groups segments by SameIR (union-find) and reads off the decision.
inline void decide_crossing(CrossingVerdict& v) {
  const std::array<int, 4> ids{v.segments.l_lo, v.segments.l_hi, v.segments.r_lo, v.segments.r_hi};
  auto slot = [&](int seg) { return static_cast<int>(std::find(ids.begin(), ids.end(), seg) - ids.begin()); };
  std::array<int, 4> parent{0, 1, 2, 3};
  std::function<int(int)> find = [&](int x) { return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]); };
  bool inconclusive = false;
  for (const auto& c : v.checks) {
    if (c.verdict.decision == IRDecision::Inconclusive) {
      inconclusive = true;
      v.note = fmt::format("pair ({},{}) inconclusive at op {}", c.first, c.second, c.verdict.offending_op);
    }
    if (c.verdict.decision == IRDecision::SameIR) parent[static_cast<std::size_t>(find(slot(c.first)))] = find(slot(c.second));
  }
  for (const auto& c : v.checks)
    if (c.verdict.decision == IRDecision::DifferentIR && find(slot(c.first)) == find(slot(c.second))) {
      inconclusive = true;
      v.note = "intransitive results: a DifferentIR pair lies in one SameIR group";
    }
  v.grouping.clear();
  for (int s = 0; s < 4; ++s) v.grouping.push_back(find(s));
  if (inconclusive) {
    v.decision = CrossingKind::Inconclusive;
    return;
  }
  const bool g_lo_hi = find(0) == find(3) && find(1) == find(2);  // l_lo~r_hi, l_hi~r_lo
  const bool g_lo_lo = find(0) == find(2) && find(1) == find(3);
  const bool split = find(0) != find(1);
  if (g_lo_hi && split && !g_lo_lo) v.decision = CrossingKind::Crossing;
  else if (g_lo_lo && split && !g_lo_hi) v.decision = CrossingKind::AntiCrossing;
  else {
    v.decision = CrossingKind::Inconclusive;
    if (v.note.empty()) v.note = "segments cannot be oriented from the IR grouping";
  }
}

inline CrossingVerdict classify_touching(const BandData& bands, int tp_index, const std::vector<TouchingPoint>& tps,
                                         const std::vector<BandSegment>& segs, const ProbePair& probes,
                                         const std::vector<LittleGroup>& groups, const PairChecker& checker,
                                         PairPlan plan = PairPlan::minimal, double degeneracy = 1e-6) {
  const auto& tp = tps[static_cast<std::size_t>(tp_index)];
  CrossingVerdict v;
  v.tp = tp;
  v.probes = probes;
  v.segments = incident_segments(segs, tp_index, tp);
  for (int p : {probes.left, probes.right}) {
    const auto& e = bands.energies[static_cast<std::size_t>(p)];
    for (int b : tp.band_pair) {
      const bool deg = (b > 0 && e(b) - e(b - 1) < degeneracy) || (b < 3 && e(b + 1) - e(b) < degeneracy);
      if (deg) throw Error(ErrorKind::degenerate_states, fmt::format("band {} is degenerate at probe index {}", b, p));
    }
  }
  auto state = [&](int seg) {
    const auto& s = segs[static_cast<std::size_t>(seg)];
    const int k = s.right_tp == tp_index ? probes.left : probes.right;
    return ProbeState{bands.vectors[static_cast<std::size_t>(k)].col(s.band), &groups[static_cast<std::size_t>(k)]};
  };
  std::uint64_t n = 0;
  for (const auto& [x, y] : pair_plan(v.segments, plan)) {
    PairCheck pc;
    pc.first = x;
    pc.second = y;
    pc.verdict = checker(state(x), state(y), segs[static_cast<std::size_t>(x)].id, segs[static_cast<std::size_t>(y)].id,
                         derive_seed(static_cast<std::uint64_t>(tp_index) * 131 + tp.band_pair[0], n++));
    v.checks.push_back(std::move(pc));
  }
  decide_crossing(v);
  return v;
}

// ---------------------------------------------------------------------------
// Reconnection

struct Link {
  std::string from;  // segment id left of the point
  std::string to;
};

struct Reconnection {
  BandData bands;                          // energies re-threaded
  std::vector<std::array<int, 4>> rank;    // rank[k][thread] = sorted index
  std::vector<int> segment_thread;         // per segment
  std::vector<Link> links;
  std::vector<std::array<double, 2>> location;  // per verdict: fractional index, energy
  std::vector<int> flagged;                // verdict indices left in sorted order
};

inline BandData apply_connectivity(const BandData& in, const std::vector<std::array<int, 4>>& rank) {
  BandData out = in;
  for (std::size_t k = 0; k < in.size(); ++k)
    for (int t = 0; t < 4; ++t) {
      out.energies[k](t) = in.energies[k](rank[k][static_cast<std::size_t>(t)]);
      out.vectors[k].col(t) = in.vectors[k].col(rank[k][static_cast<std::size_t>(t)]);
    }
  return out;
}

inline std::vector<std::array<int, 4>> invert_connectivity(const std::vector<std::array<int, 4>>& rank) {
  auto inv = rank;
  for (std::size_t k = 0; k < rank.size(); ++k)
    for (int t = 0; t < 4; ++t) inv[k][static_cast<std::size_t>(rank[k][static_cast<std::size_t>(t)])] = t;
  return inv;
}

inline std::array<double, 2> line_intersection(double x1, double y1a, double y1b, double x2, double y2a, double y2b) {
  // line a: (x1, y1a) -> (x2, y2b); line b: (x1, y1b) -> (x2, y2a)
  const double sa = (y2b - y1a) / (x2 - x1), sb = (y2a - y1b) / (x2 - x1);
  if (std::abs(sa - sb) < 1e-15) return {0.5 * (x1 + x2), 0.5 * (y1a + y1b)};
  const double t = (y1b - y1a) / (sa - sb);
  return {x1 + t, y1a + sa * t};
}

inline Reconnection reconnect_bands(const BandData& bands, const std::vector<BandSegment>& segs,
                                    const std::vector<CrossingVerdict>& verdicts) {
  const std::size_t n = bands.size();
  Reconnection r;
  r.rank.assign(n, {0, 1, 2, 3});
  std::array<int, 4> cur{0, 1, 2, 3};  // thread -> rank
  std::vector<std::size_t> order(verdicts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return verdicts[a].tp.k_index < verdicts[b].tp.k_index; });
  std::size_t next = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (next < order.size() && static_cast<std::size_t>(verdicts[order[next]].tp.k_index) < k) {
      const auto& v = verdicts[order[next]];
      if (v.decision == CrossingKind::Crossing) {
        const int lo = v.tp.band_pair[0], hi = v.tp.band_pair[1];
        for (auto& x : cur) {
          if (x == lo) x = hi;
          else if (x == hi) x = lo;
        }
      }
      ++next;
    }
    r.rank[k] = cur;
  }
  r.bands = apply_connectivity(bands, r.rank);
  r.segment_thread.assign(segs.size(), -1);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const int mid = (segs[s].start + segs[s].end) / 2;
    const auto& rk = r.rank[static_cast<std::size_t>(std::max(mid, segs[s].start + (segs[s].end > segs[s].start ? 1 : 0)))];
    for (int t = 0; t < 4; ++t)
      if (rk[static_cast<std::size_t>(t)] == segs[s].band) r.segment_thread[s] = t;
  }
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    const auto id = [&](int s) { return segs[static_cast<std::size_t>(s)].id; };
    if (v.decision == CrossingKind::Crossing) {
      r.links.push_back({id(v.segments.l_lo), id(v.segments.r_hi)});
      r.links.push_back({id(v.segments.l_hi), id(v.segments.r_lo)});
    } else {
      r.links.push_back({id(v.segments.l_lo), id(v.segments.r_lo)});
      r.links.push_back({id(v.segments.l_hi), id(v.segments.r_hi)});
      if (v.decision == CrossingKind::Inconclusive) r.flagged.push_back(static_cast<int>(i));
    }
    const auto& el = bands.energies[static_cast<std::size_t>(v.probes.left)];
    const auto& er = bands.energies[static_cast<std::size_t>(v.probes.right)];
    const int lo = v.tp.band_pair[0], hi = v.tp.band_pair[1];
    r.location.push_back(line_intersection(v.probes.left, el(lo), el(hi), v.probes.right, er(lo), er(hi)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline

struct PipelineOptions {
  DetectOptions detect;
  ProbeOptions probe;
  PairPlan plan = PairPlan::minimal;
  CheckRequest request;
  bool classical = false;  // exact characters instead of circuits
};

struct PipelineResult {
  std::vector<TouchingPoint> tps;
  std::vector<BandSegment> segments;
  std::vector<CrossingVerdict> verdicts;
  Reconnection reconnection;
  std::vector<std::string> group_labels;
  int warnings = 0;
};

inline std::vector<LittleGroup> path_little_groups(const BandData& bands, const LatticeGeometry& geo,
                                                   OrbitalParity parity = OrbitalParity::scalar) {
  std::vector<LittleGroup> g;
  g.reserve(bands.size());
  for (const auto& k : bands.path) g.push_back(little_group(k, geo, parity));
  return g;
}

inline PipelineResult run_pipeline(const BandData& bands, const LatticeGeometry& geo, const PipelineOptions& opt) {
  PipelineResult res;
  const auto groups = path_little_groups(bands, geo);
  for (const auto& g : groups) res.group_labels.push_back(g.group.label);
  res.tps = detect_touching_points(bands, opt.detect);
  res.segments = segment_bands(bands, res.tps, opt.detect.n_bands);
  PairChecker checker;
  if (opt.classical) {
    checker = [](const ProbeState& a, const ProbeState& b, const std::string& f, const std::string& s, std::uint64_t) {
      return check_pair_classical(a, b, f, s);
    };
  } else {
    checker = [&](const ProbeState& a, const ProbeState& b, const std::string& f, const std::string& s, std::uint64_t seed) {
      CheckRequest req = opt.request;
      req.seed = derive_seed(opt.request.seed, seed);
      return check_pair(a, b, req, f, s);
    };
  }
  for (std::size_t t = 0; t < res.tps.size(); ++t) {
    const ProbePair probes = select_probe_kpoints(bands, res.tps[t], res.tps, res.group_labels, opt.probe);
    auto v = classify_touching(bands, static_cast<int>(t), res.tps, res.segments, probes, groups, checker, opt.plan);
    res.tps[t].kind_hypothesis = v.decision;
    if (v.decision == CrossingKind::Inconclusive) ++res.warnings;
    res.verdicts.push_back(std::move(v));
  }
  res.reconnection = reconnect_bands(bands, res.segments, res.verdicts);
  return res;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const TouchingPoint& t) {
  nlohmann::json j{{"k_index", t.k_index}, {"band_pair", {t.band_pair[0], t.band_pair[1]}}, {"gap", t.gap}};
  j["kind"] = t.kind_hypothesis ? nlohmann::json(to_string(*t.kind_hypothesis)) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const PipelineResult& r) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : r.segments)
    segs.push_back({{"id", s.id}, {"band", s.band}, {"start", s.start}, {"end", s.end},
                    {"thread", r.reconnection.segment_thread[static_cast<std::size_t>(&s - r.segments.data())]}});
  nlohmann::json verdicts = nlohmann::json::array();
  for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
    const auto& v = r.verdicts[i];
    const auto id = [&](int s) { return r.segments[static_cast<std::size_t>(s)].id; };
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : v.checks) {
      auto j = to_json(c.verdict);
      j["pair"] = {id(c.first), id(c.second)};
      checks.push_back(j);
    }
    verdicts.push_back({{"touching_point", to_json(v.tp)},
                        {"probes", {{"left", v.probes.left}, {"right", v.probes.right}, {"group", v.probes.group},
                                    {"left_fallback", v.probes.left_fallback}, {"right_fallback", v.probes.right_fallback}}},
                        {"segments", {id(v.segments.l_lo), id(v.segments.l_hi), id(v.segments.r_lo), id(v.segments.r_hi)}},
                        {"grouping", v.grouping},
                        {"decision", to_string(v.decision)},
                        {"location", {r.reconnection.location[i][0], r.reconnection.location[i][1]}},
                        {"note", v.note},
                        {"checks", checks}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : r.reconnection.links) links.push_back({l.from, l.to});
  nlohmann::json tps = nlohmann::json::array();
  for (const auto& t : r.tps) tps.push_back(to_json(t));
  return {{"touching_points", tps}, {"segments", segs}, {"verdicts", verdicts}, {"links", links},
          {"warnings", r.warnings}};
}

// Bands CSV plus the segment id of each (k, thread) entry.
inline std::string corrected_csv(const PipelineResult& r) {
  const auto& b = r.reconnection.bands;
  std::string out = "path_index,k_x,k_y,k_z,band,energy,segment\n";
  for (std::size_t k = 0; k < b.size(); ++k)
    for (int t = 0; t < 4; ++t) {
      const int rank = r.reconnection.rank[k][static_cast<std::size_t>(t)];
      std::string seg;
      for (const auto& s : r.segments)
        if (s.band == rank && static_cast<int>(k) >= s.start && static_cast<int>(k) <= s.end) {
          seg = s.id;
          if (static_cast<int>(k) < s.end) break;
        }
      const Vec3& kc = b.path[k].coords;
      out += fmt::format("{},{:.10f},{:.10f},{:.10f},{},{:.10f},{}\n", k, kc.x(), kc.y(), kc.z(), t, b.energies[k](t), seg);
    }
  return out;
}

}  // namespace blg
