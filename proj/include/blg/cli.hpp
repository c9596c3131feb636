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

// Run configuration and the command implementations behind tools/blg.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "blg/charcheck.hpp"
#include "blg/crossing.hpp"
#include "blg/lattice.hpp"
#include "blg/qsim.hpp"
#include "blg/symmetry.hpp"
#include "blg/tightbinding.hpp"

namespace blg::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2 };

struct RunConfig {
  StackingConfig system = StackingConfig::defaults(Stacking::AA);
  TBParams model;
  std::vector<std::string> anchors{"Γ", "K", "M", "Γ"};
  int intervals = 50;

  std::string backend = "ideal";
  NoiseModel noise = NoiseModel::from_p2(0.01);
  std::uint64_t shots = 100000;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::string tables_path;  // empty: embedded tables

  std::string check_k = "Γ";
  std::array<int, 2> check_states{0, 1};
  std::vector<std::string> check_ops{"E", "C2", "C2′", "C2″"};

  double sweep_p2_max = 0.01;
  int sweep_points = 11;

  std::vector<std::string> window{"Γ", "K", "M"};
  double sigma = 0.02;
  DetectOptions detect;
  ProbeOptions probe;
  PairPlan plan = PairPlan::minimal;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

namespace detail {

template <typename T>
T get(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
  const auto v = pt.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return boost::lexical_cast<T>(*v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_config, fmt::format("field '{}': cannot parse '{}'", key, *v));
  }
}

inline std::string get_str(const boost::property_tree::ptree& pt, const std::string& key, const std::string& fallback) {
  return pt.get<std::string>(key, fallback);
}

}  // namespace detail

// INI file with sections system, model, path, backend, charcheck, sweep, classify, output.
inline RunConfig load_config(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::invalid_config, fmt::format("{} line {}: {}", path, e.line(), e.message()));
  }
  const auto stacking = pt.get_optional<std::string>("system.stacking");
  if (!stacking) throw Error(ErrorKind::invalid_config, "missing required field 'system.stacking'");
  RunConfig c;
  try {
    c.system = StackingConfig::defaults(parse_stacking(*stacking));
  } catch (const Error&) {
    throw Error(ErrorKind::invalid_config, fmt::format("field 'system.stacking': unknown value '{}'", *stacking));
  }
  using detail::get;
  c.system.a_cc = get(pt, "system.a_cc", c.system.a_cc);
  c.system.d = get(pt, "system.d", c.system.d);
  c.model.v_pps = get(pt, "model.v_pps", c.model.v_pps);
  c.model.v_ppp = get(pt, "model.v_ppp", c.model.v_ppp);
  c.model.r0 = get(pt, "model.r0", c.model.r0);
  c.model.cutoff = get(pt, "model.cutoff", c.model.cutoff);
  c.model.inplane_cutoff = get(pt, "model.inplane_cutoff", c.model.inplane_cutoff);
  if (auto a = pt.get_optional<std::string>("path.anchors")) c.anchors = split_list(*a);
  c.intervals = get(pt, "path.intervals", c.intervals);

  c.backend = detail::get_str(pt, "backend.kind", c.backend);
  if (c.backend != "ideal" && c.backend != "noisy")
    throw Error(ErrorKind::invalid_config, fmt::format("field 'backend.kind': expected ideal|noisy, got '{}'", c.backend));
  const double p2 = get(pt, "backend.p2", c.noise.p2);
  c.noise = NoiseModel::from_p2(p2);
  c.noise.p1 = get(pt, "backend.p1", c.noise.p1);
  if (auto w = pt.get_optional<std::string>("backend.weights")) {
    const auto parts = split_list(*w);
    if (parts.size() != 4) throw Error(ErrorKind::invalid_config, "field 'backend.weights': expected 4 values (I,X,Y,Z)");
    for (std::size_t i = 0; i < 4; ++i) c.noise.weights[i] = std::stod(parts[i]);
  }
  c.shots = get<std::uint64_t>(pt, "backend.shots", c.shots);
  if (auto s = pt.get_optional<std::string>("backend.seed")) c.seed = get<std::uint64_t>(pt, "backend.seed", 0);

  c.check_k = detail::get_str(pt, "charcheck.k", c.check_k);
  if (auto s = pt.get_optional<std::string>("charcheck.states")) {
    const auto parts = split_list(*s);
    if (parts.size() != 2) throw Error(ErrorKind::invalid_config, "field 'charcheck.states': expected two band indices");
    c.check_states = {std::stoi(parts[0]), std::stoi(parts[1])};
  }
  if (auto s = pt.get_optional<std::string>("charcheck.ops")) c.check_ops = split_list(*s);

  c.sweep_p2_max = get(pt, "sweep.p2_max", c.sweep_p2_max);
  c.sweep_points = get(pt, "sweep.points", c.sweep_points);

  if (auto w = pt.get_optional<std::string>("classify.window")) c.window = split_list(*w);
  c.sigma = get(pt, "classify.sigma", c.sigma);
  c.detect = DetectOptions::for_noise(c.sigma);
  c.detect.gap_threshold = get(pt, "classify.gap_threshold", c.detect.gap_threshold);
  c.detect.release_threshold = get(pt, "classify.release_threshold", c.detect.release_threshold);
  c.detect.smoothing = get(pt, "classify.smoothing", c.detect.smoothing);
  c.detect.merge_gap = get(pt, "classify.merge_gap", c.detect.merge_gap);
  c.probe.min_offset = get(pt, "classify.min_offset", c.probe.min_offset);
  c.probe.clearance_factor = get(pt, "classify.clearance_factor", c.probe.clearance_factor);
  const std::string plan = detail::get_str(pt, "classify.plan", "minimal");
  if (plan != "minimal" && plan != "exhaustive")
    throw Error(ErrorKind::invalid_config, fmt::format("field 'classify.plan': expected minimal|exhaustive, got '{}'", plan));
  c.plan = plan == "minimal" ? PairPlan::minimal : PairPlan::exhaustive;

  c.out_dir = detail::get_str(pt, "output.dir", c.out_dir);
  c.tables_path = detail::get_str(pt, "output.tables", c.tables_path);
  return c;
}

inline void validate(const RunConfig& c) {
  if (c.system.a_cc <= 0) throw Error(ErrorKind::invalid_config, "field 'system.a_cc' must be > 0");
  if (c.system.d <= 0) throw Error(ErrorKind::invalid_config, "field 'system.d' must be > 0");
  if (c.intervals < 1) throw Error(ErrorKind::invalid_config, "field 'path.intervals' must be >= 1");
  if (c.shots < 1) throw Error(ErrorKind::invalid_config, "field 'backend.shots' must be >= 1");
  if (c.sweep_points < 2) throw Error(ErrorKind::invalid_config, "field 'sweep.points' must be >= 2");
  for (const auto& l : c.anchors) canonical_label(l);
  for (const auto& l : c.window) canonical_label(l);
  c.noise.validate();
}

inline std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw Error(ErrorKind::invalid_config, "field 'backend.seed' (or --seed) is required for sampling runs");
  return *c.seed;
}

inline Backend make_backend(const RunConfig& c) { return c.backend == "ideal" ? Backend::ideal() : Backend::noisy(c.noise); }

inline void write_file(const RunConfig& c, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(c.out_dir);
  const auto p = std::filesystem::path(c.out_dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::invalid_config, "cannot write " + p.string());
  f << content;
  spdlog::info("wrote {}", p.string());
}

// ---------------------------------------------------------------------------
// Plot scripts (matplotlib, read the CSV next to them).

inline std::string plot_bands_script(const std::string& csv, const std::string& title) {
  return fmt::format(R"PY(import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{0}")))
x = [int(r["path_index"]) for r in rows]
for b in range(1, 5):
    plt.plot(x, [float(r[f"E{{b}}"]) for r in rows], lw=1.2)
plt.xlabel("path index")
plt.ylabel("E (eV)")
plt.title("{1}")
plt.savefig("{0}".replace(".csv", ".png"), dpi=150)
)PY",
                     csv, title);
}

inline std::string plot_histogram_script() {
  return R"PY(import json
import matplotlib.pyplot as plt

data = json.load(open("outcomes.json"))
ops = [o["op"] for o in data["ops"]]
p0 = [o["p0_hat"] for o in data["ops"]]
plt.bar(range(len(ops)), p0, color="tab:blue", label="P(0)")
plt.bar(range(len(ops)), [1 - p for p in p0], bottom=p0, color="tab:orange", label="P(1)")
plt.axhline(0.5, color="k", ls="--", lw=0.8)
plt.xticks(range(len(ops)), ops)
plt.ylabel("ancilla probability")
plt.legend()
plt.savefig("outcomes.png", dpi=150)
)PY";
}

inline std::string plot_sweep_script() {
  return R"PY(import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("sweep.csv")))
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
for op in dict.fromkeys(r["op"] for r in rows):
    sel = [r for r in rows if r["op"] == op]
    panel = 0 if sel[0]["ideal_outcome"] == "0" else 1
    x = [100 * float(r["p2"]) for r in sel]
    ax[panel].plot(x, [float(r["correct_exact"]) for r in sel], marker="o", label=op)
for a, t in zip(ax, ["same character", "different character"]):
    a.set_xlabel("two-qubit error rate (%)")
    a.set_title(t)
    a.legend()
ax[0].set_ylabel("correct-outcome probability")
plt.tight_layout()
plt.savefig("sweep.png", dpi=150)
)PY";
}

inline std::string plot_before_after_script() {
  return R"PY(import csv
import matplotlib.pyplot as plt

noisy = list(csv.DictReader(open("noisy_bands.csv")))
fixed = list(csv.DictReader(open("corrected_bands.csv")))
fig, ax = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
x = [int(r["path_index"]) for r in noisy]
for b in range(1, 5):
    ax[0].plot(x, [float(r[f"E{b}"]) for r in noisy], lw=1)
for t in range(4):
    sel = [r for r in fixed if r["band"] == str(t)]
    ax[1].plot([int(r["path_index"]) for r in sel], [float(r["energy"]) for r in sel], lw=1)
ax[0].set_title("sorted")
ax[1].set_title("reconnected")
ax[0].set_ylabel("E (eV)")
plt.tight_layout()
plt.savefig("before_after.png", dpi=150)
)PY";
}

// ---------------------------------------------------------------------------
// Commands

inline BandData run_bands(const RunConfig& c, const std::vector<std::string>& anchors) {
  const auto geo = build_geometry(c.system);
  return band_structure(labelled_path(geo, anchors, c.intervals), TightBindingModel(geo, c.model));
}

inline int cmd_bands(const RunConfig& c) {
  const auto b = run_bands(c, c.anchors);
  write_file(c, "bands.csv", bands_csv(b));
  write_file(c, "eigvecs.json", eigenvectors_json(b).dump(1) + "\n");
  write_file(c, "plot_bands.py", plot_bands_script("bands.csv", std::string(to_string(c.system.kind)) + " bands"));
  spdlog::info("{} k-points", b.size());
  return kOk;
}

inline TableData load_tables(const RunConfig& c) {
  if (c.tables_path.empty()) return embedded_tables();
  std::ifstream f(c.tables_path);
  if (!f) throw Error(ErrorKind::invalid_config, "cannot read tables file " + c.tables_path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_tables(ss.str());
}

// Prints one line per (stacking, k); lists the rows that leak into other blocks.
inline int cmd_salc_verify(const RunConfig& c, std::ostream& os) {
  TableData t;
  try {
    t = load_tables(c);
  } catch (const Error& e) {
    os << "FAIL tables: " << e.what() << "\n";
    return kFailure;
  }
  bool ok = true;
  for (Stacking s : {Stacking::AA, Stacking::AB}) {
    StackingConfig cfg = s == c.system.kind ? c.system : StackingConfig::defaults(s);
    const auto geo = build_geometry(cfg);
    const TightBindingModel model(geo, c.model);
    for (const auto& k : tabulated_kpoints()) {
      const auto rows = select_salcs(t, s, k);
      const Mat4c H = model.hamiltonian(named_kpoint(geo, k).coords);
      double res = 0.0;
      std::vector<std::string> bad;
      try {
        res = verify_block_diagonal(H, rows);
      } catch (const Error& e) {
        os << fmt::format("FAIL {} {}: {}\n", to_string(s), k, e.what());
        ok = false;
        continue;
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < rows.size(); ++j)
          if (rows[i].irrep != rows[j].irrep) r = std::max(r, std::abs(rows[i].amplitudes.dot(H * rows[j].amplitudes)));
        if (r >= 1e-9) bad.push_back(fmt::format("row {} ({}) residual {:.3e}", i + 1, rows[i].irrep, r));
      }
      const bool pass = res < 1e-9;
      ok = ok && pass;
      os << fmt::format("{} {} {:<2} max off-block residual {:.3e}\n", pass ? "PASS" : "FAIL", to_string(s), k, res);
      for (const auto& b : bad) os << "     " << b << "\n";
    }
  }
  return ok ? kOk : kFailure;
}

struct CheckSetup {
  LatticeGeometry geo;
  LittleGroup lg;
  Vec4c psi1, psi2;
  Eigen::Vector4d energies;
};

inline CheckSetup check_setup(const RunConfig& c) {
  CheckSetup s{build_geometry(c.system), {}, {}, {}, {}};
  const KPoint k = named_kpoint(s.geo, c.check_k);
  s.lg = little_group(k, s.geo);
  const auto es = eigensolve(TightBindingModel(s.geo, c.model).hamiltonian(k.coords));
  s.energies = es.energies;
  for (int b : c.check_states)
    if (b < 0 || b > 3) throw Error(ErrorKind::invalid_config, "field 'charcheck.states': band index must be 0..3");
  for (int b : c.check_states) {
    const bool deg = (b > 0 && es.energies(b) - es.energies(b - 1) < 1e-6) || (b < 3 && es.energies(b + 1) - es.energies(b) < 1e-6);
    if (deg) throw Error(ErrorKind::degenerate_states, fmt::format("band {} is degenerate at {}", b, c.check_k));
  }
  s.psi1 = es.vectors.col(c.check_states[0]);
  s.psi2 = es.vectors.col(c.check_states[1]);
  return s;
}

inline int cmd_charcheck(const RunConfig& c, std::ostream& os) {
  const auto seed = require_seed(c);
  CheckSetup s;
  try {
    s = check_setup(c);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate_states) throw;
    os << "refused: " << e.what() << "\n";
    return kFailure;
  }
  CheckRequest req{make_backend(c), c.shots, seed, 0.5};
  const auto v = check_irrep_equality(s.psi1, s.psi2, s.lg, req, c.check_ops, fmt::format("band{}", c.check_states[0]),
                                      fmt::format("band{}", c.check_states[1]));
  for (std::size_t i = 0; i < v.outcomes.size(); ++i) {
    const auto& o = v.outcomes[i];
    os << fmt::format("{:<8} p0 = {:.5f}  ci [{:.5f}, {:.5f}]  gates {}/{}  {}\n", o.op_name, o.p0_hat, o.ci.lo, o.ci.hi,
                      o.gates_1q, o.gates_2q, to_string(v.decisions[i]));
  }
  os << "verdict: " << to_string(v.decision) << "\n";
  auto j = to_json(v);
  j["k"] = c.check_k;
  j["group"] = s.lg.group.label;
  j["backend"] = c.backend;
  j["noise"] = {{"p1", c.noise.p1}, {"p2", c.noise.p2}};
  j["seed"] = seed;
  j["state_prep_noisy"] = c.backend == "noisy";
  write_file(c, "outcomes.json", j.dump(1) + "\n");
  write_file(c, "plot_outcomes.py", plot_histogram_script());
  return kOk;
}

struct SweepRow {
  std::string op;
  double p2 = 0.0;
  int ideal_outcome = 0;
  double exact_p0 = 0.0;  // noisy density-matrix marginal
  double p0_hat = 0.0;
  Interval ci;
  int gates_1q = 0, gates_2q = 0;

  double correct_exact() const { return ideal_outcome == 0 ? exact_p0 : 1.0 - exact_p0; }
};

inline std::vector<SweepRow> noise_sweep(const RunConfig& c, std::uint64_t seed) {
  const auto s = check_setup(c);
  const Vec4c a = s.lg.U * s.psi1, b = s.lg.U * s.psi2;
  std::vector<SweepRow> rows;
  for (std::size_t oi = 0; oi < c.check_ops.size(); ++oi) {
    const int idx = s.lg.op_of_class(c.check_ops[oi]);
    if (idx < 0) throw Error(ErrorKind::invalid_config, "unknown op class " + c.check_ops[oi]);
    const Mat4c rep = s.lg.aligned_rep(static_cast<std::size_t>(idx));
    for (int i = 0; i < c.sweep_points; ++i) {
      const double p2 = c.sweep_p2_max * i / (c.sweep_points - 1);
      NoiseModel nm = NoiseModel::from_p2(p2);
      nm.weights = c.noise.weights;
      const auto o = run_check(a, b, rep, rep, Backend::noisy(nm), c.shots, derive_seed(seed, oi * 1000 + i), c.check_ops[oi]);
      SweepRow r;
      r.op = c.check_ops[oi];
      r.p2 = p2;
      r.ideal_outcome = *o.exact_p0 >= 0.5 ? 0 : 1;
      r.exact_p0 = o.model_p0;
      r.p0_hat = o.p0_hat;
      r.ci = o.ci;
      r.gates_1q = o.gates_1q;
      r.gates_2q = o.gates_2q;
      rows.push_back(r);
    }
  }
  return rows;
}

inline int cmd_noise_sweep(const RunConfig& c, std::ostream& os) {
  const auto seed = require_seed(c);
  const auto rows = noise_sweep(c, seed);
  std::string csv = "op,p2,p1,ideal_outcome,exact_p0,p0_hat,ci_lo,ci_hi,correct_exact,gates_1q,gates_2q\n";
  for (const auto& r : rows)
    csv += fmt::format("{},{:.6f},{:.6f},{},{:.10f},{:.6f},{:.6f},{:.6f},{:.10f},{},{}\n", r.op, r.p2, r.p2 / 2, r.ideal_outcome,
                       r.exact_p0, r.p0_hat, r.ci.lo, r.ci.hi, r.correct_exact(), r.gates_1q, r.gates_2q);
  for (const auto& r : rows)
    if (r.p2 == rows.back().p2 || r.p2 == 0.0)
      os << fmt::format("{:<5} p2 = {:.4f}  correct = {:.5f} (sampled p0 {:.5f})  gates {}/{}\n", r.op, r.p2, r.correct_exact(),
                        r.p0_hat, r.gates_1q, r.gates_2q);
  write_file(c, "sweep.csv", csv);
  write_file(c, "plot_sweep.py", plot_sweep_script());
  return kOk;
}

inline PipelineResult classify(const RunConfig& c, std::uint64_t seed, BandData* noisy_out = nullptr) {
  const auto geo = build_geometry(c.system);
  const auto clean = run_bands(c, c.window);
  const auto noisy = add_energy_noise(clean, c.sigma, derive_seed(seed, hash_tag("bands")));
  PipelineOptions opt;
  opt.detect = c.detect;
  opt.probe = c.probe;
  opt.probe.noise_scale = c.sigma;
  opt.plan = c.plan;
  opt.request = CheckRequest{make_backend(c), c.shots, derive_seed(seed, hash_tag("checks")), 0.5};
  if (noisy_out) *noisy_out = noisy;
  return run_pipeline(noisy, geo, opt);
}

inline int cmd_classify(const RunConfig& c, std::ostream& os) {
  const auto seed = require_seed(c);
  BandData noisy;
  PipelineResult r;
  try {
    r = classify(c, seed, &noisy);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::probe_selection && e.kind() != ErrorKind::degenerate_states &&
        e.kind() != ErrorKind::ambiguous_segments)
      throw;
    os << "classification failed: " << e.what() << "\n";
    return kFailure;
  }
  for (const auto& v : r.verdicts)
    os << fmt::format("touching point k={} bands ({},{}) probes {}/{} [{}] -> {}\n", v.tp.k_index, v.tp.band_pair[0],
                      v.tp.band_pair[1], v.probes.left, v.probes.right, v.probes.group, to_string(v.decision));
  os << fmt::format("{} touching points, {} segments, {} warnings\n", r.tps.size(), r.segments.size(), r.warnings);
  if (r.warnings > 0) spdlog::warn("{} touching points left inconclusive", r.warnings);
  auto j = to_json(r);
  j["seed"] = seed;
  j["sigma"] = c.sigma;
  j["backend"] = c.backend;
  write_file(c, "verdicts.json", j.dump(1) + "\n");
  write_file(c, "noisy_bands.csv", bands_csv(noisy));
  write_file(c, "corrected_bands.csv", corrected_csv(r));
  write_file(c, "plot_before_after.py", plot_before_after_script());
  return kOk;
}

// Collects whatever earlier commands left in the output directory.
inline int cmd_report(const RunConfig& c, std::ostream& os) {
  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  std::string md = "# Run report\n\n";
  bool any = false;
  if (fs::exists(dir / "bands.csv")) {
    std::ifstream f(dir / "bands.csv");
    std::size_t n = 0;
    for (std::string line; std::getline(f, line);) ++n;
    md += fmt::format("- bands.csv: {} k-points\n", n > 0 ? n - 1 : 0);
    any = true;
  }
  if (fs::exists(dir / "outcomes.json")) {
    const auto j = nlohmann::json::parse(std::ifstream(dir / "outcomes.json"));
    md += fmt::format("- character check at {} ({}): {}\n", j.value("k", "?"), j.value("group", "?"), j.value("decision", "?"));
    for (const auto& o : j["ops"])
      md += fmt::format("  - {}: p0 = {:.4f} ({})\n", o["op"].get<std::string>(), o["p0_hat"].get<double>(),
                        o["decision"].get<std::string>());
    any = true;
  }
  if (fs::exists(dir / "sweep.csv")) {
    std::ifstream f(dir / "sweep.csv");
    std::string line;
    std::getline(f, line);
    std::map<std::string, std::string> last;
    while (std::getline(f, line)) last[line.substr(0, line.find(','))] = line;
    md += "- noise sweep, last grid point per op:\n";
    for (const auto& [op, l] : last) md += "  - " + l + "\n";
    any = true;
  }
  if (fs::exists(dir / "verdicts.json")) {
    const auto j = nlohmann::json::parse(std::ifstream(dir / "verdicts.json"));
    md += fmt::format("- classification: {} touching points, {} warnings\n", j["touching_points"].size(), j["warnings"].get<int>());
    for (const auto& v : j["verdicts"])
      md += fmt::format("  - k = {} bands {}: {}\n", v["touching_point"]["k_index"].get<int>(),
                        v["touching_point"]["band_pair"].dump(), v["decision"].get<std::string>());
    any = true;
  }
  if (!any) {
    os << "nothing to report in " << dir.string() << "\n";
    return kFailure;
  }
  write_file(c, "report.md", md);
  os << md;
  return kOk;
}

}  // namespace blg::cli
