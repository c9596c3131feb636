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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace blg {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4c = Eigen::Matrix<cplx, 4, 1>;
using Mat4c = Eigen::Matrix<cplx, 4, 4>;
using Mat2c = Eigen::Matrix<cplx, 2, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  invalid_config,
  empty_bond_set,
  invalid_path,
  not_hermitian,
  not_converged,
  not_normalized,
  not_unitary,
  not_in_little_group,
  unsupported_group,
  inconsistent_characters,
  zero_projection,
  unknown_label,
  not_orthonormal,
  table_mismatch,
  mode_mismatch,
  degenerate_states,
  probe_selection,
  ambiguous_segments,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_config: return "invalid_config";
    case ErrorKind::empty_bond_set: return "empty_bond_set";
    case ErrorKind::invalid_path: return "invalid_path";
    case ErrorKind::not_hermitian: return "not_hermitian";
    case ErrorKind::not_converged: return "not_converged";
    case ErrorKind::not_normalized: return "not_normalized";
    case ErrorKind::not_unitary: return "not_unitary";
    case ErrorKind::not_in_little_group: return "not_in_little_group";
    case ErrorKind::unsupported_group: return "unsupported_group";
    case ErrorKind::inconsistent_characters: return "inconsistent_characters";
    case ErrorKind::zero_projection: return "zero_projection";
    case ErrorKind::unknown_label: return "unknown_label";
    case ErrorKind::not_orthonormal: return "not_orthonormal";
    case ErrorKind::table_mismatch: return "table_mismatch";
    case ErrorKind::mode_mismatch: return "mode_mismatch";
    case ErrorKind::degenerate_states: return "degenerate_states";
    case ErrorKind::probe_selection: return "probe_selection";
    case ErrorKind::ambiguous_segments: return "ambiguous_segments";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// splitmix64 finalizer, used to derive independent streams from one seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_tag(const std::string& s) {
  // FNV-1a; stable across platforms, unlike std::hash.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
  return Rng(derive_seed(seed, tag));
}

}  // namespace blg
