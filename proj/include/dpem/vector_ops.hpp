//
// Copyright 2026 The dpem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPEM_VECTOR_OPS_HPP_
#define DPEM_VECTOR_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpem {

// Dense real vector. Parameters (beta), observations and gradients all use it.
using Vector = std::vector<double>;
using ParamVector = Vector;

inline void RequireSameSize(std::span<const double> a, std::span<const double> b,
                            const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

inline double Dot(std::span<const double> a, std::span<const double> b) {
  RequireSameSize(a, b, "Dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double SquaredNorm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double Norm2(std::span<const double> v) { return std::sqrt(SquaredNorm(v)); }

inline double NormInf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline std::size_t CountNonzero(std::span<const double> v) {
  std::size_t k = 0;
  for (double x : v) k += (x != 0.0);
  return k;
}

// ||a - b||_2
inline double Distance(std::span<const double> a, std::span<const double> b) {
  RequireSameSize(a, b, "Distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

// min(||a - b||, ||a + b||); mixture models identify beta only up to sign.
inline double SignFreeDistance(std::span<const double> a, std::span<const double> b) {
  RequireSameSize(a, b, "SignFreeDistance");
  double minus = 0.0;
  double plus = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    minus += (a[i] - b[i]) * (a[i] - b[i]);
    plus += (a[i] + b[i]) * (a[i] + b[i]);
  }
  return std::sqrt(std::min(minus, plus));
}

inline bool AllFinite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace dpem

#endif  // DPEM_VECTOR_OPS_HPP_
