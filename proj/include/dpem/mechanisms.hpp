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

// Noise samplers, the l-infinity truncation operator and the noisy hard
// thresholding (peeling) selection used by the high-dimensional EM driver.

#ifndef DPEM_MECHANISMS_HPP_
#define DPEM_MECHANISMS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpem/vector_ops.hpp"

namespace dpem {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// (epsilon, delta) pair governing all noise calibration. epsilon = +inf is a
// sentinel for "non-private"; it is only accepted together with a silent
// NoiseOracle by the EM drivers.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon, double delta) : epsilon_(epsilon), delta_(delta) {
    if (!(epsilon > 0.0) || std::isnan(epsilon)) {
      throw std::invalid_argument("PrivacyBudget: epsilon must be > 0, got " +
                                  std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("PrivacyBudget: delta must lie in (0,1), got " +
                                  std::to_string(delta));
    }
  }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  bool is_private() const { return std::isfinite(epsilon_); }

 private:
  double epsilon_;
  double delta_;
};

enum class NoiseKind { kLaplace, kGaussian };

// Source of all randomness. A live oracle is a seeded 64-bit Mersenne
// twister; a silent oracle returns exact zeros from every noise draw (and +1
// from sign draws), which turns the private algorithms into their exact
// non-private counterparts. Single owner, not thread safe.
class NoiseOracle {
 public:
  enum class Mode { kLive, kSilent };

  // Invoked on every Laplace/Gaussian draw with the requested scale, in both
  // modes. Used by tests to audit noise calibration.
  using Observer = std::function<void(NoiseKind, double scale)>;

  explicit NoiseOracle(std::uint64_t seed, Mode mode = Mode::kLive)
      : seed_(seed), mode_(mode), engine_(seed) {}

  static NoiseOracle Silent() { return NoiseOracle(0, Mode::kSilent); }

  std::uint64_t seed() const { return seed_; }
  Mode mode() const { return mode_; }
  bool silent() const { return mode_ == Mode::kSilent; }

  void set_observer(Observer observer) { observer_ = std::move(observer); }

  // Uniform on the open interval (0, 1) from 53 random bits.
  double uniform_open() {
    if (silent()) return 0.5;
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double standard_normal() {
    if (silent()) return 0.0;
    return normal_(engine_);
  }

  // +1 or -1 with equal probability; +1 when silent.
  int rademacher() {
    if (silent()) return 1;
    return (engine_() >> 63) != 0 ? 1 : -1;
  }

  // true with probability p; when silent, true iff p >= 1/2.
  bool bernoulli(double p) {
    if (silent()) return p >= 0.5;
    return uniform_open() < p;
  }

  // Uniform index in [0, n). Used for shuffles; silent returns 0.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    if (silent()) return 0;
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  void notify(NoiseKind kind, double scale) const {
    if (observer_) observer_(kind, scale);
  }

 private:
  std::uint64_t seed_;
  Mode mode_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Observer observer_;
};

// SplitMix64 finalizer; used to derive independent per-run seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return MixSeed(MixSeed(MixSeed(master) ^ a) ^ MixSeed(b + 0x632be59bd9b4e019ULL));
}

// Projection of x onto [-T, T]. T may be +inf (no truncation).
inline double clamp_scalar(double x, double T) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("clamp_scalar: non-finite input " + std::to_string(x));
  }
  if (!(T > 0.0)) {
    throw std::invalid_argument("clamp_scalar: T must be > 0, got " + std::to_string(T));
  }
  return std::min(std::max(x, -T), T);
}

inline Vector clamp_vector(std::span<const double> v, double T) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = clamp_scalar(v[i], T);
  return out;
}

// Zero-mean Laplace draw with density exp(-|x|/b)/(2b), by inverse CDF.
inline double sample_laplace(double scale, NoiseOracle& oracle) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("sample_laplace: scale must be > 0, got " +
                                std::to_string(scale));
  }
  oracle.notify(NoiseKind::kLaplace, scale);
  if (oracle.silent()) return 0.0;
  const double u = oracle.uniform_open() - 0.5;
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

inline double sample_gaussian(double std_dev, NoiseOracle& oracle) {
  if (!(std_dev > 0.0)) {
    throw std::invalid_argument("sample_gaussian: std_dev must be > 0, got " +
                                std::to_string(std_dev));
  }
  oracle.notify(NoiseKind::kGaussian, std_dev);
  if (oracle.silent()) return 0.0;
  return std_dev * oracle.standard_normal();
}

// Output of a sparse projection: `support` lists the selected indices in
// selection order; `values` is dense and exactly zero off the support.
struct SparseSelection {
  std::vector<std::size_t> support;
  Vector values;
};

// Per-coordinate Laplace scale of one peeling round:
// lambda * 2 * sqrt(3 s ln(1/delta)) / epsilon.
inline double noisy_ht_laplace_scale(double lambda, std::size_t s, const PrivacyBudget& budget) {
  return lambda * 2.0 * std::sqrt(3.0 * static_cast<double>(s) * std::log(1.0 / budget.delta())) /
         budget.epsilon();
}

// Private top-s selection by peeling. `lambda` is the caller-certified
// l-infinity sensitivity of v. Ties in the noisy argmax go to the lowest index.
inline SparseSelection noisy_hard_threshold(std::span<const double> v, std::size_t s,
                                            double lambda, const PrivacyBudget& budget,
                                            NoiseOracle& oracle) {
  const std::size_t d = v.size();
  if (s < 1 || s > d) {
    throw std::invalid_argument("noisy_hard_threshold: need 1 <= s <= d, got s=" +
                                std::to_string(s) + ", d=" + std::to_string(d));
  }
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("noisy_hard_threshold: lambda must be >= 0, got " +
                                std::to_string(lambda));
  }
  const double scale = noisy_ht_laplace_scale(lambda, s, budget);
  // A zero scale (lambda = 0 or epsilon = inf) means no noise is needed.
  auto draw = [&]() { return scale > 0.0 ? sample_laplace(scale, oracle) : 0.0; };

  std::vector<bool> taken(d, false);
  SparseSelection out;
  out.support.reserve(s);
  for (std::size_t round = 0; round < s; ++round) {
    std::size_t best = d;
    double best_score = -kInfinity;
    // One fresh draw per coordinate, including already-selected ones, so the
    // noise stream does not depend on which indices were picked.
    for (std::size_t j = 0; j < d; ++j) {
      const double score = std::abs(v[j]) + draw();
      if (taken[j]) continue;
      if (best == d || score > best_score) {
        best = j;
        best_score = score;
      }
    }
    taken[best] = true;
    out.support.push_back(best);
  }

  out.values.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double noisy = v[j] + draw();
    if (taken[j]) out.values[j] = noisy;
  }
  return out;
}

}  // namespace dpem

#endif  // DPEM_MECHANISMS_HPP_
