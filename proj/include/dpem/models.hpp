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

// Model ingredients for the three latent-variable models:
//
//   gmm  symmetric two-component Gaussian mixture   y = z*beta + e
//   mor  symmetric mixture of linear regressions     y = z*<x,beta> + e
//   rmc  linear regression with covariates missing completely at random
//
// For each model this header provides a data generator, the sample gradient
// grad Q_n(beta; beta), its truncated version f_T(.) whose per-sample
// l-infinity range is bounded in terms of T, and the certified sensitivity of
// one gradient step under replacement of a single record.

#ifndef DPEM_MODELS_HPP_
#define DPEM_MODELS_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpem/mechanisms.hpp"
#include "dpem/vector_ops.hpp"

namespace dpem {

enum class ModelKind { kGmm, kMor, kRmc };

inline std::string_view ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGmm:
      return "gmm";
    case ModelKind::kMor:
      return "mor";
    case ModelKind::kRmc:
      return "rmc";
  }
  return "?";
}

inline std::optional<ModelKind> ParseModelKind(std::string_view name) {
  if (name == "gmm") return ModelKind::kGmm;
  if (name == "mor") return ModelKind::kMor;
  if (name == "rmc") return ModelKind::kRmc;
  return std::nullopt;
}

struct GmmSample {
  Vector y;
};

struct MorSample {
  Vector x;
  double y = 0.0;
};

// x_obs is zero wherever z (the observation mask) is zero.
struct RmcSample {
  Vector x_obs;
  std::vector<unsigned char> z;
  double y = 0.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kGmm;
  std::size_t d = 0;
  double sigma = 1.0;
  ParamVector true_beta;     // generators only
  double missing_prob = 0.0;  // rmc only

  void Validate() const {
    if (d == 0) throw std::invalid_argument("ModelSpec: d must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("ModelSpec: sigma must be positive and finite");
    }
    if (!true_beta.empty() && true_beta.size() != d) {
      throw std::invalid_argument("ModelSpec: true_beta has dimension " +
                                  std::to_string(true_beta.size()) + ", expected " +
                                  std::to_string(d));
    }
    if (!AllFinite(true_beta)) throw std::invalid_argument("ModelSpec: non-finite true_beta");
    if (kind == ModelKind::kRmc && !(missing_prob >= 0.0 && missing_prob < 1.0)) {
      throw std::invalid_argument("ModelSpec: missing_prob must lie in [0,1)");
    }
  }
};

namespace detail {

inline void CheckGeneratorArgs(const ModelSpec& spec, ModelKind expected, std::size_t n,
                               const char* who) {
  if (spec.kind != expected) {
    throw std::invalid_argument(std::string(who) + ": ModelSpec has kind " +
                                std::string(ToString(spec.kind)));
  }
  spec.Validate();
  if (spec.true_beta.size() != spec.d) {
    throw std::invalid_argument(std::string(who) + ": true_beta is required");
  }
  if (n == 0) throw std::invalid_argument(std::string(who) + ": n must be positive");
}

template <typename Batch>
void CheckBatch(const Batch& batch, std::span<const double> beta, const char* who) {
  if (batch.empty()) throw std::invalid_argument(std::string(who) + ": empty batch");
  if (beta.empty()) throw std::invalid_argument(std::string(who) + ": empty beta");
}

inline void CheckT(double T, const char* who) {
  if (!(T > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": T must be > 0, got " + std::to_string(T));
  }
}

inline void CheckSensitivityArgs(double T, double eta, std::size_t N0, std::size_t n,
                                 const char* who) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::invalid_argument(std::string(who) +
                                ": T must be positive and finite for a private run");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument(std::string(who) + ": eta must be >= 0");
  }
  if (N0 == 0 || n == 0) throw std::invalid_argument(std::string(who) + ": N0 and n must be positive");
}

inline double Logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaussian mixture

inline std::vector<GmmSample> generate_gmm(const ModelSpec& spec, std::size_t n,
                                           NoiseOracle& oracle) {
  detail::CheckGeneratorArgs(spec, ModelKind::kGmm, n, "generate_gmm");
  std::vector<GmmSample> out(n);
  for (auto& sample : out) {
    const double z = oracle.rademacher();
    sample.y.resize(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) {
      sample.y[j] = z * spec.true_beta[j] + spec.sigma * oracle.standard_normal();
    }
  }
  return out;
}

// Posterior probability that y came from the +beta component.
inline double gmm_weight(std::span<const double> beta, std::span<const double> y, double sigma) {
  return detail::Logistic(Dot(beta, y) / (sigma * sigma));
}

inline Vector gmm_grad(std::span<const double> beta, std::span<const GmmSample> batch,
                       double sigma) {
  detail::CheckBatch(batch, beta, "gmm_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    RequireSameSize(beta, s.y, "gmm_grad");
    const double c = 2.0 * gmm_weight(beta, s.y, sigma) - 1.0;
    for (std::size_t j = 0; j < d; ++j) g[j] += c * s.y[j];
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] * inv_n - beta[j];
  return g;
}

// (1/n) sum [(2 w(y_i) - 1) Pi_T(y_i) - beta]; the weight uses the raw y_i.
inline Vector gmm_truncated_grad(std::span<const double> beta, std::span<const GmmSample> batch,
                                 double sigma, double T) {
  detail::CheckBatch(batch, beta, "gmm_truncated_grad");
  detail::CheckT(T, "gmm_truncated_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    RequireSameSize(beta, s.y, "gmm_truncated_grad");
    const double c = 2.0 * gmm_weight(beta, s.y, sigma) - 1.0;
    for (std::size_t j = 0; j < d; ++j) g[j] += c * clamp_scalar(s.y[j], T);
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < d; ++j) g[j] = g[j] * inv_n - beta[j];
  return g;
}

// l-infinity sensitivity of beta + eta * f_T(.) on a batch of n/N0 records.
inline double gmm_sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
  detail::CheckSensitivityArgs(T, eta, N0, n, "gmm_sensitivity");
  return 2.0 * eta * T * static_cast<double>(N0) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Mixture of regressions

inline std::vector<MorSample> generate_mor(const ModelSpec& spec, std::size_t n,
                                           NoiseOracle& oracle) {
  detail::CheckGeneratorArgs(spec, ModelKind::kMor, n, "generate_mor");
  std::vector<MorSample> out(n);
  for (auto& sample : out) {
    sample.x.resize(spec.d);
    for (auto& xj : sample.x) xj = oracle.standard_normal();
    const double z = oracle.rademacher();
    sample.y = z * Dot(sample.x, spec.true_beta) + spec.sigma * oracle.standard_normal();
  }
  return out;
}

inline double mor_weight(std::span<const double> beta, std::span<const double> x, double y,
                         double sigma) {
  return detail::Logistic(y * Dot(beta, x) / (sigma * sigma));
}

// (1/n) sum [(2 w - 1) y x - x x^T beta], the derivative of Q_n(beta'; beta)
// in beta' at beta' = beta.
inline Vector mor_grad(std::span<const double> beta, std::span<const MorSample> batch,
                       double sigma) {
  detail::CheckBatch(batch, beta, "mor_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    RequireSameSize(beta, s.x, "mor_grad");
    const double c = (2.0 * mor_weight(beta, s.x, s.y, sigma) - 1.0) * s.y;
    const double xb = Dot(s.x, beta);
    for (std::size_t j = 0; j < d; ++j) g[j] += c * s.x[j] - s.x[j] * xb;
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& gj : g) gj *= inv_n;
  return g;
}

// (1/n) sum [(2 w - 1) Pi_T(y) Pi_T(x) - Pi_T(x) Pi_T(x^T beta)]; w uses the
// untruncated (x, y).
inline Vector mor_truncated_grad(std::span<const double> beta, std::span<const MorSample> batch,
                                 double sigma, double T) {
  detail::CheckBatch(batch, beta, "mor_truncated_grad");
  detail::CheckT(T, "mor_truncated_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    RequireSameSize(beta, s.x, "mor_truncated_grad");
    const double c =
        (2.0 * mor_weight(beta, s.x, s.y, sigma) - 1.0) * clamp_scalar(s.y, T);
    const double xb = clamp_scalar(Dot(s.x, beta), T);
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = clamp_scalar(s.x[j], T);
      g[j] += c * xj - xj * xb;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& gj : g) gj *= inv_n;
  return g;
}

inline double mor_sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
  detail::CheckSensitivityArgs(T, eta, N0, n, "mor_sensitivity");
  return 4.0 * eta * T * T * static_cast<double>(N0) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Regression with missing covariates

inline std::vector<RmcSample> generate_rmc(const ModelSpec& spec, std::size_t n,
                                           NoiseOracle& oracle) {
  detail::CheckGeneratorArgs(spec, ModelKind::kRmc, n, "generate_rmc");
  std::vector<RmcSample> out(n);
  Vector x(spec.d);
  for (auto& sample : out) {
    for (auto& xj : x) xj = oracle.standard_normal();
    sample.y = Dot(x, spec.true_beta) + spec.sigma * oracle.standard_normal();
    sample.z.resize(spec.d);
    sample.x_obs.resize(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) {
      sample.z[j] = oracle.bernoulli(1.0 - spec.missing_prob) ? 1 : 0;
      sample.x_obs[j] = sample.z[j] ? x[j] : 0.0;
    }
  }
  return out;
}

// Conditional mean of x given the observed coordinates and y:
//   z.x + (y - <beta, z.x>) / (sigma^2 + ||(1-z).beta||^2) * (1-z).beta
inline Vector rmc_mbeta(std::span<const double> beta, const RmcSample& sample, double sigma) {
  const std::size_t d = beta.size();
  RequireSameSize(beta, sample.x_obs, "rmc_mbeta");
  if (sample.z.size() != d) throw std::invalid_argument("rmc_mbeta: mask dimension mismatch");
  double observed_fit = 0.0;
  double missing_norm2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (sample.z[j]) {
      observed_fit += beta[j] * sample.x_obs[j];
    } else {
      missing_norm2 += beta[j] * beta[j];
    }
  }
  const double coef = (sample.y - observed_fit) / (sigma * sigma + missing_norm2);
  Vector m(d);
  for (std::size_t j = 0; j < d; ++j) m[j] = sample.z[j] ? sample.x_obs[j] : coef * beta[j];
  return m;
}

// (1/n) sum [y m - K beta] with K = diag(1-z) + m m^T - u u^T, u = (1-z).m.
// K is applied in rank-structured form and never materialized.
inline Vector rmc_grad(std::span<const double> beta, std::span<const RmcSample> batch,
                       double sigma) {
  detail::CheckBatch(batch, beta, "rmc_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    const Vector m = rmc_mbeta(beta, s, sigma);
    const double mb = Dot(m, beta);
    double ub = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!s.z[j]) ub += m[j] * beta[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double missing = s.z[j] ? 0.0 : 1.0;
      const double u = missing * m[j];
      g[j] += s.y * m[j] - (missing * beta[j] + m[j] * mb - u * ub);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& gj : g) gj *= inv_n;
  return g;
}

// (1/n) sum [Pi(y) Pi(m) - diag(1-z) beta - Pi(m) Pi(m^T beta) + Pi(u) Pi(u^T beta)].
// diag(1-z) beta is left unclamped; m is computed from the raw record.
inline Vector rmc_truncated_grad(std::span<const double> beta, std::span<const RmcSample> batch,
                                 double sigma, double T) {
  detail::CheckBatch(batch, beta, "rmc_truncated_grad");
  detail::CheckT(T, "rmc_truncated_grad");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    const Vector m = rmc_mbeta(beta, s, sigma);
    const double y_t = clamp_scalar(s.y, T);
    const double mb_t = clamp_scalar(Dot(m, beta), T);
    double ub = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!s.z[j]) ub += m[j] * beta[j];
    }
    const double ub_t = clamp_scalar(ub, T);
    for (std::size_t j = 0; j < d; ++j) {
      const double missing = s.z[j] ? 0.0 : 1.0;
      const double m_t = clamp_scalar(m[j], T);
      const double u_t = clamp_scalar(missing * m[j], T);
      g[j] += y_t * m_t - missing * beta[j] - m_t * mb_t + u_t * ub_t;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (auto& gj : g) gj *= inv_n;
  return g;
}

// Certified for iterates with ||beta||_inf <= T^2: the unclamped
// diag(1-z) beta term changes by |beta_j| when z_j flips.
inline double rmc_sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
  detail::CheckSensitivityArgs(T, eta, N0, n, "rmc_sensitivity");
  return 6.0 * eta * T * T * static_cast<double>(N0) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Static model traits consumed by the generic EM drivers and the harness.

struct GmmModel {
  using Sample = GmmSample;
  static constexpr ModelKind kKind = ModelKind::kGmm;

  static std::size_t Dim(const Sample& s) { return s.y.size(); }
  static std::vector<Sample> Generate(const ModelSpec& spec, std::size_t n, NoiseOracle& o) {
    return generate_gmm(spec, n, o);
  }
  static Vector Grad(std::span<const double> b, std::span<const Sample> batch, double sigma) {
    return gmm_grad(b, batch, sigma);
  }
  static Vector TruncatedGrad(std::span<const double> b, std::span<const Sample> batch,
                              double sigma, double T) {
    return gmm_truncated_grad(b, batch, sigma, T);
  }
  static double Sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
    return gmm_sensitivity(T, eta, N0, n);
  }
  // Per-sample range constant Delta in the low-dimensional Gaussian variance.
  static double LowDimDelta(double T) { return 2.0 * T; }
};

struct MorModel {
  using Sample = MorSample;
  static constexpr ModelKind kKind = ModelKind::kMor;

  static std::size_t Dim(const Sample& s) { return s.x.size(); }
  static std::vector<Sample> Generate(const ModelSpec& spec, std::size_t n, NoiseOracle& o) {
    return generate_mor(spec, n, o);
  }
  static Vector Grad(std::span<const double> b, std::span<const Sample> batch, double sigma) {
    return mor_grad(b, batch, sigma);
  }
  static Vector TruncatedGrad(std::span<const double> b, std::span<const Sample> batch,
                              double sigma, double T) {
    return mor_truncated_grad(b, batch, sigma, T);
  }
  static double Sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
    return mor_sensitivity(T, eta, N0, n);
  }
  static double LowDimDelta(double T) { return 4.0 * T * T; }
};

struct RmcModel {
  using Sample = RmcSample;
  static constexpr ModelKind kKind = ModelKind::kRmc;

  static std::size_t Dim(const Sample& s) { return s.x_obs.size(); }
  static std::vector<Sample> Generate(const ModelSpec& spec, std::size_t n, NoiseOracle& o) {
    return generate_rmc(spec, n, o);
  }
  static Vector Grad(std::span<const double> b, std::span<const Sample> batch, double sigma) {
    return rmc_grad(b, batch, sigma);
  }
  static Vector TruncatedGrad(std::span<const double> b, std::span<const Sample> batch,
                              double sigma, double T) {
    return rmc_truncated_grad(b, batch, sigma, T);
  }
  static double Sensitivity(double T, double eta, std::size_t N0, std::size_t n) {
    return rmc_sensitivity(T, eta, N0, n);
  }
  static double LowDimDelta(double T) { return 6.0 * T * T; }
};

}  // namespace dpem

#endif  // DPEM_MODELS_HPP_
