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

// Brute-force references for the private algorithms: exact top-k selection,
// the explicit EM objectives Q_n(beta'; beta) with central-difference
// gradients, matrix-form gradients, and non-private gradient EM.
//
// Nothing here calls the drivers of em_engine.hpp or the gradient routines of
// models.hpp; only the sample and trajectory types are shared.

#ifndef DPEM_ORACLE_HPP_
#define DPEM_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpem/em_engine.hpp"
#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"
#include "dpem/vector_ops.hpp"

namespace dpem::oracle {

// The s largest |v_j| by a full stable sort; ties resolve to lower indices.
inline SparseSelection exact_top_k(std::span<const double> v, std::size_t s) {
  const std::size_t d = v.size();
  if (s < 1 || s > d) {
    throw std::invalid_argument("exact_top_k: need 1 <= s <= d, got s=" + std::to_string(s) +
                                ", d=" + std::to_string(d));
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  SparseSelection out;
  out.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
  out.values.assign(d, 0.0);
  for (std::size_t j : out.support) out.values[j] = v[j];
  return out;
}

namespace detail {

inline double Logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

inline Vector MBeta(std::span<const double> beta, const RmcSample& s, double sigma) {
  const std::size_t d = beta.size();
  Vector observed(d, 0.0);
  Vector missing_beta(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    if (s.z[j]) {
      observed[j] = s.x_obs[j];
    } else {
      missing_beta[j] = beta[j];
    }
  }
  const double resid = s.y - Dot(beta, observed);
  const double denom = sigma * sigma + SquaredNorm(missing_beta);
  Vector m(d);
  for (std::size_t j = 0; j < d; ++j) m[j] = observed[j] + resid / denom * missing_beta[j];
  return m;
}

template <typename Batch>
void RequireNonEmpty(const Batch& batch, const char* who) {
  if (batch.empty()) throw std::invalid_argument(std::string(who) + ": empty batch");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Explicit objectives Q_n(beta'; beta)

inline double q_value(std::span<const double> beta_prime, std::span<const double> beta,
                      std::span<const GmmSample> batch, double sigma) {
  detail::RequireNonEmpty(batch, "q_value(gmm)");
  RequireSameSize(beta_prime, beta, "q_value(gmm)");
  double acc = 0.0;
  for (const auto& s : batch) {
    RequireSameSize(beta, s.y, "q_value(gmm)");
    double inner = 0.0;
    double minus = 0.0;
    double plus = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
      inner += beta[j] * s.y[j];
      minus += (s.y[j] - beta_prime[j]) * (s.y[j] - beta_prime[j]);
      plus += (s.y[j] + beta_prime[j]) * (s.y[j] + beta_prime[j]);
    }
    const double w = detail::Logistic(inner / (sigma * sigma));
    acc += w * minus + (1.0 - w) * plus;
  }
  return -acc / (2.0 * static_cast<double>(batch.size()));
}

inline double q_value(std::span<const double> beta_prime, std::span<const double> beta,
                      std::span<const MorSample> batch, double sigma) {
  detail::RequireNonEmpty(batch, "q_value(mor)");
  RequireSameSize(beta_prime, beta, "q_value(mor)");
  double acc = 0.0;
  for (const auto& s : batch) {
    RequireSameSize(beta, s.x, "q_value(mor)");
    double xb = 0.0;
    double xbp = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
      xb += s.x[j] * beta[j];
      xbp += s.x[j] * beta_prime[j];
    }
    const double w = detail::Logistic(s.y * xb / (sigma * sigma));
    acc += w * (s.y - xbp) * (s.y - xbp) + (1.0 - w) * (s.y + xbp) * (s.y + xbp);
  }
  return -acc / (2.0 * static_cast<double>(batch.size()));
}

// Conditional second moment K_beta as a dense row-major d x d matrix.
inline std::vector<double> rmc_k_matrix(std::span<const double> beta, const RmcSample& s,
                                        double sigma) {
  const std::size_t d = beta.size();
  const Vector m = detail::MBeta(beta, s, sigma);
  std::vector<double> k(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    const double ua = s.z[a] ? 0.0 : m[a];
    for (std::size_t b = 0; b < d; ++b) {
      const double ub = s.z[b] ? 0.0 : m[b];
      k[a * d + b] = m[a] * m[b] - ua * ub;
    }
    if (!s.z[a]) k[a * d + a] += 1.0;
  }
  return k;
}

inline double q_value(std::span<const double> beta_prime, std::span<const double> beta,
                      std::span<const RmcSample> batch, double sigma) {
  detail::RequireNonEmpty(batch, "q_value(rmc)");
  RequireSameSize(beta_prime, beta, "q_value(rmc)");
  const std::size_t d = beta.size();
  double acc = 0.0;
  for (const auto& s : batch) {
    const Vector m = detail::MBeta(beta, s, sigma);
    const std::vector<double> k = rmc_k_matrix(beta, s, sigma);
    double linear = 0.0;
    for (std::size_t j = 0; j < d; ++j) linear += beta_prime[j] * m[j];
    double quad = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) quad += beta_prime[a] * k[a * d + b] * beta_prime[b];
    }
    acc += s.y * linear - 0.5 * quad;
  }
  return acc / static_cast<double>(batch.size());
}

// Central difference of Q_n(. ; beta) at beta' = beta, one coordinate at a time.
template <typename Sample>
Vector finite_diff_grad(std::span<const double> beta, std::span<const Sample> batch,
                        double sigma, double h = 1e-5) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
  Vector g(beta.size());
  Vector probe(beta.begin(), beta.end());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    probe[j] = beta[j] + h;
    const double up = q_value(probe, beta, batch, sigma);
    probe[j] = beta[j] - h;
    const double down = q_value(probe, beta, batch, sigma);
    probe[j] = beta[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reference gradients written directly from the displayed formulas, with K
// materialized for the missing-covariate model.

inline Vector reference_grad(std::span<const double> beta, std::span<const GmmSample> batch,
                             double sigma) {
  detail::RequireNonEmpty(batch, "reference_grad(gmm)");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    double inner = 0.0;
    for (std::size_t j = 0; j < d; ++j) inner += beta[j] * s.y[j];
    const double w = detail::Logistic(inner / (sigma * sigma));
    for (std::size_t j = 0; j < d; ++j) g[j] += (2.0 * w - 1.0) * s.y[j] - beta[j];
  }
  for (auto& gj : g) gj /= static_cast<double>(batch.size());
  return g;
}

inline Vector reference_grad(std::span<const double> beta, std::span<const MorSample> batch,
                             double sigma) {
  detail::RequireNonEmpty(batch, "reference_grad(mor)");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    double xb = 0.0;
    for (std::size_t j = 0; j < d; ++j) xb += s.x[j] * beta[j];
    const double w = detail::Logistic(s.y * xb / (sigma * sigma));
    for (std::size_t j = 0; j < d; ++j) g[j] += (2.0 * w - 1.0) * s.y * s.x[j] - s.x[j] * xb;
  }
  for (auto& gj : g) gj /= static_cast<double>(batch.size());
  return g;
}

inline Vector reference_grad(std::span<const double> beta, std::span<const RmcSample> batch,
                             double sigma) {
  detail::RequireNonEmpty(batch, "reference_grad(rmc)");
  const std::size_t d = beta.size();
  Vector g(d, 0.0);
  for (const auto& s : batch) {
    const Vector m = detail::MBeta(beta, s, sigma);
    const std::vector<double> k = rmc_k_matrix(beta, s, sigma);
    for (std::size_t a = 0; a < d; ++a) {
      double kb = 0.0;
      for (std::size_t b = 0; b < d; ++b) kb += k[a * d + b] * beta[b];
      g[a] += s.y * m[a] - kb;
    }
  }
  for (auto& gj : g) gj /= static_cast<double>(batch.size());
  return g;
}

// ---------------------------------------------------------------------------
// Non-private EM references

namespace detail {

inline void Record(Trajectory& traj, const ParamVector& beta,
                   const std::optional<ParamVector>& true_beta) {
  traj.betas.push_back(beta);
  if (true_beta) {
    traj.errors.push_back(Distance(beta, *true_beta));
    traj.errors_signfree.push_back(SignFreeDistance(beta, *true_beta));
  }
}

template <typename Sample>
void CheckEmArgs(std::span<const Sample> data, const EmConfig& config,
                 std::span<const double> beta0, const char* who) {
  if (config.N0 == 0) throw std::invalid_argument(std::string(who) + ": N0 must be positive");
  if (data.size() < config.N0) {
    throw std::invalid_argument(std::string(who) + ": dataset smaller than N0");
  }
  if (beta0.empty()) throw std::invalid_argument(std::string(who) + ": empty beta0");
}

}  // namespace detail

// Sample-split gradient EM with exact hard thresholding: the non-private,
// untruncated counterpart of run_high_dim. Batches are rebuilt here from the
// record count rather than taken from split_batches.
template <typename Sample>
Trajectory hard_threshold_em(std::span<const Sample> data, double sigma, const EmConfig& config,
                             const ParamVector& beta0,
                             const std::optional<ParamVector>& true_beta = std::nullopt) {
  detail::CheckEmArgs(data, config, beta0, "hard_threshold_em");
  const std::size_t per_batch = data.size() / config.N0;
  Trajectory traj;
  ParamVector beta = beta0;
  detail::Record(traj, beta, true_beta);
  for (std::size_t t = 0; t < config.N0; ++t) {
    traj.batch_bounds.push_back({t * per_batch, t * per_batch + per_batch});
    const Vector g = reference_grad(beta, data.subspan(t * per_batch, per_batch), sigma);
    Vector step(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) step[j] = beta[j] + config.eta * g[j];
    beta = exact_top_k(step, config.s_hat).values;
    detail::Record(traj, beta, true_beta);
  }
  return traj;
}

// Full-data, untruncated, noiseless gradient EM run for config.N0 iterations.
// batch_bounds stays empty: every iteration sees the whole dataset.
template <typename Sample>
Trajectory nonprivate_em(std::span<const Sample> data, double sigma, const EmConfig& config,
                         const ParamVector& beta0,
                         const std::optional<ParamVector>& true_beta = std::nullopt) {
  detail::CheckEmArgs(data, config, beta0, "nonprivate_em");
  if (!(config.eta >= 0.0)) throw std::invalid_argument("nonprivate_em: eta must be >= 0");
  Trajectory traj;
  ParamVector beta = beta0;
  detail::Record(traj, beta, true_beta);
  for (std::size_t t = 0; t < config.N0; ++t) {
    const Vector g = reference_grad(beta, data, sigma);
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] += config.eta * g[j];
    detail::Record(traj, beta, true_beta);
  }
  return traj;
}

}  // namespace dpem::oracle

#endif  // DPEM_ORACLE_HPP_
