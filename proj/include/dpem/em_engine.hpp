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

// Differentially private gradient EM drivers.
//
// Both drivers split the data into N0 disjoint, equally sized batches and use
// batch t for iteration t only, so each record influences one iterate. The
// high-dimensional driver projects every gradient step with
// noisy_hard_threshold; the low-dimensional driver adds isotropic Gaussian
// noise instead.

#ifndef DPEM_EM_ENGINE_HPP_
#define DPEM_EM_ENGINE_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpem/mechanisms.hpp"
#include "dpem/models.hpp"
#include "dpem/vector_ops.hpp"

namespace dpem {

enum class Regime { kHighDim, kLowDim };

struct EmConfig {
  double eta = 0.5;
  double T = 1.0;  // +inf disables truncation; silent oracle only
  std::size_t N0 = 1;
  std::size_t s_hat = 1;  // high_dim only
  PrivacyBudget budget{1.0, 0.5};
  Regime regime = Regime::kHighDim;
};

// Half-open index range [begin, end).
struct BatchRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const BatchRange&, const BatchRange&) = default;
};

struct Trajectory {
  std::vector<ParamVector> betas;    // beta^0 ... beta^N0
  std::vector<double> errors;        // ||beta^t - beta*||, empty when beta* unknown
  std::vector<double> errors_signfree;  // min(||beta^t - beta*||, ||beta^t + beta*||)
  std::vector<BatchRange> batch_bounds;

  const ParamVector& final_beta() const { return betas.back(); }
};

// N0 contiguous batches of floor(n/N0) records; the trailing n mod N0 records
// are not used.
inline std::vector<BatchRange> split_batches(std::size_t n, std::size_t N0) {
  if (N0 == 0) throw std::invalid_argument("split_batches: N0 must be positive");
  if (N0 > n) {
    throw std::invalid_argument("split_batches: N0=" + std::to_string(N0) +
                                " exceeds n=" + std::to_string(n));
  }
  const std::size_t size = n / N0;
  std::vector<BatchRange> out;
  out.reserve(N0);
  for (std::size_t t = 0; t < N0; ++t) out.push_back({t * size, (t + 1) * size});
  return out;
}

// Per-coordinate variance of the Gaussian perturbation in the low-dimensional
// driver: 2 eta^2 d Delta^2 N0^2 ln(1.25/delta) / (n^2 epsilon^2).
inline double low_dim_noise_variance(double delta_range, double eta, std::size_t d,
                                     std::size_t N0, std::size_t n_used,
                                     const PrivacyBudget& budget) {
  const double n = static_cast<double>(n_used);
  const double n0 = static_cast<double>(N0);
  return 2.0 * eta * eta * static_cast<double>(d) * delta_range * delta_range * n0 * n0 *
         std::log(1.25 / budget.delta()) / (n * n * budget.epsilon() * budget.epsilon());
}

namespace detail {

inline void RecordIterate(Trajectory& traj, ParamVector beta,
                          const std::optional<ParamVector>& true_beta) {
  if (true_beta) {
    traj.errors.push_back(Distance(beta, *true_beta));
    traj.errors_signfree.push_back(SignFreeDistance(beta, *true_beta));
  }
  traj.betas.push_back(std::move(beta));
}

template <typename Model>
void ValidateRun(const ModelSpec& spec, std::span<const typename Model::Sample> data,
                 const EmConfig& config, std::span<const double> beta0, const NoiseOracle& oracle,
                 const std::optional<ParamVector>& true_beta, const char* who) {
  spec.Validate();
  if (spec.kind != Model::kKind) {
    throw std::invalid_argument(std::string(who) + ": model kind mismatch");
  }
  if (beta0.size() != spec.d) {
    throw std::invalid_argument(std::string(who) + ": beta0 has dimension " +
                                std::to_string(beta0.size()) + ", expected " +
                                std::to_string(spec.d));
  }
  if (!AllFinite(beta0)) throw std::invalid_argument(std::string(who) + ": non-finite beta0");
  if (true_beta && true_beta->size() != spec.d) {
    throw std::invalid_argument(std::string(who) + ": true_beta dimension mismatch");
  }
  for (const auto& s : data) {
    if (Model::Dim(s) != spec.d) {
      throw std::invalid_argument(std::string(who) + ": sample dimension mismatch");
    }
  }
  if (config.N0 == 0) throw std::invalid_argument(std::string(who) + ": N0 must be positive");
  if (data.size() < config.N0) {
    throw std::invalid_argument(std::string(who) + ": dataset of size " +
                                std::to_string(data.size()) + " is smaller than N0=" +
                                std::to_string(config.N0));
  }
  if (!(config.eta >= 0.0) || !std::isfinite(config.eta)) {
    throw std::invalid_argument(std::string(who) + ": eta must be finite and >= 0");
  }
  if (!(config.T > 0.0)) throw std::invalid_argument(std::string(who) + ": T must be > 0");
  if (!oracle.silent()) {
    if (!std::isfinite(config.T)) {
      throw std::invalid_argument(std::string(who) +
                                  ": T = inf is only allowed with a silent noise oracle");
    }
    if (!config.budget.is_private()) {
      throw std::invalid_argument(std::string(who) +
                                  ": epsilon = inf is only allowed with a silent noise oracle");
    }
  }
}

}  // namespace detail

// High-dimensional DP EM: truncated gradient step on batch t followed by
// noisy hard thresholding to s_hat coordinates.
template <typename Model>
Trajectory run_high_dim(const ModelSpec& spec, std::span<const typename Model::Sample> data,
                        const EmConfig& config, const ParamVector& beta0, NoiseOracle& oracle,
                        const std::optional<ParamVector>& true_beta = std::nullopt) {
  detail::ValidateRun<Model>(spec, data, config, beta0, oracle, true_beta, "run_high_dim");
  if (config.regime != Regime::kHighDim) {
    throw std::invalid_argument("run_high_dim: config.regime must be high_dim");
  }
  if (config.s_hat < 1 || config.s_hat > spec.d) {
    throw std::invalid_argument("run_high_dim: s_hat must lie in [1, d]");
  }
  if (CountNonzero(beta0) > config.s_hat) {
    throw std::invalid_argument("run_high_dim: ||beta0||_0 = " +
                                std::to_string(CountNonzero(beta0)) + " exceeds s_hat = " +
                                std::to_string(config.s_hat));
  }

  Trajectory traj;
  traj.batch_bounds = split_batches(data.size(), config.N0);
  const std::size_t n_used = config.N0 * traj.batch_bounds.front().size();
  const double lambda = std::isfinite(config.T)
                            ? Model::Sensitivity(config.T, config.eta, config.N0, n_used)
                            : kInfinity;

  ParamVector beta = beta0;
  detail::RecordIterate(traj, beta, true_beta);
  for (const BatchRange& range : traj.batch_bounds) {
    const auto batch = data.subspan(range.begin, range.size());
    const Vector grad = Model::TruncatedGrad(beta, batch, spec.sigma, config.T);
    Vector half_step(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) half_step[j] = beta[j] + config.eta * grad[j];
    beta = noisy_hard_threshold(half_step, config.s_hat, lambda, config.budget, oracle).values;
    detail::RecordIterate(traj, beta, true_beta);
  }
  return traj;
}

// Low-dimensional DP EM: truncated gradient step on batch t plus i.i.d.
// Gaussian noise calibrated to the model's per-sample range.
template <typename Model>
Trajectory run_low_dim(const ModelSpec& spec, std::span<const typename Model::Sample> data,
                       const EmConfig& config, const ParamVector& beta0, NoiseOracle& oracle,
                       const std::optional<ParamVector>& true_beta = std::nullopt) {
  detail::ValidateRun<Model>(spec, data, config, beta0, oracle, true_beta, "run_low_dim");
  if (config.regime != Regime::kLowDim) {
    throw std::invalid_argument("run_low_dim: config.regime must be low_dim");
  }

  Trajectory traj;
  traj.batch_bounds = split_batches(data.size(), config.N0);
  const std::size_t n_used = config.N0 * traj.batch_bounds.front().size();
  double noise_std = 0.0;
  if (std::isfinite(config.T) && config.budget.is_private()) {
    noise_std = std::sqrt(low_dim_noise_variance(Model::LowDimDelta(config.T), config.eta,
                                                 spec.d, config.N0, n_used, config.budget));
  }

  ParamVector beta = beta0;
  detail::RecordIterate(traj, beta, true_beta);
  for (const BatchRange& range : traj.batch_bounds) {
    const auto batch = data.subspan(range.begin, range.size());
    const Vector grad = Model::TruncatedGrad(beta, batch, spec.sigma, config.T);
    for (std::size_t j = 0; j < beta.size(); ++j) {
      const double noise = noise_std > 0.0 ? sample_gaussian(noise_std, oracle) : 0.0;
      beta[j] = beta[j] + config.eta * grad[j] + noise;
    }
    detail::RecordIterate(traj, beta, true_beta);
  }
  return traj;
}

}  // namespace dpem

#endif  // DPEM_EM_ENGINE_HPP_
