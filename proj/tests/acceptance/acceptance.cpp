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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Optional arguments select criteria by
// number, e.g. `acceptance 4 9`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dpem/dpem.hpp"
#include "../test_support.hpp"

namespace dpem::acceptance {
namespace {

using testing::Rng;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

template <typename Model>
std::vector<typename Model::Sample> Generate(const ModelSpec& spec, std::size_t n,
                                             NoiseOracle& oracle) {
  return Model::Generate(spec, n, oracle);
}

// ---------------------------------------------------------------------------
// 1. run_high_dim with silent noise and T = inf against the oracle EM.

template <typename Model>
double OracleGap(Rng& rng) {
  const std::size_t d = rng.Index(2, 20);
  const std::size_t n = rng.Index(40, 500);
  const ModelSpec spec = testing::RandomSpec(Model::kKind, d, rng);
  NoiseOracle data_oracle(rng.Index(0, 1u << 30));
  const auto data = Generate<Model>(spec, n, data_oracle);
  EmConfig config;
  config.regime = Regime::kHighDim;
  config.eta = rng.Uniform(0.1, 0.8);
  config.N0 = rng.Index(1, 8);
  config.s_hat = rng.Index(1, d);
  config.T = kInfinity;
  config.budget = PrivacyBudget(kInfinity, 0.01);
  ParamVector beta0 = rng.Gaussian(d, 0.5);
  beta0 = oracle::exact_top_k(beta0, config.s_hat).values;

  NoiseOracle silent = NoiseOracle::Silent();
  const std::span<const typename Model::Sample> view(data);
  const Trajectory got = run_high_dim<Model>(spec, view, config, beta0, silent);
  const Trajectory want = oracle::hard_threshold_em(view, spec.sigma, config, beta0);
  if (got.betas.size() != want.betas.size()) return kInfinity;
  double worst = 0.0;
  for (std::size_t t = 0; t < got.betas.size(); ++t) {
    worst = std::max(worst, testing::MaxAbsDiff(got.betas[t], want.betas[t]));
  }
  return worst;
}

Verdict OracleEquivalence() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    switch (i % 3) {
      case 0: worst = std::max(worst, OracleGap<GmmModel>(rng)); break;
      case 1: worst = std::max(worst, OracleGap<MorModel>(rng)); break;
      default: worst = std::max(worst, OracleGap<RmcModel>(rng)); break;
    }
  }
  return {worst <= 1e-12, Fmt("max coordinate gap %.3e over 50 instances (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------------------
// 2. Closed-form gradients against central differences of Q_n.

double RelativeGap(const Vector& got, const Vector& fd) {
  double num = 0.0;
  for (std::size_t j = 0; j < got.size(); ++j) num += (got[j] - fd[j]) * (got[j] - fd[j]);
  return std::sqrt(num) / std::max(Norm2(fd), 1e-8);
}

Verdict GradientCorrectness() {
  Rng rng(202);
  double worst[3] = {0, 0, 0};
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = rng.Index(1, 10);
    const std::size_t n = rng.Index(1, 12);
    const Vector beta = rng.Gaussian(d);
    const double sigma = rng.Uniform(0.4, 1.5);
    const auto g = testing::RandomGmmBatch(n, d, rng);
    const auto m = testing::RandomMorBatch(n, d, rng);
    const auto r = testing::RandomRmcBatch(n, d, rng);
    worst[0] = std::max(worst[0], RelativeGap(gmm_grad(beta, g, sigma),
                                              oracle::finite_diff_grad(
                                                  beta, std::span<const GmmSample>(g), sigma)));
    worst[1] = std::max(worst[1], RelativeGap(mor_grad(beta, m, sigma),
                                              oracle::finite_diff_grad(
                                                  beta, std::span<const MorSample>(m), sigma)));
    worst[2] = std::max(worst[2], RelativeGap(rmc_grad(beta, r, sigma),
                                              oracle::finite_diff_grad(
                                                  beta, std::span<const RmcSample>(r), sigma)));
  }
  const bool pass = worst[0] < 1e-5 && worst[1] < 1e-5 && worst[2] < 1e-5;
  return {pass, Fmt("max relative error gmm %.2e, mor %.2e, rmc %.2e (tol 1e-5)", worst[0],
                    worst[1], worst[2])};
}

// ---------------------------------------------------------------------------
// 3. Adjacent batches never move eta * f_T by more than the certified bound.

// Extreme magnitudes saturate every clamp; mixing them with small values and
// exact zeros probes the sign and mask combinations.
double Extreme(Rng& rng, double T) {
  switch (rng.Index(0, 4)) {
    case 0: return T * rng.Uniform(5, 50);
    case 1: return -T * rng.Uniform(5, 50);
    case 2: return rng.Coin() ? T : -T;
    case 3: return 0.0;
    default: return rng.Normal() * T;
  }
}

GmmSample AdversarialGmm(Rng& rng, std::size_t d, double T) {
  GmmSample s;
  for (std::size_t j = 0; j < d; ++j) s.y.push_back(Extreme(rng, T));
  return s;
}

MorSample AdversarialMor(Rng& rng, std::size_t d, double T) {
  MorSample s;
  for (std::size_t j = 0; j < d; ++j) s.x.push_back(Extreme(rng, T));
  s.y = Extreme(rng, T);
  return s;
}

RmcSample AdversarialRmc(Rng& rng, std::size_t d, double T) {
  RmcSample s;
  const bool all_missing = rng.Coin(0.2);
  for (std::size_t j = 0; j < d; ++j) {
    const bool observed = !all_missing && rng.Coin();
    s.z.push_back(observed ? 1 : 0);
    s.x_obs.push_back(observed ? Extreme(rng, T) : 0.0);
  }
  s.y = Extreme(rng, T);
  return s;
}

template <typename Model, typename Make>
Verdict SensitivityFor(const char* name, Rng& rng, Make make, bool bounded_beta) {
  double worst_ratio = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t d = rng.Index(1, 6);
    const std::size_t batch = rng.Index(1, 8);
    const std::size_t N0 = rng.Index(1, 6);
    const std::size_t n = N0 * batch;
    const double T = rng.Uniform(0.3, 3.0);
    const double eta = rng.Uniform(0.05, 1.5);
    const double sigma = rng.Uniform(0.3, 2.0);
    Vector beta(d);
    for (auto& b : beta) {
      b = bounded_beta ? rng.Uniform(-T * T, T * T) : Extreme(rng, T) / 5.0;
    }
    std::vector<typename Model::Sample> a, b;
    for (std::size_t i = 0; i < batch; ++i) a.push_back(make(rng, d, T));
    b = a;
    const std::size_t swap = rng.Index(0, batch - 1);
    b[swap] = make(rng, d, T);
    if (rng.Coin()) a[swap] = make(rng, d, T);
    const Vector ga = Model::TruncatedGrad(beta, a, sigma, T);
    const Vector gb = Model::TruncatedGrad(beta, b, sigma, T);
    const double moved = eta * testing::MaxAbsDiff(ga, gb);
    const double bound = Model::Sensitivity(T, eta, N0, n);
    worst_ratio = std::max(worst_ratio, moved / bound);
    if (moved > bound * (1.0 + 1e-12)) {
      std::ostringstream w;
      w << name << " violation: moved " << moved << " > bound " << bound << " at T=" << T
        << " eta=" << eta << " N0=" << N0 << " n=" << n << " record " << swap;
      return {false, w.str()};
    }
  }
  return {true, std::string(name) + Fmt(" worst/bound %.4f", worst_ratio)};
}

Verdict SensitivityCertification() {
  Rng rng(303);
  const Verdict g = SensitivityFor<GmmModel>("gmm", rng, AdversarialGmm, false);
  const Verdict m = SensitivityFor<MorModel>("mor", rng, AdversarialMor, false);
  // The 6 T^2 bound is certified for ||beta||_inf <= T^2 only.
  const Verdict r = SensitivityFor<RmcModel>("rmc", rng, AdversarialRmc, true);
  return {g.pass && m.pass && r.pass,
          g.detail + ", " + m.detail + ", " + r.detail + " (1000 pairs each)"};
}

// ---------------------------------------------------------------------------
// 4. NoisyHT: exhaustive silent-mode agreement and live-mode scale.

bool NextGrid(std::vector<int>& digits, int base) {
  for (auto& digit : digits) {
    if (++digit < base) return true;
    digit = 0;
  }
  return false;
}

Verdict NoisyHtContract() {
  NoiseOracle silent = NoiseOracle::Silent();
  const PrivacyBudget budget(1.0, 0.1);
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  // Values from a small symmetric grid make ties and sign flips exhaustive.
  for (std::size_t d = 1; d <= 12; ++d) {
    const int base = d <= 7 ? 5 : 3;
    std::vector<int> digits(d, 0);
    do {
      Vector v(d);
      for (std::size_t j = 0; j < d; ++j) v[j] = digits[j] - base / 2;
      for (std::size_t s = 1; s <= d; ++s) {
        const auto got = noisy_hard_threshold(v, s, 1.0, budget, silent);
        const auto want = oracle::exact_top_k(v, s);
        if (got.support != want.support || got.values != want.values) ++mismatches;
        ++checked;
      }
    } while (NextGrid(digits, base));
  }

  Rng rng(404);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = rng.Index(1, 30);
    const std::size_t s = rng.Index(1, d);
    const double lambda = rng.Uniform(1e-4, 2.0);
    const double eps = rng.Uniform(0.05, 5.0);
    const double delta = std::exp(-rng.Uniform(1.0, 20.0));
    const double want = lambda * 2.0 * std::sqrt(3.0 * s * std::log(1.0 / delta)) / eps;
    NoiseOracle live(i);
    live.set_observer([&](NoiseKind, double scale) {
      worst = std::max(worst, std::abs(scale - want) / want);
    });
    noisy_hard_threshold(rng.Gaussian(d), s, lambda, PrivacyBudget(eps, delta), live);
  }
  std::ostringstream out;
  out << mismatches << " silent mismatches in " << checked
      << " (v, s) cases with d <= 12; live scale max relative error " << Fmt("%.2e", worst);
  return {mismatches == 0 && worst <= 1e-12, out.str()};
}

// ---------------------------------------------------------------------------
// 5. Low-dimensional Gaussian noise: formula audit and Monte-Carlo variance.

template <typename Model>
Verdict NoiseFor(const char* name, double range_per_T2, bool quadratic, std::uint64_t seed_base,
                 Rng& rng) {
  const std::size_t d = 500;
  const std::size_t n = 203;
  const std::size_t N0 = 1;
  const double T = 1.3;
  const double eta = 0.7;
  const PrivacyBudget budget(0.4, 1e-3);
  const double range = range_per_T2 * (quadratic ? T * T : T);
  const std::size_t n_used = n;
  const double want = 2.0 * eta * eta * d * range * range * N0 * N0 *
                      std::log(1.25 / budget.delta()) /
                      (static_cast<double>(n_used) * n_used * budget.epsilon() * budget.epsilon());

  ModelSpec spec = testing::RandomSpec(Model::kKind, d, rng);
  EmConfig config;
  config.regime = Regime::kLowDim;
  config.eta = eta;
  config.N0 = N0;
  config.T = T;
  config.budget = budget;

  double audit = 0.0;
  double sum = 0.0, sum2 = 0.0;
  std::size_t draws = 0;
  for (int run = 0; run < 200; ++run) {
    NoiseOracle data_oracle(seed_base + 1000 + run);
    const auto data = Generate<Model>(spec, n, data_oracle);
    const ParamVector beta0 = rng.Gaussian(d, 0.05);
    NoiseOracle live(seed_base + 5000 + run);
    live.set_observer([&](NoiseKind, double sd) {
      audit = std::max(audit, std::abs(sd * sd - want) / want);
    });
    NoiseOracle silent = NoiseOracle::Silent();
    const auto noisy = run_low_dim<Model>(spec, data, config, beta0, live);
    const auto clean = run_low_dim<Model>(spec, data, config, beta0, silent);
    for (std::size_t j = 0; j < d; ++j) {
      const double w = noisy.betas[1][j] - clean.betas[1][j];
      sum += w;
      sum2 += w * w;
      ++draws;
    }
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  const double mc = std::abs(var / want - 1.0);
  return {audit <= 1e-12 && mc <= 0.05,
          std::string(name) + Fmt(" var %.4e vs %.4e (MC dev %.2f%%, audit %.1e)", var, want,
                                  100 * mc, audit)};
}

Verdict NoiseCalibration() {
  Rng rng(505);
  const Verdict g = NoiseFor<GmmModel>("gmm", 2.0, false, 10000, rng);
  const Verdict m = NoiseFor<MorModel>("mor", 4.0, true, 20000, rng);
  const Verdict r = NoiseFor<RmcModel>("rmc", 6.0, true, 30000, rng);
  return {g.pass && m.pass && r.pass, g.detail + "; " + m.detail + "; " + r.detail};
}

// ---------------------------------------------------------------------------
// 6 and 7. Desk-scale trend orderings.

std::vector<double> TrendMeans(ModelKind model, harness::SweepParam sweep,
                               std::vector<double> values, double epsilon) {
  harness::ExperimentConfig c;
  c.model = model;
  c.regime = Regime::kHighDim;
  c.sweep = sweep;
  c.sweep_values = std::move(values);
  c.n = 4000;
  c.d = 200;
  c.s_star = 10;
  c.epsilon = epsilon;
  c.sigma = 0.5;
  c.eta = 0.5;
  c.reps = 20;
  c.master_seed = 2026;
  const auto result = harness::run_experiment(c, harness::Runner::kPrivate, harness::ResolveJobs());
  std::vector<double> means;
  for (const auto& cell : result.cells) means.push_back(cell.mean_final_error());
  return means;
}

Verdict Trends(ModelKind model, double epsilon, std::vector<double> eps_values) {
  using harness::SweepParam;
  const auto by_n = TrendMeans(model, SweepParam::kN, {4000, 5000, 6000}, epsilon);
  const auto by_s = TrendMeans(model, SweepParam::kSStar, {5, 10, 15}, epsilon);
  const auto by_eps = TrendMeans(model, SweepParam::kEpsilon, eps_values, epsilon);
  const bool a = by_n[0] > by_n[1] && by_n[1] > by_n[2];
  const bool b = by_s[0] < by_s[1] && by_s[1] < by_s[2];
  const bool c = by_eps[0] > by_eps[1] && by_eps[1] > by_eps[2];
  std::ostringstream out;
  out << "(a) n 4000/5000/6000: " << Fmt("%.3f > %.3f > %.3f", by_n[0], by_n[1], by_n[2])
      << (a ? "" : " NO") << "; (b) s* 5/10/15: "
      << Fmt("%.3f < %.3f < %.3f", by_s[0], by_s[1], by_s[2]) << (b ? "" : " NO")
      << "; (c) eps " << eps_values[0] << "/" << eps_values[1] << "/" << eps_values[2] << ": "
      << Fmt("%.3f > %.3f > %.3f", by_eps[0], by_eps[1], by_eps[2]) << (c ? "" : " NO");
  return {a && b && c, out.str()};
}

Verdict GmmTrends() { return Trends(ModelKind::kGmm, 0.5, {0.3, 0.5, 0.8}); }
Verdict MorTrends() { return Trends(ModelKind::kMor, 0.6, {0.4, 0.6, 0.8}); }

// ---------------------------------------------------------------------------
// 8. Non-private recovery: final error <= 3 sqrt(d/n) in at least 18 of 20 runs.

Verdict StatisticalRecovery() {
  harness::ExperimentConfig c;
  c.model = ModelKind::kGmm;
  c.regime = Regime::kLowDim;
  c.sweep = harness::SweepParam::kN;
  c.sweep_values = {5000};
  c.d = 10;
  c.s_star = 10;
  c.sigma = 0.5;
  c.eta = 0.5;
  c.epsilon = 1.0;  // unused by the baseline runner
  c.reps = 20;
  c.master_seed = 808;
  const auto result = harness::run_experiment(c, harness::Runner::kBaseline, harness::ResolveJobs());
  const double threshold = 3.0 * std::sqrt(10.0 / 5000.0);
  int within = 0;
  double worst = 0.0;
  for (const auto& rep : result.cells[0].reps) {
    within += rep.final_error() <= threshold;
    worst = std::max(worst, rep.final_error());
  }
  std::ostringstream out;
  out << within << "/20 runs within " << Fmt("%.4f (worst %.4f)", threshold, worst);
  return {within >= 18, out.str()};
}

// ---------------------------------------------------------------------------
// 9. Classification on a synthetic two-class testbed.

Verdict Classification() {
  const harness::LabeledData data = testing::GmmTestbed(400, 30, 10, 0.5, 909);
  auto rate = [&](double epsilon) {
    harness::ClassificationParams p;
    p.s_hat = 10;
    p.epsilon = epsilon;
    p.iters = 1;
    p.T = 0.15;
    p.eta = 0.5;
    return harness::run_classification(data, p, 50, 99, harness::ResolveJobs())
        .misclassification_rate;
  };
  const double nonprivate = rate(kInfinity);
  const double half = rate(0.5);
  const double fifth = rate(0.2);
  const bool pass = half <= 0.12 && half >= nonprivate && fifth >= half;
  return {pass, Fmt("eps=0.5 rate %.4f (<= 0.12), non-private %.4f, eps=0.2 %.4f", half,
                    nonprivate, fifth)};
}

// ---------------------------------------------------------------------------
// 10. Two CLI invocations on one config give byte-identical CSV.

Verdict Reproducibility() {
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string config = dir + "/dpem_acceptance_repro.json";
  harness::WriteTextFile(config, R"({
    "model": "rmc", "regime": "high_dim",
    "sweep": {"name": "epsilon", "values": [0.5, 1.0]},
    "fixed": {"n": 1500, "d": 40, "s_star": 4, "sigma": 0.5, "eta": 0.5, "reps": 6},
    "master_seed": 1010})");
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const std::string out = dir + "/dpem_acceptance_repro_" + std::to_string(i) + ".csv";
    const std::string cmd = std::string("\"") + DPEM_CLI_PATH + "\" run --config \"" + config +
                            "\" --out \"" + out + "\" --jobs " + std::to_string(i + 1) +
                            " > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "dpem run failed: " + cmd};
    csv[i] = harness::ReadTextFile(out);
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1];
  return {same, std::to_string(csv[0].size()) + " bytes, " + (same ? "identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace
}  // namespace dpem::acceptance

int main(int argc, char** argv) {
  using namespace dpem::acceptance;
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", OracleEquivalence},
      {2, "gradient correctness", GradientCorrectness},
      {3, "sensitivity certification", SensitivityCertification},
      {4, "NoisyHT contract", NoisyHtContract},
      {5, "noise calibration", NoiseCalibration},
      {6, "GMM trend orderings", GmmTrends},
      {7, "MoR trend orderings", MorTrends},
      {8, "non-private recovery", StatisticalRecovery},
      {9, "classification testbed", Classification},
      {10, "CLI reproducibility", Reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
