#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "paranet/cv_risk.hpp"
#include "paranet/dataset.hpp"
#include "paranet/rng.hpp"

namespace paranet {

enum class InitialMode { exhaustive, sampled_large_p, exhaustive_upto };

/// Parameters of the stepwise importance-weighted search.
struct SearchConfig {
  int d_max = 5;
  int b = 0;                 // candidates per level; 0 resolves to clamp(p, 2000, 20000)
  double alpha = 0.01;       // quantile level defining the promising set
  double pi = 0.5;           // probability of sampling from the previous level's index set
  std::vector<int> m0;       // always-included covariates (sorted, duplicate-free)
  InitialMode initial_mode = InitialMode::exhaustive;
  int d_prime = 2;           // exhaustive_upto: last exhaustive dimension
  long exhaustive_budget = 2000000;  // cap on sum of binomial(p, d), d <= d_prime
  std::uint64_t seed = 0;
  int folds_m = 10;
  int reps_k = 10;
  CvMode cv_mode = CvMode::full_mfold;
  bool stratify = true;      // stratified folds for binary tasks
  EstimatorConfig estimator;
  DivergenceSpec divergence;
  int threads = 0;           // worker count for candidate scoring; 0 = hardware

  int resolved_b(int p) const;
  int resolved_threads() const;

  /// Checks bounds against the dataset (alpha/pi ranges, d_max vs p and
  /// fold sizes, m0 indices). Throws std::invalid_argument on violation.
  void validate(const Dataset& dataset) const;

  nlohmann::ordered_json to_json() const;
  static SearchConfig from_json(const nlohmann::json& j);
};

/// One scored candidate: a distinct model, its risk, and how many of the
/// level's draws produced it.
struct EvaluatedModel {
  std::shared_ptr<const RiskEstimate> risk;
  int multiplicity = 1;
  const std::vector<int>& model() const { return risk->model; }
  double d_hat() const { return risk->d_hat; }
};

/// Outcome of one search level (dimension d).
struct LevelResult {
  int d = 0;
  long draws = 0;                      // N: candidate draws including duplicates
  std::vector<EvaluatedModel> evaluated;  // distinct models, first-appearance order
  double q_hat = 0.0;                  // ceil(alpha*N)-th smallest draw-weighted d_hat
  int anchor = -1;                     // index into evaluated: quantile-defining model
  std::vector<int> s_star;             // indices into evaluated with d_hat <= q_hat,
                                       // sorted by (d_hat, model)
  std::vector<int> i_star;             // covariates present in s_star, minus m0
  long i_complement_size = 0;

  const RiskEstimate& anchor_risk() const { return *evaluated.at(anchor).risk; }
};

struct SearchTrace {
  SearchConfig config;   // with b and threads resolved
  FoldPlan plan;
  std::vector<LevelResult> levels;  // levels[d-1] holds dimension d
  std::uint64_t master_seed = 0;
  std::uint64_t plan_seed = 0;
  std::vector<std::uint64_t> level_seeds;

  const LevelResult& level(int d) const { return levels.at(d - 1); }

  nlohmann::ordered_json to_json() const;
  std::string curve_csv() const;  // "d,q_hat" per level
};

/// Draws one candidate: d distinct covariates, each draw picking the
/// previous promising pool with probability pi (falling through to the
/// other pool when the chosen one is exhausted), prefixed with m0.
std::vector<int> sample_candidate(const std::vector<int>& i_star_prev,
                                  const std::vector<int>& complement_prev,
                                  int d, double pi, Rng& rng,
                                  const std::vector<int>& m0 = {});

/// Level 1 by scoring every single-covariate augmentation of m0.
LevelResult initial_step_exhaustive(const Dataset& dataset, const SearchConfig& config,
                                    const FoldPlan& plan, RiskCache& cache);

/// Level 1 by B uniform single-covariate draws (large-p variant).
LevelResult initial_step_sampled(const Dataset& dataset, const SearchConfig& config,
                                 const FoldPlan& plan, RiskCache& cache);

/// Levels 1..d_prime by exhaustive enumeration (small-p variant). Throws
/// when the total enumeration exceeds config.exhaustive_budget.
std::vector<LevelResult> initial_exhaustive_upto(const Dataset& dataset,
                                                 const SearchConfig& config,
                                                 const FoldPlan& plan, RiskCache& cache,
                                                 int d_prime);

/// Level d >= 2: B candidates biased toward the previous level's I*.
LevelResult general_step(const Dataset& dataset, const LevelResult& prev, int d,
                         const SearchConfig& config, const FoldPlan& plan,
                         RiskCache& cache);

/// Full pipeline: fold plan, initial step, general steps up to d_max.
/// Deterministic for a given seed, independent of the worker count.
SearchTrace run_search(const Dataset& dataset, const SearchConfig& config);

/// Runs fn(0..count-1) on the given number of workers. Used for candidate
/// scoring; any exception is rethrown on the calling thread.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace paranet
