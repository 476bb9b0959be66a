#pragma once

#include <span>
#include <vector>

#include "paranet/search.hpp"

namespace paranet {

enum class TestKind { binomial_proportions, mann_whitney };
enum class Correction { bonferroni, none };

struct TestConfig {
  double family_level = 0.05;   // overall significance budget
  Correction correction = Correction::bonferroni;
  bool auto_kind = true;        // pick the test from the divergence kind
  TestKind kind = TestKind::binomial_proportions;

  void validate() const;
  TestKind resolve(DivergenceKind divergence) const;
  nlohmann::ordered_json to_json() const;
  static TestConfig from_json(const nlohmann::json& j);
};

struct TestResult {
  double p_value = 1.0;
  bool reject = false;
};

/// One-sided exact conditional two-proportion test (hypergeometric tail)
/// of H1: a's positive-loss rate is smaller than b's. Losses are reduced
/// to Bernoulli indicators loss > 0.
TestResult binomial_improvement_test(std::span<const double> losses_a,
                                     std::span<const double> losses_b, double level);

/// One-sided Mann-Whitney rank-sum test of H1: a's losses are
/// stochastically smaller than b's. Uses midranks for ties, the exact
/// conditional distribution when both sizes are <= 12, and the
/// tie-corrected normal approximation otherwise.
TestResult mann_whitney_test(std::span<const double> losses_a,
                             std::span<const double> losses_b, double level);

/// The U statistic (pairs where a > b count 1, ties count 1/2).
double mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct DimensionChoice {
  int d_star = 1;
  std::vector<double> p_values;  // one per tested step j -> j+1
  bool capped = false;           // every step significant: d_star = d_max
};

/// Walks j = 1..L-1 testing whether level j+1's quantile-anchor model
/// improves on level j's, on their per-evaluation loss vectors. Stops at
/// the first non-significant step. Bonferroni budgets d_max - 1 tests.
DimensionChoice select_dimension(const SearchTrace& trace, const TestConfig& tc);

struct SelectedModel {
  std::shared_ptr<const RiskEstimate> risk;
  const std::vector<int>& model() const { return risk->model; }
};

struct SelectionReport {
  int d_star = 1;
  bool d_star_capped = false;
  std::vector<double> dimension_p_values;
  std::vector<double> filter_p_values;
  TestKind test_kind = TestKind::binomial_proportions;
  double family_level = 0.05;
  std::vector<SelectedModel> s0;   // s0.front() is the anchor j_min
  std::vector<int> min_model;

  nlohmann::ordered_json to_json(const std::vector<std::string>& names) const;
};

/// Filters the level's promising set down to the models statistically
/// indistinguishable from the best one: sort by (d_hat, model), anchor at
/// the minimum, stop at the first significantly larger divergence.
SelectionReport filter_models(const LevelResult& level, const TestConfig& tc,
                              DivergenceKind divergence);

/// select_dimension followed by filter_models on the chosen level.
SelectionReport select_and_filter(const SearchTrace& trace, const TestConfig& tc);

}  // namespace paranet
