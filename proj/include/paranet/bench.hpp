#pragma once

#include "paranet/dataset.hpp"
#include "paranet/dimension.hpp"
#include "paranet/search.hpp"

namespace paranet {

enum class Correlation { independent, equicorrelated };

/// Synthetic generator with a planted sparse truth. Covariates are
/// standard normal; binary responses are Bernoulli(logistic(x * beta)).
struct SyntheticSpec {
  int n = 120;
  int p = 200;
  std::vector<int> support = {0, 1};
  std::vector<double> coefficients = {8.0, 8.0};
  Task task = Task::binary;
  double noise_sigma = 1.0;   // continuous-task noise level
  Correlation correlation = Correlation::independent;
  double rho = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

Dataset generate(const SyntheticSpec& spec);

/// Support-recovery metrics of one end-to-end run against the planted truth.
struct RecoveryReport {
  bool support_recovered = false;  // planted support appears in S0
  bool d_star_correct = false;
  int d_star = 0;
  int curve_argmin_d = 0;          // first dimension attaining the minimal q_hat
  double q_hat_at_true_d = 0.0;
  double runtime_seconds = 0.0;

  nlohmann::ordered_json to_json() const;
};

RecoveryReport recovery_report(const SearchTrace& trace, const SelectionReport& selection,
                               const SyntheticSpec& spec, double runtime_seconds = 0.0);

}  // namespace paranet
