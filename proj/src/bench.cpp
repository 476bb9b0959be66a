#include "paranet/bench.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paranet/rng.hpp"

namespace paranet {

void SyntheticSpec::validate() const {
  if (n < 2 || p < 1) throw std::invalid_argument("synthetic: n and p must be positive");
  if (support.size() != coefficients.size())
    throw std::invalid_argument("synthetic: support/coefficient size mismatch");
  for (int idx : support)
    if (idx < 0 || idx >= p)
      throw std::invalid_argument("synthetic: support index out of range");
  for (double c : coefficients)
    if (!std::isfinite(c) || c == 0.0)
      throw std::invalid_argument(
          "synthetic: support coefficients must be finite and nonzero "
          "(use an empty support for the null model)");
  if (correlation == Correlation::equicorrelated && !(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("synthetic: rho must lie in [0,1)");
  if (noise_sigma < 0.0) throw std::invalid_argument("synthetic: negative noise level");
}

nlohmann::ordered_json SyntheticSpec::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["p"] = p;
  j["support"] = support;
  j["coefficients"] = coefficients;
  j["task"] = to_string(task);
  j["noise_sigma"] = noise_sigma;
  j["correlation"] = correlation == Correlation::independent ? "independent"
                                                             : "equicorrelated";
  j["rho"] = rho;
  j["seed"] = seed;
  return j;
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(split_seed(spec.seed, 0x5e0u));
  Eigen::MatrixXd x(spec.n, spec.p);
  const double common = std::sqrt(spec.rho);
  const double idio = std::sqrt(1.0 - spec.rho);
  for (int i = 0; i < spec.n; ++i) {
    const double factor =
        spec.correlation == Correlation::equicorrelated ? rng.normal() : 0.0;
    for (int j = 0; j < spec.p; ++j) {
      const double z = rng.normal();
      x(i, j) = spec.correlation == Correlation::equicorrelated
                    ? common * factor + idio * z
                    : z;
    }
  }

  Eigen::VectorXd signal = Eigen::VectorXd::Zero(spec.n);
  for (std::size_t s = 0; s < spec.support.size(); ++s)
    signal += spec.coefficients[s] * x.col(spec.support[s]);

  Eigen::VectorXd y(spec.n);
  if (spec.task == Task::binary) {
    for (int i = 0; i < spec.n; ++i)
      y[i] = rng.bernoulli(logistic(signal[i])) ? 1.0 : 0.0;
    // Guarantee both classes so the dataset invariant holds even for
    // extreme draws: flip the most marginal observation if needed.
    const double total = y.sum();
    if (total == 0.0 || total == spec.n) {
      int flip = 0;
      for (int i = 1; i < spec.n; ++i)
        if (std::abs(signal[i]) < std::abs(signal[flip])) flip = i;
      y[flip] = 1.0 - y[flip];
    }
  } else {
    for (int i = 0; i < spec.n; ++i) y[i] = signal[i] + spec.noise_sigma * rng.normal();
  }
  return make_dataset(std::move(x), std::move(y), spec.task);
}

RecoveryReport recovery_report(const SearchTrace& trace, const SelectionReport& selection,
                               const SyntheticSpec& spec, double runtime_seconds) {
  RecoveryReport report;
  report.d_star = selection.d_star;
  report.d_star_correct =
      selection.d_star == static_cast<int>(spec.support.size());
  report.runtime_seconds = runtime_seconds;

  std::vector<int> truth(spec.support);
  std::sort(truth.begin(), truth.end());
  for (const auto& selected : selection.s0)
    if (selected.model() == truth) report.support_recovered = true;

  double q_min = trace.levels.front().q_hat;
  int argmin = trace.levels.front().d;
  for (const auto& level : trace.levels) {
    if (level.q_hat < q_min) {
      q_min = level.q_hat;
      argmin = level.d;
    }
    if (level.d == static_cast<int>(spec.support.size()))
      report.q_hat_at_true_d = level.q_hat;
  }
  report.curve_argmin_d = argmin;
  return report;
}

nlohmann::ordered_json RecoveryReport::to_json() const {
  nlohmann::ordered_json j;
  j["support_recovered"] = support_recovered;
  j["d_star"] = d_star;
  j["d_star_correct"] = d_star_correct;
  j["curve_argmin_d"] = curve_argmin_d;
  j["q_hat_at_true_d"] = q_hat_at_true_d;
  j["runtime_seconds"] = runtime_seconds;
  return j;
}

}  // namespace paranet
