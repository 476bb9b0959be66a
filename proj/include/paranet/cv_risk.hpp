#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "paranet/dataset.hpp"
#include "paranet/divergence.hpp"
#include "paranet/estimators.hpp"

namespace paranet {

/// How candidate models are fitted inside cross-validation.
struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::linear;
  FitOptions fit;
  double threshold = 0.5;  // label cut for binary predictions
  bool intercept = true;

  static EstimatorKind default_kind(Task task) {
    return task == Task::binary ? EstimatorKind::logistic : EstimatorKind::linear;
  }
};

/// Cross-validated risk of one candidate model, with the per-evaluation
/// losses retained for the downstream significance tests.
struct RiskEstimate {
  std::vector<int> model;
  double d_hat = 0.0;
  std::vector<double> losses;     // one entry per held-out evaluation, plan order
  long evaluations = 0;
  std::optional<long> misclass_count;  // classification divergence only
  int fit_failures = 0;           // folds served by the fallback fit

  /// Errors in the binomial-test sense: evaluations with loss > 0.
  long positive_loss_count() const;

  nlohmann::ordered_json to_json() const;
};

/// Scores one model under the plan: fit on each training split restricted
/// to the model's columns, predict each held-out row, average the losses.
/// A fold whose fit throws falls back to the training-majority class
/// (binary) or the training mean (continuous); if every fold fails the
/// model is unestimable and an exception is raised.
RiskEstimate estimate_risk(const Dataset& dataset, const std::vector<int>& model,
                           const FoldPlan& plan, const EstimatorConfig& estimator,
                           const DivergenceSpec& divergence);

/// Thread-safe memo of RiskEstimates keyed by model for one fixed plan.
/// Concurrent get_or_compute calls for the same model compute it once;
/// results are deterministic because estimate_risk is pure.
class RiskCache {
 public:
  explicit RiskCache(std::uint64_t plan_id) : plan_id_(plan_id) {}

  using Compute = std::function<RiskEstimate(const std::vector<int>&)>;

  std::shared_ptr<const RiskEstimate> get_or_compute(const std::vector<int>& model,
                                                     const Compute& compute);

  std::uint64_t plan_id() const { return plan_id_; }
  std::size_t size() const;

 private:
  struct Slot {
    std::once_flag once;
    std::shared_ptr<const RiskEstimate> value;
  };

  std::uint64_t plan_id_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;

  static std::string key_of(const std::vector<int>& model);
};

}  // namespace paranet
