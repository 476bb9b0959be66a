#include "paranet/cv_risk.hpp"

#include <algorithm>
#include <stdexcept>

namespace paranet {

long RiskEstimate::positive_loss_count() const {
  return std::count_if(losses.begin(), losses.end(),
                       [](double l) { return l > 0.0; });
}

nlohmann::ordered_json RiskEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["d_hat"] = d_hat;
  j["evaluations"] = evaluations;
  if (misclass_count) j["misclass_count"] = *misclass_count;
  j["fit_failures"] = fit_failures;
  return j;
}

namespace {

// Constant-prediction fallback for folds whose fit fails: training-majority
// class for binary tasks, training mean otherwise.
Prediction fallback_prediction(const Eigen::VectorXd& y_train, Task task,
                               double threshold) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y_train.size(); ++i) sum += y_train[i];
  const double mean = sum / static_cast<double>(y_train.size());
  Prediction pred;
  if (task == Task::binary) {
    pred.value = mean;
    pred.label = mean >= threshold ? 1 : 0;
  } else {
    pred.value = mean;
  }
  return pred;
}

}  // namespace

RiskEstimate estimate_risk(const Dataset& dataset, const std::vector<int>& model,
                           const FoldPlan& plan, const EstimatorConfig& estimator,
                           const DivergenceSpec& divergence) {
  if (model.empty()) throw std::invalid_argument("estimate_risk: empty model");
  for (int idx : model)
    if (idx < 0 || idx >= dataset.p())
      throw std::invalid_argument("estimate_risk: covariate index out of range");
  if (!std::is_sorted(model.begin(), model.end()) ||
      std::adjacent_find(model.begin(), model.end()) != model.end())
    throw std::invalid_argument("estimate_risk: model must be sorted and duplicate-free");

  const int d = static_cast<int>(model.size());
  RiskEstimate est;
  est.model = model;
  est.losses.reserve(plan.total_evaluations());
  long misclass = 0;
  int attempted_folds = 0;

  Eigen::MatrixXd x_train;
  Eigen::VectorXd y_train;
  Eigen::RowVectorXd row(d);

  for (const auto& rep : plan.repetitions) {
    for (const auto& pair : rep) {
      ++attempted_folds;
      const int n_train = static_cast<int>(pair.train.size());
      x_train.resize(n_train, d);
      y_train.resize(n_train);
      for (int i = 0; i < n_train; ++i) {
        const int r = pair.train[i];
        for (int j = 0; j < d; ++j) x_train(i, j) = dataset.x(r, model[j]);
        y_train[i] = dataset.y[r];
      }

      CoefVector coef;
      bool fitted = true;
      try {
        if (estimator.kind == EstimatorKind::logistic)
          coef = fit_logistic(x_train, y_train, estimator.fit, estimator.intercept);
        else
          coef = fit_linear(x_train, y_train, estimator.intercept);
      } catch (const std::exception&) {
        fitted = false;
        ++est.fit_failures;
      }

      Prediction fallback;
      if (!fitted)
        fallback = fallback_prediction(y_train, dataset.task, estimator.threshold);

      for (int t : pair.test) {
        Prediction pred;
        if (fitted) {
          for (int j = 0; j < d; ++j) row[j] = dataset.x(t, model[j]);
          pred = predict(coef, row, estimator.threshold);
          if (estimator.kind == EstimatorKind::linear && dataset.task == Task::binary)
            pred.label = pred.value >= estimator.threshold ? 1 : 0;
        } else {
          pred = fallback;
        }
        const double truth = dataset.y[t];
        est.losses.push_back(loss(divergence, pred, truth));
        if (divergence.kind == DivergenceKind::classification &&
            pred.label && *pred.label != static_cast<int>(truth))
          ++misclass;
      }
    }
  }

  if (est.fit_failures == attempted_folds)
    throw std::runtime_error("estimate_risk: unestimable model (every fold fit failed)");

  est.evaluations = static_cast<long>(est.losses.size());
  double sum = 0.0;
  for (double l : est.losses) sum += l;
  est.d_hat = sum / static_cast<double>(est.evaluations);
  if (divergence.kind == DivergenceKind::classification) est.misclass_count = misclass;
  return est;
}

std::string RiskCache::key_of(const std::vector<int>& model) {
  std::string key;
  key.reserve(model.size() * sizeof(int));
  for (int idx : model)
    key.append(reinterpret_cast<const char*>(&idx), sizeof(int));
  return key;
}

std::shared_ptr<const RiskEstimate> RiskCache::get_or_compute(
    const std::vector<int>& model, const Compute& compute) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& entry = slots_[key_of(model)];
    if (!entry) entry = std::make_shared<Slot>();
    slot = entry;
  }
  std::call_once(slot->once, [&] {
    slot->value = std::make_shared<const RiskEstimate>(compute(model));
  });
  return slot->value;
}

std::size_t RiskCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return slots_.size();
}

}  // namespace paranet
