#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace paranet {

enum class EstimatorKind { linear, logistic };

struct FitOptions {
  double ridge = 1e-4;  // penalty on the weighted normal matrix (logistic only)
  int max_iter = 25;
  double tol = 1e-6;    // stop when max |coefficient change| falls below
};

/// Fitted coefficients for one candidate model.
/// values layout: [intercept] followed by one coefficient per model index,
/// in ascending index order. model may be empty for free-standing fits.
struct CoefVector {
  std::vector<int> model;
  Eigen::VectorXd values;
  EstimatorKind kind = EstimatorKind::linear;
  bool has_intercept = true;
  bool converged = true;
  int iterations = 0;

  nlohmann::ordered_json to_json(const std::vector<std::string>& names) const;
};

struct Prediction {
  double value = 0.0;             // point prediction, or probability for logistic
  std::optional<int> label;       // 0/1, present for binary predictions only
};

/// Ordinary least squares on the given design (columns already restricted
/// to the candidate model). Rank-deficient designs get the minimum-norm
/// solution.
CoefVector fit_linear(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      bool intercept = true);

/// Ridge-penalized logistic regression via iteratively reweighted least
/// squares; the penalty applies to the whole coefficient vector, so the
/// system stays solvable under complete separation. Newton steps are
/// halved whenever the penalized objective would increase.
/// objective_trace, when given, receives the objective after each iteration.
CoefVector fit_logistic(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                        const FitOptions& options = {}, bool intercept = true,
                        std::vector<double>* objective_trace = nullptr);

/// Numerically stable logistic function exp(t) / (1 + exp(t)).
double logistic(double t);

/// Penalized logistic objective: -loglik + ridge/2 * |beta|^2.
double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double ridge);

/// Prediction at a covariate row. When coef.model is non-empty, x0 is the
/// full p-length row and the model's columns are extracted; when empty,
/// x0 must already be restricted to the fitted columns.
Prediction predict(const CoefVector& coef, const Eigen::RowVectorXd& x0,
                   double threshold = 0.5);

}  // namespace paranet
