#include "paranet/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace paranet {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x, bool intercept) {
  if (!intercept) return x;
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument("fit: non-finite inputs");
  if (x.rows() != y.size())
    throw std::invalid_argument("fit: row count mismatch");
  if (x.rows() < 1) throw std::invalid_argument("fit: empty training set");
}

}  // namespace

nlohmann::ordered_json CoefVector::to_json(const std::vector<std::string>& names) const {
  nlohmann::ordered_json j;
  j["indices"] = model;
  auto jn = nlohmann::ordered_json::array();
  for (int idx : model)
    jn.push_back(idx >= 0 && idx < static_cast<int>(names.size())
                     ? names[idx]
                     : "x" + std::to_string(idx));
  j["names"] = std::move(jn);
  j["kind"] = kind == EstimatorKind::linear ? "linear" : "logistic";
  const int offset = has_intercept ? 1 : 0;
  if (has_intercept) j["intercept"] = values[0];
  std::vector<double> coefs(values.data() + offset, values.data() + values.size());
  j["coefficients"] = coefs;
  j["converged"] = converged;
  j["iterations"] = iterations;
  return j;
}

CoefVector fit_linear(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      bool intercept) {
  check_finite(x_train, y_train);
  const Eigen::MatrixXd design = with_intercept(x_train, intercept);
  // Complete orthogonal decomposition yields the minimum-norm least-squares
  // solution on rank-deficient designs.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  CoefVector c;
  c.values = cod.solve(y_train);
  c.kind = EstimatorKind::linear;
  c.has_intercept = intercept;
  c.converged = true;
  c.iterations = 1;
  return c;
}

double logistic(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta, double ridge) {
  double nll = 0.0;
  const Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // -log L = sum log(1 + exp(eta)) - y*eta, computed stably
    const double t = eta[i];
    const double log1pe = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    nll += log1pe - y[i] * t;
  }
  return nll + 0.5 * ridge * beta.squaredNorm();
}

CoefVector fit_logistic(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                        const FitOptions& options, bool intercept,
                        std::vector<double>* objective_trace) {
  check_finite(x_train, y_train);
  if (options.ridge < 0.0) throw std::invalid_argument("fit_logistic: ridge < 0");
  bool saw0 = false, saw1 = false;
  for (Eigen::Index i = 0; i < y_train.size(); ++i) {
    if (y_train[i] == 0.0) saw0 = true;
    else if (y_train[i] == 1.0) saw1 = true;
    else throw std::invalid_argument("fit_logistic: response not in {0,1}");
  }
  if (options.ridge == 0.0 && (!saw0 || !saw1))
    throw std::invalid_argument("fit_logistic: single-class response with ridge = 0");

  const Eigen::MatrixXd design = with_intercept(x_train, intercept);
  const Eigen::Index cols = design.cols();
  const Eigen::Index rows = design.rows();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
  double objective = logistic_objective(design, y_train, beta, options.ridge);
  if (objective_trace) objective_trace->push_back(objective);

  Eigen::VectorXd eta(rows), mu(rows), w(rows);
  Eigen::MatrixXd hessian(cols, cols);
  CoefVector c;
  c.kind = EstimatorKind::logistic;
  c.has_intercept = intercept;
  c.converged = false;

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    eta.noalias() = design * beta;
    mu = eta.unaryExpr([](double t) { return logistic(t); });
    w = mu.array() * (1.0 - mu.array());

    // Newton step on the penalized objective:
    //   (X'WX + ridge I) delta = X'(y - mu) - ridge beta
    Eigen::VectorXd grad = design.transpose() * (y_train - mu) - options.ridge * beta;
    hessian.setZero();
    hessian.selfadjointView<Eigen::Lower>().rankUpdate(
        design.transpose() * w.cwiseSqrt().asDiagonal());
    hessian.diagonal().array() += options.ridge;
    Eigen::VectorXd delta =
        hessian.selfadjointView<Eigen::Lower>().llt().solve(grad);

    // Step-halving keeps the objective non-increasing.
    double step = 1.0;
    Eigen::VectorXd candidate = beta + delta;
    double cand_obj = logistic_objective(design, y_train, candidate, options.ridge);
    for (int h = 0; h < 30 && !(cand_obj <= objective); ++h) {
      step *= 0.5;
      candidate = beta + step * delta;
      cand_obj = logistic_objective(design, y_train, candidate, options.ridge);
    }
    if (!(cand_obj <= objective)) { ++iter; break; }  // no usable step

    const double change = (step * delta).cwiseAbs().maxCoeff();
    beta = candidate;
    objective = cand_obj;
    if (objective_trace) objective_trace->push_back(objective);
    if (change < options.tol) {
      c.converged = true;
      ++iter;
      break;
    }
  }
  if (!beta.allFinite())
    throw std::runtime_error("fit_logistic: diverged to non-finite coefficients");
  c.values = std::move(beta);
  c.iterations = iter;
  return c;
}

Prediction predict(const CoefVector& coef, const Eigen::RowVectorXd& x0,
                   double threshold) {
  if (!x0.allFinite()) throw std::invalid_argument("predict: non-finite covariates");
  const int offset = coef.has_intercept ? 1 : 0;
  const int m = static_cast<int>(coef.values.size()) - offset;
  double t = coef.has_intercept ? coef.values[0] : 0.0;
  if (!coef.model.empty()) {
    if (static_cast<int>(coef.model.size()) != m)
      throw std::invalid_argument("predict: model/coefficient size mismatch");
    for (int j = 0; j < m; ++j) t += coef.values[offset + j] * x0[coef.model[j]];
  } else {
    if (x0.size() != m)
      throw std::invalid_argument("predict: restricted row length mismatch");
    for (int j = 0; j < m; ++j) t += coef.values[offset + j] * x0[j];
  }
  Prediction pred;
  if (coef.kind == EstimatorKind::logistic) {
    pred.value = logistic(t);
    pred.label = pred.value >= threshold ? 1 : 0;
  } else {
    pred.value = t;
  }
  return pred;
}

}  // namespace paranet
