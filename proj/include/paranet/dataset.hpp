#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace paranet {

enum class Task { continuous, binary };

enum class MissingPolicy { reject, mean_impute };

struct CsvOptions {
  std::string missing_token = "NA";
  MissingPolicy policy = MissingPolicy::reject;
};

/// Immutable tabular dataset: n rows of p covariates plus a response.
/// A constant column is prepended at fit time when has_intercept is set,
/// it is never stored in x.
struct Dataset {
  Eigen::MatrixXd x;                       // n x p
  Eigen::VectorXd y;                       // length n
  Task task = Task::continuous;
  std::vector<std::string> feature_names;  // p labels, unique
  bool has_intercept = true;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }

  /// Throws std::invalid_argument on any invariant violation
  /// (non-finite values, non-binary response, duplicate names, ...).
  void validate() const;

  /// 0/1 labels for stratification; only valid for binary tasks.
  std::vector<int> class_labels() const;
};

/// Reads a CSV file (header row, '.' decimal point) and splits off the
/// named response column. Column order of x is preserved from the file.
Dataset load_dataset(const std::string& path, const std::string& response_column,
                     Task task, const CsvOptions& options = {});

/// Builds a Dataset from in-memory arrays and validates it.
Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
                     std::vector<std::string> feature_names = {});

enum class CvMode { full_mfold, holdout };

struct FoldPair {
  std::vector<int> test;
  std::vector<int> train;
};

/// Deterministic train/test partitions for repeated cross-validation.
/// full_mfold: each repetition partitions {0..n-1} into m folds.
/// holdout: each repetition draws a single test set of floor(n/m) rows.
struct FoldPlan {
  int n = 0;
  int m = 0;
  int k = 0;
  CvMode mode = CvMode::full_mfold;
  std::uint64_t seed = 0;
  bool stratified = false;
  std::vector<std::vector<FoldPair>> repetitions;  // k entries

  /// Total number of held-out evaluations (the risk denominator).
  long total_evaluations() const;

  /// Smallest training-set size over all pairs.
  int min_train_size() const;

  /// Stable identity for memoization; equal parameters give equal ids.
  std::uint64_t id() const;

  nlohmann::ordered_json to_json() const;
};

/// Builds a FoldPlan. When class_labels is non-empty the folds are
/// stratified: each class is dealt separately so no fold hoards one class.
/// Identical arguments always produce an identical plan.
FoldPlan make_fold_plan(int n, int m, int k, CvMode mode, std::uint64_t seed,
                        const std::vector<int>& class_labels = {});

const char* to_string(Task task);
const char* to_string(CvMode mode);
Task task_from_string(const std::string& s);
CvMode cv_mode_from_string(const std::string& s);

}  // namespace paranet
