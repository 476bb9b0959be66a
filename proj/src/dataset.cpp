#include "paranet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "paranet/rng.hpp"

namespace paranet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace and quotes
    auto begin = cell.find_first_not_of(" \t\r\"");
    auto end = cell.find_last_not_of(" \t\r\"");
    cells.push_back(begin == std::string::npos ? std::string{}
                                               : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

void Dataset::validate() const {
  if (x.rows() != y.size())
    throw std::invalid_argument("dataset: x rows and y length differ");
  if (x.rows() < 1 || x.cols() < 1)
    throw std::invalid_argument("dataset: empty matrix");
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument("dataset: non-finite values");
  if (static_cast<int>(feature_names.size()) != p())
    throw std::invalid_argument("dataset: feature name count mismatch");
  std::set<std::string> unique(feature_names.begin(), feature_names.end());
  if (static_cast<int>(unique.size()) != p())
    throw std::invalid_argument("dataset: duplicate feature names");
  if (task == Task::binary) {
    bool saw0 = false, saw1 = false;
    for (int i = 0; i < n(); ++i) {
      if (y[i] == 0.0) saw0 = true;
      else if (y[i] == 1.0) saw1 = true;
      else throw std::invalid_argument("dataset: non-binary response");
    }
    if (!saw0 || !saw1)
      throw std::invalid_argument("dataset: single-class binary response");
  }
}

std::vector<int> Dataset::class_labels() const {
  if (task != Task::binary)
    throw std::logic_error("class_labels: not a binary task");
  std::vector<int> labels(n());
  for (int i = 0; i < n(); ++i) labels[i] = y[i] == 1.0 ? 1 : 0;
  return labels;
}

Dataset load_dataset(const std::string& path, const std::string& response_column,
                     Task task, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty file: " + path);
  std::vector<std::string> header = split_csv_line(line);

  int response_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == response_column) response_idx = static_cast<int>(j);
  if (response_idx < 0)
    throw std::runtime_error("response column not found: " + response_column);

  const int p = static_cast<int>(header.size()) - 1;
  if (p < 1) throw std::runtime_error("no covariate columns in " + path);

  std::vector<std::vector<double>> rows;
  std::vector<double> response;
  std::vector<std::vector<bool>> missing_mask;
  bool any_missing = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " cells, got " + std::to_string(cells.size()));
    std::vector<double> row(p);
    std::vector<bool> miss(p, false);
    int jx = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const bool is_response = static_cast<int>(j) == response_idx;
      double value = 0.0;
      if (cells[j] == options.missing_token) {
        if (is_response || options.policy == MissingPolicy::reject)
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": missing value in column " + header[j]);
        miss[jx] = true;
        any_missing = true;
      } else if (!parse_double(cells[j], value)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric cell '" + cells[j] + "'");
      }
      if (is_response) response.push_back(value);
      else { row[jx] = value; ++jx; }
    }
    rows.push_back(std::move(row));
    missing_mask.push_back(std::move(miss));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);

  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rows[i][j];

  if (any_missing) {  // mean_impute: column means over observed entries
    for (int j = 0; j < p; ++j) {
      double sum = 0.0;
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (!missing_mask[i][j]) { sum += x(i, j); ++count; }
      if (count == 0)
        throw std::runtime_error("column entirely missing: " + header[j]);
      const double mean = sum / count;
      for (int i = 0; i < n; ++i)
        if (missing_mask[i][j]) x(i, j) = mean;
    }
  }

  Dataset ds;
  ds.x = std::move(x);
  ds.y = Eigen::Map<Eigen::VectorXd>(response.data(), n);
  ds.task = task;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<int>(j) != response_idx) ds.feature_names.push_back(header[j]);
  ds.validate();
  return ds;
}

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Task task,
                     std::vector<std::string> feature_names) {
  Dataset ds;
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.task = task;
  if (feature_names.empty()) {
    for (int j = 0; j < ds.p(); ++j) feature_names.push_back("x" + std::to_string(j + 1));
  }
  ds.feature_names = std::move(feature_names);
  ds.validate();
  return ds;
}

long FoldPlan::total_evaluations() const {
  long total = 0;
  for (const auto& rep : repetitions)
    for (const auto& pair : rep) total += static_cast<long>(pair.test.size());
  return total;
}

int FoldPlan::min_train_size() const {
  int best = n;
  for (const auto& rep : repetitions)
    for (const auto& pair : rep)
      best = std::min(best, static_cast<int>(pair.train.size()));
  return best;
}

std::uint64_t FoldPlan::id() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(seed);
  mix(static_cast<std::uint64_t>(n));
  mix(static_cast<std::uint64_t>(m));
  mix(static_cast<std::uint64_t>(k));
  mix(static_cast<std::uint64_t>(mode == CvMode::full_mfold ? 1 : 2));
  mix(static_cast<std::uint64_t>(stratified ? 1 : 0));
  return h;
}

nlohmann::ordered_json FoldPlan::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n"] = n;
  j["m"] = m;
  j["k"] = k;
  j["mode"] = to_string(mode);
  j["stratified"] = stratified;
  auto reps = nlohmann::ordered_json::array();
  for (const auto& rep : repetitions) {
    auto jr = nlohmann::ordered_json::array();
    for (const auto& pair : rep)
      jr.push_back({{"test", pair.test}, {"train", pair.train}});
    reps.push_back(std::move(jr));
  }
  j["repetitions"] = std::move(reps);
  return j;
}

namespace {

std::vector<int> complement_of(const std::vector<int>& test, int n) {
  std::vector<bool> in_test(n, false);
  for (int i : test) in_test[i] = true;
  std::vector<int> train;
  train.reserve(n - test.size());
  for (int i = 0; i < n; ++i)
    if (!in_test[i]) train.push_back(i);
  return train;
}

// Deals shuffled indices of one group to the currently least-loaded fold;
// ties go to the smaller fold index. Keeps fold sizes within one of each
// other and spreads every class across folds.
void deal_to_folds(const std::vector<int>& members, std::vector<std::vector<int>>& folds) {
  for (int idx : members) {
    std::size_t target = 0;
    for (std::size_t f = 1; f < folds.size(); ++f)
      if (folds[f].size() < folds[target].size()) target = f;
    folds[target].push_back(idx);
  }
}

}  // namespace

FoldPlan make_fold_plan(int n, int m, int k, CvMode mode, std::uint64_t seed,
                        const std::vector<int>& class_labels) {
  if (m < 2) throw std::invalid_argument("make_fold_plan: m must be >= 2");
  if (n / m < 1) throw std::invalid_argument("make_fold_plan: floor(n/m) must be >= 1");
  if (k < 1) throw std::invalid_argument("make_fold_plan: k must be >= 1");
  const bool stratified = !class_labels.empty();
  if (stratified && static_cast<int>(class_labels.size()) != n)
    throw std::invalid_argument("make_fold_plan: label length mismatch");

  // Groups to deal: one per class when stratified, otherwise everything.
  std::vector<std::vector<int>> groups;
  if (stratified) {
    std::vector<int> distinct(class_labels);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (int label : distinct) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        if (class_labels[i] == label) members.push_back(i);
      groups.push_back(std::move(members));
    }
  } else {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    groups.push_back(std::move(all));
  }

  FoldPlan plan;
  plan.n = n;
  plan.m = m;
  plan.k = k;
  plan.mode = mode;
  plan.seed = seed;
  plan.stratified = stratified;
  plan.repetitions.resize(k);

  const int holdout_size = n / m;
  for (int rep = 0; rep < k; ++rep) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(rep)));
    // Shuffle each group with the repetition's generator (Fisher-Yates).
    std::vector<std::vector<int>> shuffled = groups;
    for (auto& g : shuffled)
      for (std::size_t i = g.size(); i > 1; --i)
        std::swap(g[i - 1], g[rng.uniform_below(i)]);

    if (mode == CvMode::full_mfold) {
      std::vector<std::vector<int>> folds(m);
      for (const auto& g : shuffled) deal_to_folds(g, folds);
      auto& pairs = plan.repetitions[rep];
      pairs.reserve(m);
      for (auto& fold : folds) {
        std::sort(fold.begin(), fold.end());
        FoldPair pair;
        pair.train = complement_of(fold, n);
        pair.test = std::move(fold);
        pairs.push_back(std::move(pair));
      }
    } else {
      // holdout: take the head of the shuffled groups, proportionally per group.
      std::vector<int> test;
      if (stratified) {
        // Largest-remainder allocation of holdout_size across groups.
        std::vector<int> take(shuffled.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        int assigned = 0;
        for (std::size_t g = 0; g < shuffled.size(); ++g) {
          const double exact =
              static_cast<double>(holdout_size) * shuffled[g].size() / n;
          take[g] = std::min<int>(static_cast<int>(exact), shuffled[g].size());
          assigned += take[g];
          remainders.push_back({exact - take[g], g});
        }
        std::sort(remainders.begin(), remainders.end(), [](auto a, auto b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (std::size_t r = 0; assigned < holdout_size && r < remainders.size(); ++r) {
          const std::size_t g = remainders[r].second;
          if (take[g] < static_cast<int>(shuffled[g].size())) { ++take[g]; ++assigned; }
        }
        for (std::size_t g = 0; g < shuffled.size(); ++g)
          test.insert(test.end(), shuffled[g].begin(), shuffled[g].begin() + take[g]);
      } else {
        test.assign(shuffled[0].begin(), shuffled[0].begin() + holdout_size);
      }
      std::sort(test.begin(), test.end());
      FoldPair pair;
      pair.train = complement_of(test, n);
      pair.test = std::move(test);
      plan.repetitions[rep].push_back(std::move(pair));
    }
  }
  return plan;
}

const char* to_string(Task task) {
  return task == Task::continuous ? "continuous" : "binary";
}

const char* to_string(CvMode mode) {
  return mode == CvMode::full_mfold ? "mfold" : "holdout";
}

Task task_from_string(const std::string& s) {
  if (s == "continuous") return Task::continuous;
  if (s == "binary") return Task::binary;
  throw std::invalid_argument("unknown task: " + s);
}

CvMode cv_mode_from_string(const std::string& s) {
  if (s == "mfold" || s == "full_mfold") return CvMode::full_mfold;
  if (s == "holdout") return CvMode::holdout;
  throw std::invalid_argument("unknown cv mode: " + s);
}

}  // namespace paranet
