#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "paranet/dataset.hpp"
#include "paranet/rng.hpp"

using namespace paranet;

namespace {

struct TempCsv {
  std::filesystem::path path;
  explicit TempCsv(const std::string& content) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("paranet_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << content;
  }
  ~TempCsv() { std::filesystem::remove(path); }
};

void check_pairs(const FoldPlan& plan) {
  for (const auto& rep : plan.repetitions) {
    for (const auto& pair : rep) {
      std::set<int> test(pair.test.begin(), pair.test.end());
      std::set<int> train(pair.train.begin(), pair.train.end());
      CHECK(test.size() == pair.test.size());
      CHECK(train.size() == pair.train.size());
      for (int i : test) CHECK(train.count(i) == 0);
      CHECK(static_cast<int>(test.size() + train.size()) == plan.n);
    }
  }
}

}  // namespace

TEST_CASE("load_dataset parses a small binary csv") {
  TempCsv file("g1,g2,y\n1,2,0\n3,4,1\n5,6,0\n");
  Dataset ds = load_dataset(file.path.string(), "y", Task::binary);
  CHECK(ds.n() == 3);
  CHECK(ds.p() == 2);
  CHECK(ds.y[0] == 0.0);
  CHECK(ds.y[1] == 1.0);
  CHECK(ds.y[2] == 0.0);
  CHECK(ds.x(1, 0) == 3.0);
  CHECK(ds.x(2, 1) == 6.0);
  CHECK(ds.feature_names == std::vector<std::string>{"g1", "g2"});
}

TEST_CASE("load_dataset keeps column order with the response in the middle") {
  TempCsv file("a,y,b\n1,0,2\n3,1,4\n");
  Dataset ds = load_dataset(file.path.string(), "y", Task::binary);
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.x(0, 0) == 1.0);
  CHECK(ds.x(0, 1) == 2.0);
}

TEST_CASE("load_dataset rejects a non-binary response under the binary task") {
  TempCsv file("g1,g2,y\n1,2,0\n3,4,2\n5,6,0\n");
  CHECK_THROWS_WITH_AS(load_dataset(file.path.string(), "y", Task::binary),
                       doctest::Contains("non-binary"), std::invalid_argument);
}

TEST_CASE("load_dataset error paths") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/zzz.csv", "y", Task::binary),
                    std::runtime_error);
  }
  SUBCASE("absent response column") {
    TempCsv file("a,b\n1,2\n");
    CHECK_THROWS_WITH_AS(load_dataset(file.path.string(), "y", Task::continuous),
                         doctest::Contains("response column"), std::runtime_error);
  }
  SUBCASE("non-numeric cell") {
    TempCsv file("a,y\nfoo,0\n1,1\n");
    CHECK_THROWS_WITH_AS(load_dataset(file.path.string(), "y", Task::binary),
                         doctest::Contains("non-numeric"), std::runtime_error);
  }
  SUBCASE("single-class binary response") {
    TempCsv file("a,y\n1,1\n2,1\n");
    CHECK_THROWS_WITH_AS(load_dataset(file.path.string(), "y", Task::binary),
                         doctest::Contains("single-class"), std::invalid_argument);
  }
  SUBCASE("duplicate feature names") {
    TempCsv file("a,a,y\n1,2,0\n3,4,1\n");
    CHECK_THROWS_AS(load_dataset(file.path.string(), "y", Task::binary),
                    std::invalid_argument);
  }
  SUBCASE("ragged row") {
    TempCsv file("a,y\n1,0\n1\n");
    CHECK_THROWS_AS(load_dataset(file.path.string(), "y", Task::binary),
                    std::runtime_error);
  }
}

TEST_CASE("missing values: reject by default, mean-impute on request") {
  TempCsv file("a,b,y\n1,NA,0\n3,10,1\n5,20,1\n");
  CHECK_THROWS_WITH_AS(load_dataset(file.path.string(), "y", Task::binary),
                       doctest::Contains("missing"), std::runtime_error);

  CsvOptions options;
  options.policy = MissingPolicy::mean_impute;
  Dataset ds = load_dataset(file.path.string(), "y", Task::binary, options);
  CHECK(ds.x(0, 1) == doctest::Approx(15.0));  // mean of observed 10, 20

  SUBCASE("missing response still rejected") {
    TempCsv bad("a,y\n1,NA\n2,1\n");
    CHECK_THROWS_AS(load_dataset(bad.path.string(), "y", Task::binary, options),
                    std::runtime_error);
  }
  SUBCASE("custom missing token") {
    TempCsv custom("a,y\n?,0\n2,1\n");
    CsvOptions opt2;
    opt2.missing_token = "?";
    opt2.policy = MissingPolicy::mean_impute;
    Dataset ds2 = load_dataset(custom.path.string(), "y", Task::binary, opt2);
    CHECK(ds2.x(0, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("make_fold_plan holdout sizes") {
  FoldPlan plan = make_fold_plan(10, 5, 1, CvMode::holdout, 7);
  REQUIRE(plan.repetitions.size() == 1);
  REQUIRE(plan.repetitions[0].size() == 1);
  CHECK(plan.repetitions[0][0].test.size() == 2);  // floor(10/5)
  CHECK(plan.repetitions[0][0].train.size() == 8);
  check_pairs(plan);
}

TEST_CASE("make_fold_plan leave-one-out partition") {
  FoldPlan plan = make_fold_plan(10, 10, 3, CvMode::full_mfold, 3);
  REQUIRE(plan.repetitions.size() == 3);
  for (const auto& rep : plan.repetitions) {
    REQUIRE(rep.size() == 10);
    std::set<int> all;
    for (const auto& pair : rep) {
      CHECK(pair.test.size() == 1);
      all.insert(pair.test.begin(), pair.test.end());
    }
    CHECK(all.size() == 10);
  }
  check_pairs(plan);
}

TEST_CASE("make_fold_plan tenfold sizes on n=38") {
  std::vector<int> labels(38, 0);
  for (int i = 0; i < 11; ++i) labels[i * 3] = 1;  // 11 of one class
  for (bool stratified : {false, true}) {
    FoldPlan plan = make_fold_plan(38, 10, 10, CvMode::full_mfold, 42,
                                   stratified ? labels : std::vector<int>{});
    for (const auto& rep : plan.repetitions) {
      REQUIRE(rep.size() == 10);
      std::set<int> all;
      for (const auto& pair : rep) {
        CHECK((pair.test.size() == 3 || pair.test.size() == 4));
        all.insert(pair.test.begin(), pair.test.end());
      }
      CHECK(all.size() == 38);  // exact partition
    }
    check_pairs(plan);
  }
}

TEST_CASE("stratified folds spread both classes over training sets") {
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i < 9 ? 1 : 0;
  FoldPlan plan = make_fold_plan(30, 5, 4, CvMode::full_mfold, 11, labels);
  for (const auto& rep : plan.repetitions)
    for (const auto& pair : rep) {
      int ones = 0;
      for (int i : pair.train) ones += labels[i];
      CHECK(ones > 0);
      CHECK(ones < static_cast<int>(pair.train.size()));
    }

  SUBCASE("stratified holdout keeps proportions approximately") {
    FoldPlan hold = make_fold_plan(30, 5, 6, CvMode::holdout, 11, labels);
    for (const auto& rep : hold.repetitions) {
      REQUIRE(rep.size() == 1);
      CHECK(rep[0].test.size() == 6);
      int ones = 0;
      for (int i : rep[0].test) ones += labels[i];
      CHECK(ones >= 1);  // 9/30 of 6 ~ 1.8
      CHECK(ones <= 3);
    }
  }
}

TEST_CASE("fold plans are deterministic and seed-sensitive") {
  Rng rng(2024);
  for (int round = 0; round < 25; ++round) {
    const int m = 2 + static_cast<int>(rng.uniform_below(6));
    const int n = 2 * m + static_cast<int>(rng.uniform_below(40));
    const int k = 1 + static_cast<int>(rng.uniform_below(4));
    const auto mode = rng.bernoulli(0.5) ? CvMode::full_mfold : CvMode::holdout;
    const std::uint64_t seed = rng.next_u64();

    FoldPlan a = make_fold_plan(n, m, k, mode, seed);
    FoldPlan b = make_fold_plan(n, m, k, mode, seed);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.id() == b.id());
    check_pairs(a);

    if (mode == CvMode::full_mfold) {  // partition property
      for (const auto& rep : a.repetitions) {
        std::vector<int> count(n, 0);
        for (const auto& pair : rep)
          for (int i : pair.test) ++count[i];
        for (int c : count) CHECK(c == 1);
      }
    } else {
      for (const auto& rep : a.repetitions) {
        REQUIRE(rep.size() == 1);
        CHECK(static_cast<int>(rep[0].test.size()) == n / m);
      }
    }

    FoldPlan c = make_fold_plan(n, m, k, mode, seed + 1);
    CHECK(c.id() != a.id());
  }
}

TEST_CASE("make_fold_plan parameter bounds") {
  CHECK_THROWS_AS(make_fold_plan(10, 1, 1, CvMode::holdout, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_fold_plan(3, 5, 1, CvMode::holdout, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_fold_plan(10, 5, 0, CvMode::holdout, 0), std::invalid_argument);
}

TEST_CASE("fold plan json carries the audit fields") {
  FoldPlan plan = make_fold_plan(8, 4, 2, CvMode::full_mfold, 99);
  auto j = plan.to_json();
  CHECK(j["seed"] == 99);
  CHECK(j["m"] == 4);
  CHECK(j["k"] == 2);
  CHECK(j["mode"] == "mfold");
  CHECK(j["repetitions"].size() == 2);
  int min_index = 8;  // indices are zero-based
  for (const auto& rep : j["repetitions"])
    for (const auto& pair : rep)
      for (int i : pair["test"].get<std::vector<int>>())
        min_index = std::min(min_index, i);
  CHECK(min_index == 0);
}

TEST_CASE("dataset validation rejects non-finite values") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  CHECK_THROWS_AS(make_dataset(x, y, Task::binary), std::invalid_argument);
}
