#include <doctest.h>

#include "paranet/divergence.hpp"
#include "paranet/rng.hpp"

using namespace paranet;

namespace {

Prediction labeled(double value, int label) {
  Prediction p;
  p.value = value;
  p.label = label;
  return p;
}

Prediction plain(double value) {
  Prediction p;
  p.value = value;
  return p;
}

}  // namespace

TEST_CASE("l1 loss vanishes at equality") {
  DivergenceSpec spec;
  spec.kind = DivergenceKind::l1;
  CHECK(loss(spec, plain(3.5), 3.5) == 0.0);
  CHECK(loss(spec, plain(2.0), 3.5) == doctest::Approx(1.5));
}

TEST_CASE("asymmetric classification error charges the configured weight") {
  DivergenceSpec spec;
  spec.kind = DivergenceKind::classification;
  spec.w1 = 2.0;
  spec.w2 = 1.0;
  CHECK(loss(spec, labeled(0.9, 1), 0.0) == 2.0);  // predicted 1, truth 0
  CHECK(loss(spec, labeled(0.1, 0), 1.0) == 1.0);  // predicted 0, truth 1
  CHECK(loss(spec, labeled(0.9, 1), 1.0) == 0.0);
  CHECK(loss(spec, labeled(0.1, 0), 0.0) == 0.0);
}

TEST_CASE("equal weights reduce to the 0-1 error count") {
  DivergenceSpec spec;
  spec.kind = DivergenceKind::classification;
  Rng rng(11);
  double total = 0.0;
  int misclassified = 0;
  for (int i = 0; i < 200; ++i) {
    const int truth = rng.bernoulli(0.5) ? 1 : 0;
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    total += loss(spec, labeled(0.5, label), truth);
    if (truth != label) ++misclassified;
  }
  CHECK(total == doctest::Approx(misclassified));
}

TEST_CASE("positiveness property over random pairs") {
  Rng rng(99);
  DivergenceSpec l1{DivergenceKind::l1};
  DivergenceSpec sq{DivergenceKind::squared};
  DivergenceSpec ce{DivergenceKind::classification, 0.7, 1.3};
  for (int i = 0; i < 500; ++i) {
    const double u = rng.normal();
    double v = rng.normal();
    if (u == v) v += 1.0;
    CHECK(loss(l1, plain(u), v) > 0.0);
    CHECK(loss(sq, plain(u), v) > 0.0);
    CHECK(loss(l1, plain(u), u) == 0.0);
    CHECK(loss(sq, plain(u), u) == 0.0);

    const int truth = rng.bernoulli(0.5) ? 1 : 0;
    CHECK(loss(ce, labeled(0.5, 1 - truth), truth) > 0.0);
    CHECK(loss(ce, labeled(0.5, truth), truth) == 0.0);
  }
}

TEST_CASE("classification weights scale linearly") {
  Rng rng(123);
  for (int i = 0; i < 100; ++i) {
    const double w1 = rng.uniform01() + 0.1;
    const double w2 = rng.uniform01() + 0.1;
    const double c = rng.uniform01() * 5.0 + 0.1;
    DivergenceSpec base{DivergenceKind::classification, w1, w2};
    DivergenceSpec scaled{DivergenceKind::classification, c * w1, c * w2};
    const int truth = rng.bernoulli(0.5) ? 1 : 0;
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    CHECK(loss(scaled, labeled(0.5, label), truth) ==
          doctest::Approx(c * loss(base, labeled(0.5, label), truth)));
  }
}

TEST_CASE("classification input validation") {
  DivergenceSpec spec;
  spec.kind = DivergenceKind::classification;
  CHECK_THROWS_AS(loss(spec, labeled(0.5, 1), 0.7), std::invalid_argument);
  CHECK_THROWS_AS(loss(spec, plain(0.5), 1.0), std::invalid_argument);
}

TEST_CASE("divergence spec parsing and validation") {
  CHECK(DivergenceSpec::parse("ce").kind == DivergenceKind::classification);
  CHECK(DivergenceSpec::parse("l1").kind == DivergenceKind::l1);
  CHECK(DivergenceSpec::parse("sq").kind == DivergenceKind::squared);
  CHECK_THROWS_AS(DivergenceSpec::parse("huber"), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::parse("ce", -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DivergenceSpec::parse("ce", 0.0, 0.0), std::invalid_argument);
  CHECK_NOTHROW(DivergenceSpec::parse("ce", 0.0, 2.0));
}
