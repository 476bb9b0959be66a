#include "paranet/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace paranet {

void TestConfig::validate() const {
  if (!(family_level > 0.0 && family_level < 1.0))
    throw std::invalid_argument("test config: family level must lie in (0,1)");
}

TestKind TestConfig::resolve(DivergenceKind divergence) const {
  if (!auto_kind) return kind;
  return divergence == DivergenceKind::classification ? TestKind::binomial_proportions
                                                      : TestKind::mann_whitney;
}

nlohmann::ordered_json TestConfig::to_json() const {
  nlohmann::ordered_json j;
  j["family_level"] = family_level;
  j["correction"] = correction == Correction::bonferroni ? "bonferroni" : "none";
  j["test"] = auto_kind ? "auto"
              : kind == TestKind::binomial_proportions ? "binomial"
                                                       : "mw";
  return j;
}

TestConfig TestConfig::from_json(const nlohmann::json& j) {
  TestConfig tc;
  tc.family_level = j.at("family_level").get<double>();
  tc.correction = j.at("correction").get<std::string>() == "none" ? Correction::none
                                                                  : Correction::bonferroni;
  const std::string t = j.at("test").get<std::string>();
  tc.auto_kind = t == "auto";
  if (t == "binomial") tc.kind = TestKind::binomial_proportions;
  if (t == "mw") tc.kind = TestKind::mann_whitney;
  tc.validate();
  return tc;
}

namespace {

double log_choose(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

long errors_of(std::span<const double> losses) {
  long count = 0;
  for (double l : losses)
    if (l > 0.0) ++count;
  return count;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TestResult binomial_improvement_test(std::span<const double> losses_a,
                                     std::span<const double> losses_b, double level) {
  const long na = static_cast<long>(losses_a.size());
  const long nb = static_cast<long>(losses_b.size());
  TestResult result;
  if (na == 0 || nb == 0) return result;  // nothing to compare
  const long ka = errors_of(losses_a);
  const long kb = errors_of(losses_b);
  const long total = ka + kb;
  const long n = na + nb;

  // Conditional on the error total, X_a is hypergeometric; the one-sided
  // p-value is the lower tail P(X_a <= ka).
  const double log_denominator = log_choose(n, total);
  double p = 0.0;
  const long lo = std::max(0L, total - nb);
  for (long x = lo; x <= ka; ++x)
    p += std::exp(log_choose(na, x) + log_choose(nb, total - x) - log_denominator);
  result.p_value = std::min(1.0, p);
  result.reject = result.p_value <= level;
  return result;
}

double mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  // U = R_a - na(na+1)/2 with midranks; computed in doubled-rank units so
  // ties stay exact.
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(na + nb);
  for (double v : a) pooled.push_back({v, 0});
  for (double v : b) pooled.push_back({v, 1});
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  long long doubled_rank_sum_a = 0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1].first == pooled[i].first) ++j;
    const long long doubled_midrank =
        static_cast<long long>(i + 1) + static_cast<long long>(j + 1);
    for (std::size_t t = i; t <= j; ++t)
      if (pooled[t].second == 0) doubled_rank_sum_a += doubled_midrank;
    i = j + 1;
  }
  const long long doubled_u =
      doubled_rank_sum_a - static_cast<long long>(na) * (static_cast<long long>(na) + 1);
  return static_cast<double>(doubled_u) / 2.0;
}

namespace {

// Exact conditional distribution: enumerate every assignment of the pooled
// values to group a and count U values not larger than the observed one.
double mann_whitney_exact_p(const std::vector<long long>& doubled_ranks,
                            std::size_t na, long long doubled_u_obs) {
  const std::size_t n = doubled_ranks.size();
  const long long base = static_cast<long long>(na) * (static_cast<long long>(na) + 1);
  const long long target = doubled_u_obs + base;  // compare doubled rank sums
  unsigned long long count_le = 0, count_all = 0;

  std::vector<std::size_t> picks(na);
  for (std::size_t i = 0; i < na; ++i) picks[i] = i;
  while (true) {
    long long sum = 0;
    for (std::size_t i = 0; i < na; ++i) sum += doubled_ranks[picks[i]];
    ++count_all;
    if (sum <= target) ++count_le;
    std::size_t i = na;
    while (i > 0 && picks[i - 1] == n - na + (i - 1)) --i;
    if (i == 0) break;
    ++picks[i - 1];
    for (std::size_t j = i; j < na; ++j) picks[j] = picks[j - 1] + 1;
  }
  return static_cast<double>(count_le) / static_cast<double>(count_all);
}

}  // namespace

TestResult mann_whitney_test(std::span<const double> losses_a,
                             std::span<const double> losses_b, double level) {
  const std::size_t na = losses_a.size(), nb = losses_b.size();
  TestResult result;
  if (na == 0 || nb == 0) return result;
  const double u = mann_whitney_u(losses_a, losses_b);
  const long long doubled_u = static_cast<long long>(std::llround(2.0 * u));

  if (na <= 12 && nb <= 12) {
    // doubled midranks of the pooled sample
    std::vector<double> pooled(losses_a.begin(), losses_a.end());
    pooled.insert(pooled.end(), losses_b.begin(), losses_b.end());
    std::sort(pooled.begin(), pooled.end());
    std::vector<long long> doubled_ranks(pooled.size());
    std::size_t i = 0;
    while (i < pooled.size()) {
      std::size_t j = i;
      while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
      for (std::size_t t = i; t <= j; ++t)
        doubled_ranks[t] = static_cast<long long>(i + 1) + static_cast<long long>(j + 1);
      i = j + 1;
    }
    result.p_value = mann_whitney_exact_p(doubled_ranks, na, doubled_u);
  } else {
    // Normal approximation with tie correction.
    const double dn = static_cast<double>(na + nb);
    std::vector<double> pooled(losses_a.begin(), losses_a.end());
    pooled.insert(pooled.end(), losses_b.begin(), losses_b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
      std::size_t j = i;
      while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
    const double mean = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    const double variance = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                            ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (variance <= 0.0) {
      result.p_value = 1.0;  // every pooled value tied
    } else {
      const double z = (u - mean) / std::sqrt(variance);
      result.p_value = std::min(1.0, normal_cdf(z));
    }
  }
  result.reject = result.p_value <= level;
  return result;
}

namespace {

TestResult run_test(TestKind kind, std::span<const double> a, std::span<const double> b,
                    double level) {
  return kind == TestKind::binomial_proportions ? binomial_improvement_test(a, b, level)
                                                : mann_whitney_test(a, b, level);
}

}  // namespace

DimensionChoice select_dimension(const SearchTrace& trace, const TestConfig& tc) {
  tc.validate();
  if (trace.levels.empty())
    throw std::invalid_argument("select_dimension: empty trace");
  DimensionChoice choice;
  const int levels = static_cast<int>(trace.levels.size());
  if (levels == 1) return choice;  // d_star = 1 trivially

  const TestKind kind = tc.resolve(trace.config.divergence.kind);
  const int budget = std::max(1, trace.config.d_max - 1);
  const double per_test = tc.correction == Correction::bonferroni
                              ? tc.family_level / static_cast<double>(budget)
                              : tc.family_level;
  for (int j = 1; j < levels; ++j) {
    const auto& current = trace.level(j).anchor_risk().losses;
    const auto& next = trace.level(j + 1).anchor_risk().losses;
    const TestResult r = run_test(kind, next, current, per_test);
    choice.p_values.push_back(r.p_value);
    if (!r.reject) {
      choice.d_star = j;
      return choice;
    }
  }
  choice.d_star = levels;
  choice.capped = true;
  return choice;
}

SelectionReport filter_models(const LevelResult& level, const TestConfig& tc,
                              DivergenceKind divergence) {
  tc.validate();
  if (level.s_star.empty())
    throw std::invalid_argument("filter_models: empty promising set");
  const TestKind kind = tc.resolve(divergence);

  SelectionReport report;
  report.d_star = level.d;
  report.test_kind = kind;
  report.family_level = tc.family_level;

  // level.s_star is already sorted by (d_hat, model) and duplicate-free.
  const auto& anchor = level.evaluated[level.s_star.front()];
  report.s0.push_back({anchor.risk});
  report.min_model = anchor.model();

  const std::size_t candidates = level.s_star.size();
  if (candidates == 1) return report;
  const double per_test = tc.correction == Correction::bonferroni
                              ? tc.family_level / static_cast<double>(candidates - 1)
                              : tc.family_level;
  for (std::size_t i = 1; i < candidates; ++i) {
    const auto& candidate = level.evaluated[level.s_star[i]];
    const TestResult r =
        run_test(kind, anchor.risk->losses, candidate.risk->losses, per_test);
    report.filter_p_values.push_back(r.p_value);
    if (r.reject) break;  // candidate's divergence is significantly larger
    report.s0.push_back({candidate.risk});
  }
  return report;
}

SelectionReport select_and_filter(const SearchTrace& trace, const TestConfig& tc) {
  const DimensionChoice choice = select_dimension(trace, tc);
  SelectionReport report =
      filter_models(trace.level(choice.d_star), tc, trace.config.divergence.kind);
  report.d_star_capped = choice.capped;
  report.dimension_p_values = choice.p_values;
  return report;
}

nlohmann::ordered_json SelectionReport::to_json(
    const std::vector<std::string>& names) const {
  nlohmann::ordered_json j;
  j["d_star"] = d_star;
  j["d_star_capped"] = d_star_capped;
  j["dimension_p_values"] = dimension_p_values;
  j["filter_p_values"] = filter_p_values;
  j["test"] = test_kind == TestKind::binomial_proportions ? "binomial" : "mw";
  j["family_level"] = family_level;
  j["min_model"] = min_model;
  auto jm = nlohmann::ordered_json::array();
  for (const auto& selected : s0) {
    nlohmann::ordered_json m;
    m["model"] = selected.model();
    auto jn = nlohmann::ordered_json::array();
    for (int idx : selected.model())
      jn.push_back(idx >= 0 && idx < static_cast<int>(names.size())
                       ? names[idx]
                       : "x" + std::to_string(idx));
    m["names"] = std::move(jn);
    m["d_hat"] = selected.risk->d_hat;
    m["evaluations"] = selected.risk->evaluations;
    if (selected.risk->misclass_count) m["misclass_count"] = *selected.risk->misclass_count;
    jm.push_back(std::move(m));
  }
  j["s0_size"] = jm.size();
  j["s0"] = std::move(jm);
  return j;
}

}  // namespace paranet
