#include "paranet/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace paranet {

int SearchConfig::resolved_b(int p) const {
  if (b > 0) return b;
  return std::clamp(p, 2000, 20000);
}

int SearchConfig::resolved_threads() const {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void SearchConfig::validate(const Dataset& dataset) const {
  const int p = dataset.p();
  if (d_max < 1) throw std::invalid_argument("search: d_max must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("search: alpha must lie in (0,1)");
  if (!(pi >= 0.0 && pi <= 1.0))
    throw std::invalid_argument("search: pi must lie in [0,1]");
  if (resolved_b(p) < 1) throw std::invalid_argument("search: b must be >= 1");
  if (!std::is_sorted(m0.begin(), m0.end()) ||
      std::adjacent_find(m0.begin(), m0.end()) != m0.end())
    throw std::invalid_argument("search: m0 must be sorted and duplicate-free");
  for (int idx : m0)
    if (idx < 0 || idx >= p)
      throw std::invalid_argument("search: m0 index out of range");
  if (d_max > p - static_cast<int>(m0.size()))
    throw std::invalid_argument("search: d_max exceeds the number of selectable covariates");
  if (dataset.n() < 2 * folds_m)
    throw std::invalid_argument("search: need n >= 2*m for the configured fold count");
  if (initial_mode == InitialMode::exhaustive_upto && d_prime < 1)
    throw std::invalid_argument("search: d_prime must be >= 1");
  divergence.validate();
  if (divergence.kind == DivergenceKind::classification && dataset.task != Task::binary)
    throw std::invalid_argument("search: classification divergence needs a binary task");
}

nlohmann::ordered_json SearchConfig::to_json() const {
  nlohmann::ordered_json j;
  j["d_max"] = d_max;
  j["b"] = b;
  j["alpha"] = alpha;
  j["pi"] = pi;
  j["m0"] = m0;
  j["initial_mode"] = initial_mode == InitialMode::exhaustive ? "exhaustive"
                      : initial_mode == InitialMode::sampled_large_p ? "sampled"
                                                                     : "upto";
  j["d_prime"] = d_prime;
  j["exhaustive_budget"] = exhaustive_budget;
  j["seed"] = seed;
  j["m"] = folds_m;
  j["k"] = reps_k;
  j["cv"] = to_string(cv_mode);
  j["stratify"] = stratify;
  j["estimator"] = estimator.kind == EstimatorKind::linear ? "linear" : "logistic";
  j["ridge"] = estimator.fit.ridge;
  j["max_iter"] = estimator.fit.max_iter;
  j["fit_tol"] = estimator.fit.tol;
  j["threshold"] = estimator.threshold;
  j["intercept"] = estimator.intercept;
  j["divergence"] = divergence.kind_name();
  j["w1"] = divergence.w1;
  j["w2"] = divergence.w2;
  return j;
}

SearchConfig SearchConfig::from_json(const nlohmann::json& j) {
  SearchConfig c;
  c.d_max = j.at("d_max").get<int>();
  c.b = j.at("b").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.pi = j.at("pi").get<double>();
  c.m0 = j.at("m0").get<std::vector<int>>();
  const std::string mode = j.at("initial_mode").get<std::string>();
  c.initial_mode = mode == "exhaustive" ? InitialMode::exhaustive
                   : mode == "sampled"  ? InitialMode::sampled_large_p
                                        : InitialMode::exhaustive_upto;
  c.d_prime = j.at("d_prime").get<int>();
  c.exhaustive_budget = j.at("exhaustive_budget").get<long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.folds_m = j.at("m").get<int>();
  c.reps_k = j.at("k").get<int>();
  c.cv_mode = cv_mode_from_string(j.at("cv").get<std::string>());
  c.stratify = j.at("stratify").get<bool>();
  c.estimator.kind = j.at("estimator").get<std::string>() == "linear"
                         ? EstimatorKind::linear
                         : EstimatorKind::logistic;
  c.estimator.fit.ridge = j.at("ridge").get<double>();
  c.estimator.fit.max_iter = j.at("max_iter").get<int>();
  c.estimator.fit.tol = j.at("fit_tol").get<double>();
  c.estimator.threshold = j.at("threshold").get<double>();
  c.estimator.intercept = j.at("intercept").get<bool>();
  c.divergence =
      DivergenceSpec::parse(j.at("divergence").get<std::string>(),
                            j.at("w1").get<double>(), j.at("w2").get<double>());
  return c;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::string model_key(const std::vector<int>& model) {
  std::string key;
  key.reserve(model.size() * sizeof(int));
  for (int idx : model)
    key.append(reinterpret_cast<const char*>(&idx), sizeof(int));
  return key;
}

// Scores the deduplicated candidate list in parallel through the cache and
// assembles the level: draw-weighted quantile, promising set, index union.
LevelResult assemble_level(int d, const std::vector<std::vector<int>>& candidates,
                           const Dataset& dataset, const SearchConfig& config,
                           const FoldPlan& plan, RiskCache& cache) {
  // Collapse duplicate draws, keeping first-appearance order and multiplicity.
  std::unordered_map<std::string, int> seen;
  std::vector<std::vector<int>> distinct;
  std::vector<int> multiplicity;
  for (const auto& model : candidates) {
    auto [it, inserted] = seen.try_emplace(model_key(model),
                                           static_cast<int>(distinct.size()));
    if (inserted) {
      distinct.push_back(model);
      multiplicity.push_back(1);
    } else {
      ++multiplicity[it->second];
    }
  }

  std::vector<std::shared_ptr<const RiskEstimate>> risks(distinct.size());
  auto compute = [&](const std::vector<int>& m) {
    return estimate_risk(dataset, m, plan, config.estimator, config.divergence);
  };
  parallel_for(distinct.size(), config.resolved_threads(), [&](std::size_t i) {
    risks[i] = cache.get_or_compute(distinct[i], compute);
  });

  LevelResult level;
  level.d = d;
  level.draws = static_cast<long>(candidates.size());
  level.evaluated.reserve(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i)
    level.evaluated.push_back({risks[i], multiplicity[i]});

  // Draw-weighted order statistics: sort by (d_hat, model), accumulate
  // multiplicities until the ceil(alpha*N)-th draw is covered.
  std::vector<int> order(level.evaluated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = level.evaluated[a];
    const auto& eb = level.evaluated[b];
    if (ea.d_hat() != eb.d_hat()) return ea.d_hat() < eb.d_hat();
    return ea.model() < eb.model();
  });

  const long n_draws = level.draws;
  long rank = static_cast<long>(std::ceil(config.alpha * static_cast<double>(n_draws) - 1e-9));
  rank = std::max(1L, std::min(rank, n_draws));
  long covered = 0;
  for (int idx : order) {
    covered += level.evaluated[idx].multiplicity;
    if (covered >= rank) {
      level.anchor = idx;
      level.q_hat = level.evaluated[idx].d_hat();
      break;
    }
  }

  for (int idx : order) {
    if (level.evaluated[idx].d_hat() <= level.q_hat) level.s_star.push_back(idx);
    else break;  // sorted by d_hat: nothing further qualifies
  }

  std::vector<bool> in_m0(dataset.p(), false);
  for (int idx : config.m0) in_m0[idx] = true;
  std::vector<bool> member(dataset.p(), false);
  for (int s : level.s_star)
    for (int covariate : level.evaluated[s].model())
      if (!in_m0[covariate]) member[covariate] = true;
  for (int j = 0; j < dataset.p(); ++j)
    if (member[j]) level.i_star.push_back(j);
  level.i_complement_size = dataset.p() - static_cast<long>(config.m0.size()) -
                            static_cast<long>(level.i_star.size());
  return level;
}

std::vector<int> augment_m0(const std::vector<int>& m0, std::vector<int> extra) {
  extra.insert(extra.end(), m0.begin(), m0.end());
  std::sort(extra.begin(), extra.end());
  return extra;
}

std::vector<int> selectable_covariates(int p, const std::vector<int>& m0) {
  std::vector<bool> in_m0(p, false);
  for (int idx : m0) in_m0[idx] = true;
  std::vector<int> pool;
  pool.reserve(p - m0.size());
  for (int j = 0; j < p; ++j)
    if (!in_m0[j]) pool.push_back(j);
  return pool;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::vector<int> sample_candidate(const std::vector<int>& i_star_prev,
                                  const std::vector<int>& complement_prev,
                                  int d, double pi, Rng& rng,
                                  const std::vector<int>& m0) {
  if (static_cast<int>(i_star_prev.size() + complement_prev.size()) < d)
    throw std::invalid_argument("sample_candidate: pools smaller than d");
  std::vector<int> pool_a = i_star_prev;       // previous level's index set
  std::vector<int> pool_b = complement_prev;   // its complement
  std::vector<int> chosen;
  chosen.reserve(d);
  for (int t = 0; t < d; ++t) {
    const bool want_a = rng.bernoulli(pi);
    std::vector<int>* pool = want_a ? &pool_a : &pool_b;
    if (pool->empty()) pool = want_a ? &pool_b : &pool_a;  // fall through
    if (pool->empty())
      throw std::invalid_argument("sample_candidate: pools exhausted");
    const std::size_t at = rng.uniform_below(pool->size());
    chosen.push_back((*pool)[at]);
    (*pool)[at] = pool->back();
    pool->pop_back();
  }
  return augment_m0(m0, std::move(chosen));
}

LevelResult initial_step_exhaustive(const Dataset& dataset, const SearchConfig& config,
                                    const FoldPlan& plan, RiskCache& cache) {
  std::vector<std::vector<int>> candidates;
  for (int j : selectable_covariates(dataset.p(), config.m0))
    candidates.push_back(augment_m0(config.m0, {j}));
  return assemble_level(1, candidates, dataset, config, plan, cache);
}

LevelResult initial_step_sampled(const Dataset& dataset, const SearchConfig& config,
                                 const FoldPlan& plan, RiskCache& cache) {
  const std::vector<int> pool = selectable_covariates(dataset.p(), config.m0);
  const int b = config.resolved_b(dataset.p());
  const std::uint64_t level_seed = split_seed(config.seed, 1);
  std::vector<std::vector<int>> candidates;
  candidates.reserve(b);
  for (int i = 0; i < b; ++i) {
    Rng rng(split_seed(level_seed, static_cast<std::uint64_t>(i)));
    const int j = pool[rng.uniform_below(pool.size())];
    candidates.push_back(augment_m0(config.m0, {j}));
  }
  return assemble_level(1, candidates, dataset, config, plan, cache);
}

std::vector<LevelResult> initial_exhaustive_upto(const Dataset& dataset,
                                                 const SearchConfig& config,
                                                 const FoldPlan& plan, RiskCache& cache,
                                                 int d_prime) {
  const std::vector<int> pool = selectable_covariates(dataset.p(), config.m0);
  const int ps = static_cast<int>(pool.size());
  if (d_prime > ps)
    throw std::invalid_argument("exhaustive_upto: d_prime exceeds selectable covariates");

  double total = 0.0;
  for (int d = 1; d <= d_prime; ++d)
    total += std::exp(log_binomial(ps, d));
  if (total > static_cast<double>(config.exhaustive_budget)) {
    std::ostringstream msg;
    msg << "exhaustive_upto: " << static_cast<long>(std::llround(total))
        << " models exceed budget " << config.exhaustive_budget;
    throw std::invalid_argument(msg.str());
  }

  std::vector<LevelResult> levels;
  for (int d = 1; d <= d_prime; ++d) {
    // Enumerate all size-d subsets of the selectable pool in lexicographic order.
    std::vector<std::vector<int>> candidates;
    std::vector<int> picks(d);
    for (int i = 0; i < d; ++i) picks[i] = i;
    while (true) {
      std::vector<int> subset(d);
      for (int i = 0; i < d; ++i) subset[i] = pool[picks[i]];
      candidates.push_back(augment_m0(config.m0, std::move(subset)));
      int i = d - 1;
      while (i >= 0 && picks[i] == ps - d + i) --i;
      if (i < 0) break;
      ++picks[i];
      for (int j = i + 1; j < d; ++j) picks[j] = picks[j - 1] + 1;
    }
    levels.push_back(assemble_level(d, candidates, dataset, config, plan, cache));
  }
  return levels;
}

LevelResult general_step(const Dataset& dataset, const LevelResult& prev, int d,
                         const SearchConfig& config, const FoldPlan& plan,
                         RiskCache& cache) {
  if (d < 2) throw std::invalid_argument("general_step: d must be >= 2");
  if (prev.d != d - 1) throw std::invalid_argument("general_step: prev is not level d-1");

  std::vector<bool> in_star(dataset.p(), false);
  for (int idx : prev.i_star) in_star[idx] = true;
  std::vector<int> complement;
  for (int j : selectable_covariates(dataset.p(), config.m0))
    if (!in_star[j]) complement.push_back(j);

  const int b = config.resolved_b(dataset.p());
  const std::uint64_t level_seed = split_seed(config.seed, static_cast<std::uint64_t>(d));
  std::vector<std::vector<int>> candidates;
  candidates.reserve(b);
  for (int i = 0; i < b; ++i) {
    Rng rng(split_seed(level_seed, static_cast<std::uint64_t>(i)));
    candidates.push_back(
        sample_candidate(prev.i_star, complement, d, config.pi, rng, config.m0));
  }
  return assemble_level(d, candidates, dataset, config, plan, cache);
}

SearchTrace run_search(const Dataset& dataset, const SearchConfig& config) {
  dataset.validate();
  config.validate(dataset);

  SearchTrace trace;
  trace.config = config;
  trace.config.b = config.resolved_b(dataset.p());
  trace.config.threads = config.resolved_threads();
  trace.master_seed = config.seed;
  trace.plan_seed = split_seed(config.seed, 0);

  std::vector<int> labels;
  if (config.stratify && dataset.task == Task::binary)
    labels = dataset.class_labels();
  trace.plan = make_fold_plan(dataset.n(), config.folds_m, config.reps_k,
                              config.cv_mode, trace.plan_seed, labels);
  if (config.d_max >= trace.plan.min_train_size())
    throw std::invalid_argument("search: d_max must stay below the smallest training-fold size");

  RiskCache cache(trace.plan.id());
  const SearchConfig& cfg = trace.config;

  switch (cfg.initial_mode) {
    case InitialMode::exhaustive:
      trace.levels.push_back(initial_step_exhaustive(dataset, cfg, trace.plan, cache));
      break;
    case InitialMode::sampled_large_p:
      trace.levels.push_back(initial_step_sampled(dataset, cfg, trace.plan, cache));
      break;
    case InitialMode::exhaustive_upto: {
      const int d_prime = std::min(cfg.d_prime, cfg.d_max);
      trace.levels = initial_exhaustive_upto(dataset, cfg, trace.plan, cache, d_prime);
      break;
    }
  }
  for (int d = static_cast<int>(trace.levels.size()) + 1; d <= cfg.d_max; ++d)
    trace.levels.push_back(
        general_step(dataset, trace.levels.back(), d, cfg, trace.plan, cache));

  trace.level_seeds.reserve(trace.levels.size());
  for (int d = 1; d <= static_cast<int>(trace.levels.size()); ++d)
    trace.level_seeds.push_back(split_seed(config.seed, static_cast<std::uint64_t>(d)));
  return trace;
}

nlohmann::ordered_json SearchTrace::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = config.to_json();
  j["rng_audit"] = {{"master_seed", master_seed},
                    {"plan_seed", plan_seed},
                    {"level_seeds", level_seeds}};
  j["plan"] = plan.to_json();
  auto jl = nlohmann::ordered_json::array();
  for (const auto& level : levels) {
    nlohmann::ordered_json e;
    e["d"] = level.d;
    e["draws"] = level.draws;
    e["evaluated_distinct"] = level.evaluated.size();
    e["q_hat"] = level.q_hat;
    e["anchor"] = level.anchor_risk().model;
    e["i_star"] = level.i_star;
    e["i_complement_size"] = level.i_complement_size;
    auto js = nlohmann::ordered_json::array();
    for (int idx : level.s_star) {
      const auto& em = level.evaluated[idx];
      nlohmann::ordered_json m;
      m["model"] = em.model();
      m["d_hat"] = em.d_hat();
      m["multiplicity"] = em.multiplicity;
      if (em.risk->misclass_count) m["misclass_count"] = *em.risk->misclass_count;
      js.push_back(std::move(m));
    }
    e["s_star_size"] = js.size();
    e["s_star"] = std::move(js);
    jl.push_back(std::move(e));
  }
  j["levels"] = std::move(jl);
  return j;
}

std::string SearchTrace::curve_csv() const {
  std::ostringstream out;
  out << "d,q_hat\n";
  out.precision(17);
  for (const auto& level : levels) out << level.d << "," << level.q_hat << "\n";
  return out.str();
}

}  // namespace paranet
