#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "paranet/network.hpp"
#include "paranet/rng.hpp"

using namespace paranet;

namespace {

const std::vector<std::string> kNames = {"g0", "g1", "g2", "g3", "g4",
                                         "g5", "g6", "g7"};

const NetworkNode* find_node(const Network& net, int index) {
  for (const auto& node : net.nodes)
    if (node.index == index) return &node;
  return nullptr;
}

}  // namespace

TEST_CASE("build_network counts frequencies and co-occurrences") {
  Network net = build_network({{1, 2}, {1, 3}}, kNames);
  CHECK(net.d_star == 2);
  CHECK(net.model_count == 2);
  REQUIRE(net.nodes.size() == 3);
  CHECK(find_node(net, 1)->frequency == 2);
  CHECK(find_node(net, 1)->position == 1);  // the shared covariate is the hub
  CHECK(find_node(net, 2)->frequency == 1);
  CHECK(find_node(net, 2)->position == 2);
  CHECK(find_node(net, 3)->position == 2);
  REQUIRE(net.edges.size() == 2);
  for (const auto& edge : net.edges) CHECK(edge.weight == 1);
  CHECK(net.hub_indices() == std::vector<int>{1});
}

TEST_CASE("single model network") {
  Network net = build_network({{4, 7}}, kNames);
  REQUIRE(net.nodes.size() == 2);
  CHECK(find_node(net, 4)->frequency == 1);
  CHECK(find_node(net, 7)->frequency == 1);
  REQUIRE(net.edges.size() == 1);
  CHECK(net.edges[0].weight == 1);
  int frequency_sum = 0;
  for (const auto& node : net.nodes) frequency_sum += node.frequency;
  CHECK(frequency_sum == net.d_star * net.model_count);  // 2 = 2 * 1
}

TEST_CASE("count conservation over random model sets") {
  Rng rng(31);
  for (int round = 0; round < 30; ++round) {
    const int d = 1 + static_cast<int>(rng.uniform_below(3));
    const int count = 1 + static_cast<int>(rng.uniform_below(12));
    std::vector<std::vector<int>> s0;
    for (int m = 0; m < count; ++m) {
      std::vector<int> pool = {0, 1, 2, 3, 4, 5, 6, 7};
      std::vector<int> model;
      for (int j = 0; j < d; ++j) {
        const std::size_t at = rng.uniform_below(pool.size());
        model.push_back(pool[at]);
        pool.erase(pool.begin() + at);
      }
      std::sort(model.begin(), model.end());
      s0.push_back(std::move(model));
    }
    Network net = build_network(s0, kNames);
    long frequency_sum = 0;
    for (const auto& node : net.nodes) frequency_sum += node.frequency;
    CHECK(frequency_sum == static_cast<long>(d) * count);
    long weight_sum = 0;
    for (const auto& edge : net.edges) {
      CHECK(edge.weight >= 1);
      CHECK(edge.a < edge.b);
      CHECK(find_node(net, edge.a) != nullptr);
      CHECK(find_node(net, edge.b) != nullptr);
      weight_sum += edge.weight;
    }
    CHECK(weight_sum == static_cast<long>(d) * (d - 1) / 2 * count);
    // every node carries exactly one position label in 1..d; hubs exist
    bool any_hub = false;
    for (const auto& node : net.nodes) {
      CHECK(node.position >= 1);
      CHECK(node.position <= d);
      if (node.position == 1) any_hub = true;
    }
    CHECK(any_hub);
  }
}

TEST_CASE("build_network rejects mixed dimensions and empty input") {
  CHECK_THROWS_AS(build_network({}, kNames), std::invalid_argument);
  CHECK_THROWS_AS(build_network({{1, 2}, {1}}, kNames), std::invalid_argument);
}

TEST_CASE("model averaging") {
  auto make_fit = [](double intercept) {
    CoefVector c;
    c.kind = EstimatorKind::logistic;
    c.has_intercept = true;
    c.model = {0};
    c.values = Eigen::VectorXd(2);
    c.values << intercept, 0.0;
    return c;
  };
  Eigen::RowVectorXd x0(1);
  x0 << 0.0;

  SUBCASE("two probabilities average and threshold") {
    // logit(0.9) and logit(0.7) intercept-only models
    std::vector<CoefVector> fits = {make_fit(std::log(0.9 / 0.1)),
                                    make_fit(std::log(0.7 / 0.3))};
    EnsemblePrediction ensemble = model_average_predict(fits, x0, 0.5, true);
    CHECK(ensemble.averaged == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(*ensemble.label == 1);
    REQUIRE(ensemble.per_model.size() == 2);
    CHECK(ensemble.per_model[0] == doctest::Approx(0.9));
  }
  SUBCASE("identical models reproduce the single prediction") {
    std::vector<CoefVector> fits = {make_fit(1.3), make_fit(1.3), make_fit(1.3)};
    EnsemblePrediction ensemble = model_average_predict(fits, x0, 0.5, true);
    CHECK(ensemble.averaged == doctest::Approx(logistic(1.3)).epsilon(1e-14));
  }
  SUBCASE("average stays inside the per-model hull") {
    Rng rng(8);
    std::vector<CoefVector> fits;
    for (int i = 0; i < 5; ++i) fits.push_back(make_fit(rng.normal()));
    EnsemblePrediction ensemble = model_average_predict(fits, x0, 0.5, true);
    const auto [lo, hi] =
        std::minmax_element(ensemble.per_model.begin(), ensemble.per_model.end());
    CHECK(ensemble.averaged >= *lo);
    CHECK(ensemble.averaged <= *hi);
    CHECK(*lo >= 0.0);
    CHECK(*hi <= 1.0);
  }
}

TEST_CASE("network export round-trips counts through json") {
  Network net = build_network({{0, 2, 5}, {0, 2, 7}, {0, 3, 5}}, kNames);
  Network back = Network::from_json(net.to_json());
  CHECK(back.to_json() == net.to_json());
  CHECK(back.d_star == 3);
  CHECK(back.model_count == 3);
  REQUIRE(back.nodes.size() == net.nodes.size());
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    CHECK(back.nodes[i].frequency == net.nodes[i].frequency);
    CHECK(back.nodes[i].position == net.nodes[i].position);
  }

  SUBCASE("dot output scales with counts and names every node") {
    const std::string dot = net.to_dot();
    CHECK(dot.rfind("graph", 0) == 0);
    for (const auto& node : net.nodes)
      CHECK(dot.find("\"" + node.name + "\"") != std::string::npos);
    CHECK(dot.find("penwidth") != std::string::npos);
    CHECK(dot.find("width") != std::string::npos);
  }
  SUBCASE("csv tables carry one row per node and edge") {
    const std::string nodes = net.nodes_csv();
    const std::string edges = net.edges_csv();
    CHECK(std::count(nodes.begin(), nodes.end(), '\n') ==
          static_cast<long>(net.nodes.size()) + 1);
    CHECK(std::count(edges.begin(), edges.end(), '\n') ==
          static_cast<long>(net.edges.size()) + 1);
  }
  SUBCASE("files are written where asked, errors elsewhere") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto dot_path =
        dir / ("paranet_net_" + std::to_string(::getpid()) + ".dot");
    const auto json_path =
        dir / ("paranet_net_" + std::to_string(::getpid()) + ".json");
    export_network(net, NetworkFormat::dot, dot_path.string());
    export_network(net, NetworkFormat::json, json_path.string());
    std::ifstream json_in(json_path);
    nlohmann::json parsed;
    json_in >> parsed;
    CHECK(Network::from_json(parsed).to_json() == net.to_json());
    std::filesystem::remove(dot_path);
    std::filesystem::remove(json_path);
    CHECK_THROWS_AS(
        export_network(net, NetworkFormat::dot, "/nonexistent/dir/net.dot"),
        std::runtime_error);
  }
}

TEST_CASE("positions follow modal within-model frequency rank") {
  // g0 appears 3 times (hub), g1 twice, g2 and g3 once.
  Network net = build_network({{0, 1}, {0, 1}, {0, 2}}, kNames);
  CHECK(find_node(net, 0)->position == 1);
  CHECK(find_node(net, 1)->position == 2);
  CHECK(find_node(net, 2)->position == 2);
  // dimension-1 models: everyone is a hub
  Network singles = build_network({{3}, {4}, {3}}, kNames);
  for (const auto& node : singles.nodes) CHECK(node.position == 1);
  CHECK(singles.edges.empty());
}
