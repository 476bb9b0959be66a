#include "paranet/network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace paranet {

std::vector<int> Network::hub_indices() const {
  std::vector<int> hubs;
  for (const auto& node : nodes)
    if (node.position == 1) hubs.push_back(node.index);
  return hubs;
}

Network build_network(const std::vector<std::vector<int>>& s0,
                      const std::vector<std::string>& names) {
  if (s0.empty()) throw std::invalid_argument("build_network: no models");
  const int d = static_cast<int>(s0.front().size());
  for (const auto& model : s0)
    if (static_cast<int>(model.size()) != d)
      throw std::invalid_argument("build_network: models of unequal dimension");

  std::map<int, int> frequency;
  std::map<std::pair<int, int>, int> co_occurrence;
  for (const auto& model : s0) {
    for (int idx : model) ++frequency[idx];
    for (std::size_t i = 0; i < model.size(); ++i)
      for (std::size_t j = i + 1; j < model.size(); ++j) {
        const int a = std::min(model[i], model[j]);
        const int b = std::max(model[i], model[j]);
        ++co_occurrence[{a, b}];
      }
  }

  // Per-model ranks by global frequency; a node's position is its modal rank.
  std::map<int, std::vector<int>> rank_counts;  // index -> counts per rank 1..d
  for (const auto& model : s0) {
    std::vector<int> members(model);
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      if (frequency[a] != frequency[b]) return frequency[a] > frequency[b];
      return a < b;
    });
    for (std::size_t r = 0; r < members.size(); ++r) {
      auto& counts = rank_counts[members[r]];
      if (counts.empty()) counts.assign(d, 0);
      ++counts[r];
    }
  }

  Network net;
  net.d_star = d;
  net.model_count = static_cast<int>(s0.size());
  for (const auto& [idx, freq] : frequency) {
    NetworkNode node;
    node.index = idx;
    node.name = idx >= 0 && idx < static_cast<int>(names.size())
                    ? names[idx]
                    : "x" + std::to_string(idx);
    node.frequency = freq;
    const auto& counts = rank_counts[idx];
    int best_rank = 0;
    for (int r = 1; r < d; ++r)
      if (counts[r] > counts[best_rank]) best_rank = r;  // ties keep the smaller rank
    node.position = best_rank + 1;
    net.nodes.push_back(std::move(node));
  }
  for (const auto& [pair, weight] : co_occurrence)
    net.edges.push_back({pair.first, pair.second, weight});
  return net;
}

EnsemblePrediction model_average_predict(const std::vector<CoefVector>& fits,
                                         const Eigen::RowVectorXd& x0,
                                         double threshold, bool binary) {
  if (fits.empty()) throw std::invalid_argument("model_average_predict: no models");
  EnsemblePrediction ensemble;
  ensemble.per_model.reserve(fits.size());
  double sum = 0.0;
  for (const auto& fit : fits) {
    const Prediction pred = predict(fit, x0, threshold);
    ensemble.per_model.push_back(pred.value);
    sum += pred.value;
  }
  ensemble.averaged = sum / static_cast<double>(fits.size());
  if (binary) ensemble.label = ensemble.averaged >= threshold ? 1 : 0;
  return ensemble;
}

nlohmann::ordered_json Network::to_json() const {
  nlohmann::ordered_json j;
  j["d_star"] = d_star;
  j["model_count"] = model_count;
  auto jn = nlohmann::ordered_json::array();
  for (const auto& node : nodes)
    jn.push_back({{"id", node.index},
                  {"name", node.name},
                  {"frequency", node.frequency},
                  {"position", node.position}});
  j["nodes"] = std::move(jn);
  auto je = nlohmann::ordered_json::array();
  for (const auto& edge : edges)
    je.push_back({{"a", edge.a}, {"b", edge.b}, {"weight", edge.weight}});
  j["edges"] = std::move(je);
  return j;
}

Network Network::from_json(const nlohmann::json& j) {
  Network net;
  net.d_star = j.at("d_star").get<int>();
  net.model_count = j.at("model_count").get<int>();
  for (const auto& jn : j.at("nodes"))
    net.nodes.push_back({jn.at("id").get<int>(), jn.at("name").get<std::string>(),
                         jn.at("frequency").get<int>(), jn.at("position").get<int>()});
  for (const auto& je : j.at("edges"))
    net.edges.push_back(
        {je.at("a").get<int>(), je.at("b").get<int>(), je.at("weight").get<int>()});
  return net;
}

std::string Network::to_dot() const {
  int max_frequency = 1, max_weight = 1;
  for (const auto& node : nodes) max_frequency = std::max(max_frequency, node.frequency);
  for (const auto& edge : edges) max_weight = std::max(max_weight, edge.weight);

  std::ostringstream out;
  out << "graph paradigmatic_network {\n";
  out << "  node [shape=circle, style=filled];\n";
  for (const auto& node : nodes) {
    const double width = 0.4 + 1.6 * node.frequency / max_frequency;
    const char* color = node.position == 1 ? "palegreen" : node.position == 2 ? "orange"
                                                                              : "plum";
    out << "  n" << node.index << " [label=\"" << node.name << "\", width="
        << width << ", fixedsize=true, fillcolor=" << color << "];\n";
  }
  for (const auto& edge : edges) {
    const double penwidth = 0.5 + 4.5 * edge.weight / max_weight;
    out << "  n" << edge.a << " -- n" << edge.b << " [penwidth=" << penwidth
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string Network::nodes_csv() const {
  std::ostringstream out;
  out << "id,name,frequency,position\n";
  for (const auto& node : nodes)
    out << node.index << "," << node.name << "," << node.frequency << ","
        << node.position << "\n";
  return out.str();
}

std::string Network::edges_csv() const {
  std::ostringstream out;
  out << "a,b,weight\n";
  for (const auto& edge : edges)
    out << edge.a << "," << edge.b << "," << edge.weight << "\n";
  return out.str();
}

void export_network(const Network& network, NetworkFormat format,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  if (format == NetworkFormat::dot) out << network.to_dot();
  else out << network.to_json().dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace paranet
