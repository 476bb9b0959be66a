#pragma once

#include <string>
#include <vector>

#include "paranet/estimators.hpp"

#include <json.hpp>

namespace paranet {

struct NetworkNode {
  int index = 0;          // covariate index
  std::string name;
  int frequency = 0;      // number of selected models containing the covariate
  int position = 1;       // modal within-model frequency rank (1 = hub)
};

struct NetworkEdge {
  int a = 0, b = 0;       // covariate indices, a < b
  int weight = 0;         // number of selected models containing both
};

/// Co-occurrence network over the covariates of a set of equal-dimension
/// models: node weight = inclusion frequency, edge weight = co-occurrence
/// count, hubs = position-1 nodes.
struct Network {
  int d_star = 0;
  int model_count = 0;
  std::vector<NetworkNode> nodes;  // ascending covariate index
  std::vector<NetworkEdge> edges;  // ascending (a, b)

  std::vector<int> hub_indices() const;

  nlohmann::ordered_json to_json() const;
  static Network from_json(const nlohmann::json& j);
  std::string to_dot() const;
  std::string nodes_csv() const;
  std::string edges_csv() const;
};

/// Builds the network from the selected models. All models must share one
/// dimension. Position labels: within each model, members are ranked by
/// global frequency (descending, ties by index); a node's position is its
/// most common rank (ties resolved to the smaller rank).
Network build_network(const std::vector<std::vector<int>>& s0,
                      const std::vector<std::string>& names);

struct EnsemblePrediction {
  std::vector<double> per_model;
  double averaged = 0.0;
  std::optional<int> label;
};

/// Equally weighted average of the models' predictions at one covariate
/// row; binary tasks threshold the averaged probability.
EnsemblePrediction model_average_predict(const std::vector<CoefVector>& fits,
                                         const Eigen::RowVectorXd& x0,
                                         double threshold, bool binary);

enum class NetworkFormat { dot, json };

/// Writes the network to a file; DOT scales node width with frequency and
/// edge penwidth with weight, JSON round-trips the raw counts.
void export_network(const Network& network, NetworkFormat format,
                    const std::string& path);

}  // namespace paranet
