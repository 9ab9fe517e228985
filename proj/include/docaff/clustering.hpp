#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <vector>

#include "docaff/document.hpp"

namespace docaff {

struct ClusterParams {
  double likelihood_min = 0.75;   // inclusive
  double height_ratio_max = 1.25;  // exclusive
};

struct LineEdge {
  int a = 0;  // line ids, a < b
  int b = 0;
  double likelihood = 0.0;
};

struct LineAffinityGraph {
  std::vector<int> line_ids;
  std::vector<LineEdge> edges;  // surviving edges only
  ClusterParams params;
};

struct ClusterAssignment {
  std::map<int, int> word_to_cluster;
  std::vector<std::vector<int>> clusters;  // cluster id -> sorted word ids

  std::size_t cluster_count() const noexcept { return clusters.size(); }
  int cluster_of(int word_id) const { return word_to_cluster.at(word_id); }
  bool operator==(const ClusterAssignment&) const = default;
};

// Mean pairwise affinity across the two word sets. `latents` rows follow
// doc.words order; `rows_a` and `rows_b` index into them.
double line_pair_likelihood(const Eigen::MatrixXd& latents, std::span<const Eigen::Index> rows_a,
                            std::span<const Eigen::Index> rows_b);

// Full N x N matrix of exp(-||u_i - u_j||^2).
Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& latents);

// Keeps a line pair when its height ratio is below height_ratio_max and its
// voting likelihood is at least likelihood_min.
LineAffinityGraph build_line_graph(const DocumentModel& doc, const Eigen::MatrixXd& latents,
                                   const ClusterParams& params = {});

// Generic components over nodes 0..n-1; returns a component label per node,
// labels numbered by first appearance.
std::vector<int> component_labels(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

// Words inherit their line's component; cluster ids ordered by the smallest
// member word id.
ClusterAssignment connected_components(const LineAffinityGraph& graph, const DocumentModel& doc);

// Principal-component projection onto the top two variance directions of the
// centred rows. Each axis is signed so its largest-magnitude loading is
// positive; missing axes are zero.
Eigen::MatrixXd project_2d(const Eigen::MatrixXd& latents);

}  // namespace docaff
