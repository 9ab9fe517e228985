#include "docaff/clustering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "docaff/union_find.hpp"

namespace docaff {

double line_pair_likelihood(const Eigen::MatrixXd& latents, std::span<const Eigen::Index> rows_a,
                            std::span<const Eigen::Index> rows_b) {
  if (rows_a.empty() || rows_b.empty()) throw std::invalid_argument("line_pair_likelihood: empty line");
  double sum = 0.0;
  for (auto i : rows_a) {
    for (auto j : rows_b) sum += std::exp(-(latents.row(i) - latents.row(j)).squaredNorm());
  }
  return sum / static_cast<double>(rows_a.size() * rows_b.size());
}

Eigen::MatrixXd affinity_matrix(const Eigen::MatrixXd& latents) {
  const Eigen::Index n = latents.rows();
  Eigen::MatrixXd aff = Eigen::MatrixXd::Ones(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      aff(i, j) = aff(j, i) = std::exp(-(latents.row(i) - latents.row(j)).squaredNorm());
    }
  }
  return aff;
}

LineAffinityGraph build_line_graph(const DocumentModel& doc, const Eigen::MatrixXd& latents,
                                   const ClusterParams& params) {
  LineAffinityGraph graph;
  graph.params = params;
  const auto index = doc.word_index_map();
  std::vector<std::vector<Eigen::Index>> rows(doc.lines.size());
  for (std::size_t l = 0; l < doc.lines.size(); ++l) {
    graph.line_ids.push_back(doc.lines[l].id);
    for (int wid : doc.lines[l].word_ids) rows[l].push_back(static_cast<Eigen::Index>(index.at(wid)));
  }
  if (doc.lines.empty()) return graph;

  const Eigen::MatrixXd aff = affinity_matrix(latents);
  for (std::size_t a = 0; a < doc.lines.size(); ++a) {
    for (std::size_t b = a + 1; b < doc.lines.size(); ++b) {
      const double ha = doc.lines[a].bbox.h;
      const double hb = doc.lines[b].bbox.h;
      if (!(std::max(ha, hb) / std::min(ha, hb) < params.height_ratio_max)) continue;
      double sum = 0.0;
      for (auto i : rows[a]) {
        for (auto j : rows[b]) sum += aff(i, j);
      }
      const double likelihood = sum / static_cast<double>(rows[a].size() * rows[b].size());
      if (likelihood >= params.likelihood_min) {
        const int la = doc.lines[a].id;
        const int lb = doc.lines[b].id;
        graph.edges.push_back({std::min(la, lb), std::max(la, lb), likelihood});
      }
    }
  }
  return graph;
}

std::vector<int> component_labels(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  std::map<std::size_t, int> label_of_root;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = uf.find(i);
    auto [it, inserted] = label_of_root.emplace(root, static_cast<int>(label_of_root.size()));
    labels[i] = it->second;
  }
  return labels;
}

ClusterAssignment connected_components(const LineAffinityGraph& graph, const DocumentModel& doc) {
  std::map<int, std::size_t> line_pos;
  for (std::size_t i = 0; i < graph.line_ids.size(); ++i) line_pos.emplace(graph.line_ids[i], i);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(graph.edges.size());
  for (const auto& e : graph.edges) edges.emplace_back(line_pos.at(e.a), line_pos.at(e.b));
  const auto labels = component_labels(graph.line_ids.size(), edges);

  std::map<int, std::vector<int>> members;  // component -> word ids
  for (const auto& line : doc.lines) {
    const int comp = labels[line_pos.at(line.id)];
    auto& m = members[comp];
    m.insert(m.end(), line.word_ids.begin(), line.word_ids.end());
  }
  std::vector<std::vector<int>> clusters;
  clusters.reserve(members.size());
  for (auto& [comp, words] : members) {
    std::sort(words.begin(), words.end());
    clusters.push_back(std::move(words));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  ClusterAssignment out;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int wid : clusters[c]) out.word_to_cluster[wid] = static_cast<int>(c);
  }
  out.clusters = std::move(clusters);
  return out;
}

Eigen::MatrixXd project_2d(const Eigen::MatrixXd& latents) {
  const Eigen::Index n = latents.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 2);
  if (n <= 1 || latents.cols() == 0) return out;

  const Eigen::MatrixXd centred = latents.rowwise() - latents.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::Index d = latents.cols();
  for (Eigen::Index axis = 0; axis < std::min<Eigen::Index>(2, d); ++axis) {
    // Eigenvalues come in ascending order.
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - axis);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.col(axis) = centred * v;
  }
  return out;
}

}  // namespace docaff
