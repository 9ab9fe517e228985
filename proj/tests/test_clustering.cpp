#include <doctest.h>

#include <cmath>

#include "docaff/clustering.hpp"
#include "fixtures.hpp"

using namespace docaff;
using docaff::testing::word;

namespace {

// Singleton lines, one per word, with the given heights.
DocumentModel column_doc(const std::vector<double>& heights) {
  DocumentModel doc;
  doc.aspect_ratio = 1.0;
  double y = 0.05;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    doc.words.push_back(word(static_cast<int>(i), "w", {0.1, y, 0.1, heights[i]}));
    y += heights[i] + 0.05;
  }
  build_contextual_lines(doc);
  return doc;
}

// 1-D latents at distances giving the requested affinity to the origin.
Eigen::MatrixXd latents_for(const std::vector<double>& affinities) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(affinities.size()) + 1, 1);
  for (std::size_t i = 0; i < affinities.size(); ++i) u(static_cast<Eigen::Index>(i) + 1, 0) = std::sqrt(-std::log(affinities[i]));
  return u;
}

}  // namespace

TEST_CASE("line pair likelihood is the mean cross affinity") {
  const Eigen::MatrixXd u = latents_for({0.8, 0.6});
  const Eigen::Index a[] = {0};
  const Eigen::Index b[] = {1, 2};
  CHECK(line_pair_likelihood(u, a, b) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(line_pair_likelihood(u, b, a) == line_pair_likelihood(u, a, b));
  const Eigen::Index same[] = {0};
  CHECK(line_pair_likelihood(Eigen::MatrixXd::Zero(1, 3), same, same) == 1.0);
}

TEST_CASE("pruning on likelihood and height ratio") {
  SUBCASE("kept") {
    const auto doc = column_doc({0.04, 0.044});
    CHECK(build_line_graph(doc, latents_for({0.9})).edges.size() == 1);
  }
  SUBCASE("height ratio 1.4") {
    const auto doc = column_doc({0.04, 0.056});
    CHECK(build_line_graph(doc, latents_for({0.9})).edges.empty());
  }
  SUBCASE("likelihood 0.6") {
    const auto doc = column_doc({0.04, 0.04});
    CHECK(build_line_graph(doc, latents_for({0.6})).edges.empty());
  }
  SUBCASE("likelihood exactly at the threshold") {
    const auto doc = column_doc({0.04, 0.04});
    ClusterParams p;
    p.likelihood_min = std::exp(-0.25);
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, 1);
    u(1, 0) = 0.5;
    CHECK(build_line_graph(doc, u, p).edges.size() == 1);
  }
}

TEST_CASE("components") {
  const auto doc = column_doc({0.04, 0.04, 0.04, 0.04});
  LineAffinityGraph g;
  for (const auto& l : doc.lines) g.line_ids.push_back(l.id);
  CHECK(connected_components(g, doc).cluster_count() == 4);
  g.edges = {{0, 1, 0.9}, {1, 2, 0.9}};
  const auto chain = connected_components(g, doc);
  CHECK(chain.cluster_count() == 2);
  CHECK(chain.clusters[0] == std::vector<int>{0, 1, 2});
  CHECK(chain.cluster_of(3) == 1);
}

TEST_CASE("components match the transitive-closure oracle") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> n_dist(1, 30);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = n_dist(rng);
    const double density = unit(rng) * 0.2;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (unit(rng) < density) {
          adj[i][j] = adj[j][i] = true;
          edges.emplace_back(j, i);
        }
      }
    }
    const auto labels = component_labels(n, edges);
    CHECK(docaff::testing::partition_of(labels) == docaff::testing::closure_partition(adj));
  }
}

TEST_CASE("clustering is invariant to line order and keeps lines whole") {
  auto generated = docaff::testing::small_menu(4, 6);
  DocumentModel doc = generated.doc;
  build_contextual_lines(doc);
  Eigen::MatrixXd latents(static_cast<Eigen::Index>(doc.words.size()), 3);
  for (std::size_t i = 0; i < doc.words.size(); ++i) {
    const double h = doc.words[i].bbox.h;
    latents.row(static_cast<Eigen::Index>(i)) << h * 20.0, doc.words[i].style->bold ? 1.0 : 0.0, 0.0;
  }
  const auto base = connected_components(build_line_graph(doc, latents), doc);
  for (const auto& line : doc.lines) {
    for (int w : line.word_ids) CHECK(base.cluster_of(w) == base.cluster_of(line.word_ids.front()));
  }

  DocumentModel shuffled = doc;
  std::reverse(shuffled.lines.begin(), shuffled.lines.end());
  CHECK(connected_components(build_line_graph(shuffled, latents), shuffled) == base);

  ClusterParams strict;
  strict.likelihood_min = 0.95;
  const auto finer = connected_components(build_line_graph(doc, latents, strict), doc);
  CHECK(finer.cluster_count() >= base.cluster_count());
  for (const auto& cluster : finer.clusters) {
    for (int w : cluster) CHECK(base.cluster_of(w) == base.cluster_of(cluster.front()));
  }
}

TEST_CASE("2-D projection") {
  CHECK(project_2d(Eigen::MatrixXd::Ones(1, 4)).isZero());
  CHECK(project_2d(Eigen::MatrixXd::Ones(1, 4)).cols() == 2);

  Eigen::MatrixXd pts(4, 2);
  pts << -3, 0, 3, 0, 0, -1, 0, 1;
  const auto p = project_2d(pts);
  CHECK(p.cwiseAbs().isApprox(pts.cwiseAbs()));

  Eigen::MatrixXd line(3, 1);
  line << 1, 2, 3;
  const auto padded = project_2d(line);
  CHECK(padded.col(1).isZero());

  Eigen::MatrixXd cloud = Eigen::MatrixXd::Random(50, 6);
  const Eigen::MatrixXd centred = cloud.rowwise() - cloud.colwise().mean();
  const auto proj = project_2d(cloud);
  CHECK(proj.squaredNorm() <= centred.squaredNorm() + 1e-9);
  CHECK(proj == project_2d(cloud));
}
