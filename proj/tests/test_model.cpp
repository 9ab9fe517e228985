#include <doctest.h>

#include <cmath>
#include <sstream>

#include "docaff/model.hpp"

using namespace docaff;
using Model = EmbeddingModel<double>;

namespace {

Representations toy_reps(std::uint64_t seed) {
  // Two clusters of four points in R^4.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  Representations reps;
  reps.z.resize(8, 4);
  for (int i = 0; i < 8; ++i) {
    reps.word_ids.push_back(i);
    const double c = i < 4 ? 1.0 : -1.0;
    reps.z.row(i) << c + noise(rng), -c + noise(rng), 0.5 * c + noise(rng), noise(rng);
  }
  return reps;
}

std::vector<Constraint> toy_constraints() {
  std::vector<Constraint> out;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      const bool same = (i < 4) == (j < 4);
      out.push_back(make_constraint(i, j, same ? ConstraintKind::MustLink : ConstraintKind::CannotLink,
                                    ConstraintSource::Inter));
    }
  }
  return out;
}

PairBatch<double> random_batch(const LayerDims& dims, int pairs, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  PairBatch<double> b;
  b.left.resize(dims[0], pairs);
  b.right.resize(dims[0], pairs);
  for (Index i = 0; i < b.left.size(); ++i) {
    b.left.data()[i] = n(rng);
    b.right.data()[i] = n(rng);
  }
  for (int k = 0; k < pairs; ++k) b.labels.push_back(k % 2);
  return b;
}

}  // namespace

TEST_CASE("parameter count") {
  const auto m = init_model<float>(100, 20, 1);
  const Index expected = 100 * 50 + 50 + 50 * 2000 + 2000 + 2000 * 20 + 20;
  CHECK(m.parameter_count() == expected);
  CHECK(m.parameter_count() == 147070);
}

TEST_CASE("initialization") {
  const auto a = init_model<double>({10, 6, 7, 3}, 1);
  CHECK(a == init_model<double>({10, 6, 7, 3}, 1));
  CHECK_FALSE(a == init_model<double>({10, 6, 7, 3}, 2));
  for (const auto& b : a.biases) CHECK(b.isZero());
  const auto big = init_model<double>({100, 50, 200, 20}, 3);
  const auto& w = big.weights[1];
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().mean());
  CHECK(std::abs(mean) < 1e-3);
  CHECK(sd == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("forward pass") {
  auto unit = Model::zeros({2, 1, 1, 1});
  for (auto& w : unit.weights) w.setOnes();
  CHECK(forward(unit, Eigen::Vector2d(1, 1))(0) == doctest::Approx(2.0).epsilon(1e-12));

  const auto zero = Model::zeros({5, 4, 3, 2});
  CHECK(forward(zero, Eigen::VectorXd::Ones(5)).isZero());

  const auto m = init_model<double>({5, 4, 3, 2}, 9, 0.5);
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(5, -1, 1);
  CHECK(forward(m, z) == forward(m, z));
  CHECK_THROWS_AS(forward(m, Eigen::VectorXd::Ones(4)), std::invalid_argument);
}

TEST_CASE("dropout sampler") {
  DropoutSampler d(0.2, 4);
  const auto mask = d.mask<Eigen::MatrixXd>(200, 100);
  const double kept = static_cast<double>((mask.array() > 0).count()) / static_cast<double>(mask.size());
  CHECK(kept == doctest::Approx(0.8).epsilon(0.02));
  CHECK(((mask.array() == 0.0) || (mask.array() == 1.25)).all());
}

TEST_CASE("affinity") {
  const Eigen::Vector2d u(0.3, -0.2);
  CHECK(affinity(u, u) == 1.0);
  CHECK(affinity(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(affinity(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) == doctest::Approx(0.367879).epsilon(1e-6));
  const Eigen::Vector2d v(1.0, 2.0);
  CHECK(affinity(u, v) == affinity(v, u));
}

TEST_CASE("pair loss terms") {
  CHECK(pair_loss(std::log(2.0), 1) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(pair_loss(std::log(2.0), 1) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  CHECK(pair_loss(std::log(2.0), 0) == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
  // p -> 1 on a cannot-link saturates at -ln(eps)
  CHECK(pair_loss(0.0, 0) == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
  CHECK(std::isfinite(pair_loss(0.0, 0)));
  CHECK(pair_loss(0.0, 1) == doctest::Approx(-std::log(1.0 - 1e-7)).epsilon(1e-6));
  CHECK(pair_loss(1e6, 1) == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
}

TEST_CASE("batch loss is the sum of pair terms") {
  std::mt19937_64 rng(2);
  const auto m = init_model<double>({6, 4, 5, 3}, 3, 0.5);
  const auto b = random_batch(m.dims, 5, rng);
  double expected = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd u = forward(m, b.left.col(k));
    const Eigen::VectorXd v = forward(m, b.right.col(k));
    const double p = std::clamp(affinity(u, v), 1e-7, 1.0 - 1e-7);
    expected += b.labels[static_cast<std::size_t>(k)] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  CHECK(batch_loss(m, b, Mode::Eval) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(11);
  const auto m = init_model<double>({6, 4, 5, 3}, 5, 0.5);
  const auto b = random_batch(m.dims, 6, rng);
  const auto result = gradient_check(m, b, 1e-5);
  CHECK(result.coordinates_checked == m.parameter_count());
  CHECK(result.max_relative_error < 1e-4);

  SUBCASE("a corrupted coordinate is caught") {
    auto analytic = loss_and_gradient(m, b, Mode::Eval).gradient;
    Index target = 0;
    for (Index c = 0; c < analytic.parameter_count(); ++c) {
      if (std::abs(analytic.parameter(c)) > std::abs(analytic.parameter(target))) target = c;
    }
    analytic.parameter(target) *= 1.1;
    CHECK(compare_gradients(m, b, analytic, 1e-5).max_relative_error > 1e-4);
  }
}

TEST_CASE("Siamese symmetry") {
  std::mt19937_64 rng(12);
  const auto m = init_model<double>({6, 4, 5, 3}, 6, 0.5);
  auto b = random_batch(m.dims, 4, rng);
  const auto forward_order = loss_and_gradient(m, b, Mode::Eval);
  std::swap(b.left, b.right);
  const auto swapped = loss_and_gradient(m, b, Mode::Eval);
  CHECK(swapped.loss == doctest::Approx(forward_order.loss).epsilon(1e-12));
  for (int l = 0; l < 3; ++l) {
    CHECK(swapped.gradient.weights[l].isApprox(forward_order.gradient.weights[l], 1e-12));
  }
}

TEST_CASE("global norm clipping") {
  std::mt19937_64 rng(13);
  auto g = init_model<double>({6, 4, 5, 3}, 7, 10.0);
  CHECK(global_norm(g) > 5.0);
  clip_global_norm(g, 5.0);
  CHECK(global_norm(g) <= 5.0 + 1e-9);
  auto small = init_model<double>({6, 4, 5, 3}, 7, 1e-3);
  const auto before = small;
  clip_global_norm(small, 5.0);
  CHECK(small == before);
}

TEST_CASE("training on the two-cluster toy set") {
  const auto reps = toy_reps(1);
  const auto constraints = toy_constraints();
  TrainConfig cfg;
  cfg.seed = 21;
  auto model = init_model<double>(default_dims(4, 20), cfg.seed, cfg.init_std);

  TrainReport before;
  evaluate_constraints(model, reps, constraints, before);
  const auto report = train(model, reps, constraints, cfg);
  CHECK(report.epoch_loss.size() == 100);
  CHECK(report.mean_must_affinity > report.mean_cannot_affinity);
  CHECK(report.mean_cannot_affinity < before.mean_cannot_affinity);
  CHECK(report.epoch_loss.back() < report.epoch_loss.front());
  CHECK(report.max_clipped_norm <= 5.0 + 1e-9);
  for (double l : report.epoch_loss) CHECK(std::isfinite(l));

  auto again = init_model<double>(default_dims(4, 20), cfg.seed, cfg.init_std);
  train(again, reps, constraints, cfg);
  CHECK(again == model);
}

TEST_CASE("training edge cases") {
  const auto reps = toy_reps(2);
  TrainConfig cfg;
  auto model = init_model<double>({4, 5, 6, 2}, 1);
  const auto before = model;
  CHECK(train(model, reps, {}, cfg).warnings.size() == 1);
  CHECK(model == before);
  cfg.epochs = 0;
  train(model, reps, toy_constraints(), cfg);
  CHECK(model == before);
  const std::vector<Constraint> bad{make_constraint(0, 99, ConstraintKind::MustLink, ConstraintSource::User)};
  CHECK_THROWS_AS(train(model, reps, bad, TrainConfig{}), ValidationError);
}

TEST_CASE("embedding") {
  const auto reps = toy_reps(3);
  const auto m = init_model<double>({4, 5, 6, 3}, 1, 0.5);
  const auto e = embed_all(m, reps);
  CHECK(e.rows() == 8);
  for (Index i = 0; i < 8; ++i) CHECK(e.row(i).transpose().isApprox(forward(m, reps.z.row(i).transpose())));
  CHECK(e == embed_all(m, reps));
  Representations none;
  none.z.resize(0, 4);
  CHECK(embed_all(m, none).rows() == 0);
}

TEST_CASE("checkpoint round trip is byte-identical") {
  const auto m = init_model<float>({12, 8, 16, 4}, 4);
  std::ostringstream first;
  save_checkpoint(m, first);
  std::istringstream in(first.str());
  const auto loaded = load_checkpoint<float>(in);
  CHECK(loaded == m);
  std::ostringstream second;
  save_checkpoint(loaded, second);
  CHECK(first.str() == second.str());

  std::istringstream wrong_scalar(first.str());
  CHECK_THROWS_AS(load_checkpoint<double>(wrong_scalar), ParseError);
  std::istringstream truncated(first.str().substr(0, 40));
  CHECK_THROWS_AS(load_checkpoint<float>(truncated), ParseError);
}
