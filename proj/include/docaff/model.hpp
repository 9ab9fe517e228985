#pragma once

// Siamese embedding network: three blocks D -> h1 -> h2 -> d, the first two
// Dropout-Linear-ReLU and the last Dropout-Linear. Everything is templated on
// the scalar type so the same code trains in float and checks gradients in
// double.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "docaff/constraints.hpp"
#include "docaff/features.hpp"

namespace docaff {

using Index = Eigen::Index;
using LayerDims = std::array<Index, 4>;

enum class Mode { Train, Eval };

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kProbabilityEpsilon = 1e-7;

template <typename Scalar>
struct EmbeddingModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  LayerDims dims{};
  std::array<Matrix, 3> weights;  // weights[l] is dims[l+1] x dims[l]
  std::array<Vector, 3> biases;

  static EmbeddingModel zeros(const LayerDims& dims) {
    EmbeddingModel m;
    m.dims = dims;
    for (int l = 0; l < 3; ++l) {
      m.weights[l] = Matrix::Zero(dims[l + 1], dims[l]);
      m.biases[l] = Vector::Zero(dims[l + 1]);
    }
    return m;
  }

  Index input_dim() const noexcept { return dims[0]; }
  Index latent_dim() const noexcept { return dims[3]; }

  Index parameter_count() const noexcept {
    Index n = 0;
    for (int l = 0; l < 3; ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
    return n;
  }

  // Visits every parameter block as a flat array, weights before biases per layer.
  template <typename Fn>
  void for_each_block(Fn&& fn) {
    for (int l = 0; l < 3; ++l) {
      fn(weights[l].data(), weights[l].size());
      fn(biases[l].data(), biases[l].size());
    }
  }
  template <typename Fn>
  void for_each_block(Fn&& fn) const {
    for (int l = 0; l < 3; ++l) {
      fn(weights[l].data(), weights[l].size());
      fn(biases[l].data(), biases[l].size());
    }
  }

  Scalar& parameter(Index flat) {
    for (int l = 0; l < 3; ++l) {
      if (flat < weights[l].size()) return weights[l].data()[flat];
      flat -= weights[l].size();
      if (flat < biases[l].size()) return biases[l].data()[flat];
      flat -= biases[l].size();
    }
    throw std::out_of_range("parameter index out of range");
  }
  Scalar parameter(Index flat) const { return const_cast<EmbeddingModel*>(this)->parameter(flat); }

  bool all_finite() const {
    bool ok = true;
    for_each_block([&](const Scalar* p, Index n) {
      for (Index i = 0; i < n; ++i) ok = ok && std::isfinite(p[i]);
    });
    return ok;
  }

  bool operator==(const EmbeddingModel& o) const {
    if (dims != o.dims) return false;
    for (int l = 0; l < 3; ++l) {
      if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
    }
    return true;
  }
};

// Same shape as the model; used for gradients and Adam moments.
template <typename Scalar>
using Gradient = EmbeddingModel<Scalar>;

inline LayerDims default_dims(Index input_dim, Index latent_dim, Index hidden1 = 50, Index hidden2 = 2000) {
  return {input_dim, hidden1, hidden2, latent_dim};
}

// Weights ~ N(0, init_std^2) from a seeded generator, biases zero.
template <typename Scalar>
EmbeddingModel<Scalar> init_model(const LayerDims& dims, std::uint64_t seed, double init_std = 0.01) {
  for (Index d : dims) {
    if (d < 1) throw std::invalid_argument("layer dimensions must be positive");
  }
  auto m = EmbeddingModel<Scalar>::zeros(dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  for (int l = 0; l < 3; ++l) {
    auto& w = m.weights[l];
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(normal(rng));
  }
  return m;
}

template <typename Scalar>
EmbeddingModel<Scalar> init_model(Index input_dim, Index latent_dim, std::uint64_t seed) {
  return init_model<Scalar>(default_dims(input_dim, latent_dim), seed);
}

// Inverted-dropout mask source: kept units are scaled by 1/(1-p). Each 64-bit
// draw supplies four 16-bit uniforms.
class DropoutSampler {
 public:
  DropoutSampler(double p, std::uint64_t seed) : p_(p), rng_(seed) {
    threshold_ = static_cast<std::uint32_t>(std::lround((1.0 - p) * 65536.0));
  }

  double rate() const noexcept { return p_; }

  // Fills an already-sized matrix with a fresh mask.
  template <typename Matrix>
  void fill(Matrix& m) {
    using Scalar = typename Matrix::Scalar;
    const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - p_));
    Scalar* data = m.data();
    const Index n = m.size();
    for (Index i = 0; i < n; i += 4) {
      std::uint64_t bits = rng_();
      for (Index k = i; k < std::min(i + 4, n); ++k, bits >>= 16) {
        data[k] = static_cast<std::uint32_t>(bits & 0xffffu) < threshold_ ? keep : Scalar(0);
      }
    }
  }

  template <typename Matrix>
  Matrix mask(Index rows, Index cols) {
    Matrix m(rows, cols);
    fill(m);
    return m;
  }

 private:
  double p_;
  std::uint32_t threshold_;
  std::mt19937_64 rng_;
};

// Intermediate values kept for backpropagation. Column b is sample b.
// inputs[l] is the (dropped-out) input of linear layer l; inputs[1] and
// inputs[2] are the post-ReLU activations after their masks.
template <typename Scalar>
struct ForwardPass {
  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  std::array<Matrix, 3> inputs;
  std::array<Matrix, 3> masks;  // empty when dropout is off
  Matrix output;
};

// Buffers are reused across calls so steady-state training does not allocate.
template <typename Scalar, typename Derived>
void forward_into(const EmbeddingModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x, Mode mode,
                  DropoutSampler* dropout, ForwardPass<Scalar>& pass) {
  if (x.rows() != model.input_dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(x.rows()) + " does not match model input " +
                                std::to_string(model.input_dim()));
  }
  const bool drop = mode == Mode::Train && dropout != nullptr && dropout->rate() > 0.0;
  pass.inputs[0] = x.template cast<Scalar>();
  for (int l = 0; l < 3; ++l) {
    auto& in = pass.inputs[l];
    if (drop) {
      pass.masks[l].resize(in.rows(), in.cols());
      dropout->fill(pass.masks[l]);
      in.array() *= pass.masks[l].array();
    } else {
      pass.masks[l].resize(0, 0);
    }
    auto& out = l < 2 ? pass.inputs[l + 1] : pass.output;
    out.noalias() = model.weights[l] * in;
    out.colwise() += model.biases[l];
    if (l < 2) out = out.cwiseMax(Scalar(0));
  }
}

template <typename Scalar, typename Derived>
ForwardPass<Scalar> forward_batch(const EmbeddingModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x, Mode mode,
                                  DropoutSampler* dropout = nullptr) {
  ForwardPass<Scalar> pass;
  forward_into(model, x, mode, dropout, pass);
  return pass;
}

template <typename Scalar, typename Derived>
typename EmbeddingModel<Scalar>::Vector forward(const EmbeddingModel<Scalar>& model,
                                                const Eigen::MatrixBase<Derived>& z, Mode mode = Mode::Eval,
                                                DropoutSampler* dropout = nullptr) {
  return forward_batch(model, z, mode, dropout).output.col(0);
}

template <typename Scalar>
struct BackwardScratch {
  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  std::array<Matrix, 3> deltas;  // dLoss / d(pre-activation) per layer
  Matrix d_input;
};

// Gradient of the parameters given dLoss/dOutput. A dropped unit has a zero
// input, so the ReLU gate can be read from the masked input.
template <typename Scalar>
void backward_into(const EmbeddingModel<Scalar>& model, const ForwardPass<Scalar>& pass,
                   const typename EmbeddingModel<Scalar>::Matrix& d_output, Gradient<Scalar>& grad,
                   BackwardScratch<Scalar>& scratch) {
  grad.dims = model.dims;
  scratch.deltas[2] = d_output;
  for (int l = 2; l >= 0; --l) {
    const auto& delta = scratch.deltas[l];
    grad.weights[l].noalias() = delta * pass.inputs[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    scratch.d_input.noalias() = model.weights[l].transpose() * delta;
    if (pass.masks[l].size() > 0) scratch.d_input.array() *= pass.masks[l].array();
    scratch.deltas[l - 1] = (pass.inputs[l].array() > Scalar(0)).select(scratch.d_input, Scalar(0));
  }
}

template <typename Scalar>
Gradient<Scalar> backward(const EmbeddingModel<Scalar>& model, const ForwardPass<Scalar>& pass,
                          const typename EmbeddingModel<Scalar>::Matrix& d_output) {
  Gradient<Scalar> grad;
  BackwardScratch<Scalar> scratch;
  backward_into(model, pass, d_output, grad, scratch);
  return grad;
}

template <typename DerivedA, typename DerivedB>
double affinity(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("affinity: dimension mismatch");
  return std::exp(-static_cast<double>((u - v).squaredNorm()));
}

// Cross-entropy of one constrained pair as a function of the squared latent
// distance s, with the affinity exp(-s) clamped to [eps, 1 - eps].
inline double pair_loss(double squared_distance, int label) {
  const double s_low = -std::log1p(-kProbabilityEpsilon);
  const double s_high = -std::log(kProbabilityEpsilon);
  const double s = std::clamp(squared_distance, s_low, s_high);
  return label == 1 ? s : -std::log(-std::expm1(-s));
}

// d pair_loss / d s; zero where the clamp is active.
inline double pair_loss_derivative(double squared_distance, int label) {
  const double s_low = -std::log1p(-kProbabilityEpsilon);
  const double s_high = -std::log(kProbabilityEpsilon);
  if (squared_distance <= s_low || squared_distance >= s_high) return 0.0;
  return label == 1 ? 1.0 : -1.0 / std::expm1(squared_distance);
}

// Constrained pairs as column-aligned input matrices.
template <typename Scalar>
struct PairBatch {
  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  Matrix left;   // D x B
  Matrix right;  // D x B
  std::vector<int> labels;

  Index size() const noexcept { return left.cols(); }
};

template <typename Scalar>
struct LossAndGradient {
  double loss = 0.0;
  Gradient<Scalar> gradient;
};

template <typename Scalar>
struct TrainWorkspace {
  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  Matrix x;
  ForwardPass<Scalar> pass;
  Matrix d_output;
  BackwardScratch<Scalar> scratch;
  Gradient<Scalar> gradient;
};

// Both twins run as one forward pass over [left | right]; dropout masks are
// drawn per column so the twins see independent masks. The gradient is left
// in ws.gradient; returns the summed loss.
template <typename Scalar>
double loss_and_gradient_into(const EmbeddingModel<Scalar>& model, const PairBatch<Scalar>& batch, Mode mode,
                              DropoutSampler* dropout, TrainWorkspace<Scalar>& ws) {
  const Index b = batch.size();
  ws.x.resize(model.input_dim(), 2 * b);
  ws.x.leftCols(b) = batch.left;
  ws.x.rightCols(b) = batch.right;
  forward_into(model, ws.x, mode, dropout, ws.pass);

  const auto& out = ws.pass.output;
  ws.d_output.resize(model.latent_dim(), 2 * b);
  double loss = 0.0;
  for (Index k = 0; k < b; ++k) {
    const auto diff = out.col(k) - out.col(b + k);
    const double s = static_cast<double>(diff.squaredNorm());
    const int label = batch.labels[static_cast<std::size_t>(k)];
    loss += pair_loss(s, label);
    const auto g = static_cast<Scalar>(2.0 * pair_loss_derivative(s, label));
    ws.d_output.col(k) = g * diff;
    ws.d_output.col(b + k) = -ws.d_output.col(k);
  }
  backward_into(model, ws.pass, ws.d_output, ws.gradient, ws.scratch);
  return loss;
}

template <typename Scalar>
LossAndGradient<Scalar> loss_and_gradient(const EmbeddingModel<Scalar>& model, const PairBatch<Scalar>& batch,
                                          Mode mode, DropoutSampler* dropout = nullptr) {
  TrainWorkspace<Scalar> ws;
  const double loss = loss_and_gradient_into(model, batch, mode, dropout, ws);
  return {loss, std::move(ws.gradient)};
}

// Sum of per-pair terms.
template <typename Scalar>
double batch_loss(const EmbeddingModel<Scalar>& model, const PairBatch<Scalar>& batch, Mode mode = Mode::Eval,
                  DropoutSampler* dropout = nullptr) {
  if (batch.size() == 0) throw std::invalid_argument("batch_loss: empty batch");
  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  const Index b = batch.size();
  Matrix x(model.input_dim(), 2 * b);
  x.leftCols(b) = batch.left;
  x.rightCols(b) = batch.right;
  const Matrix out = forward_batch(model, x, mode, dropout).output;
  double loss = 0.0;
  for (Index k = 0; k < b; ++k) {
    loss += pair_loss(static_cast<double>((out.col(k) - out.col(b + k)).squaredNorm()),
                      batch.labels[static_cast<std::size_t>(k)]);
  }
  return loss;
}

template <typename Scalar>
double global_norm(const Gradient<Scalar>& g) {
  double sq = 0.0;
  g.for_each_block([&](const Scalar* p, Index n) {
    for (Index i = 0; i < n; ++i) sq += static_cast<double>(p[i]) * static_cast<double>(p[i]);
  });
  return std::sqrt(sq);
}

// Rescales g so its global L2 norm is at most max_norm. Returns the norm
// before clipping.
template <typename Scalar>
double clip_global_norm(Gradient<Scalar>& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const auto scale = static_cast<Scalar>(max_norm / norm);
    g.for_each_block([&](Scalar* p, Index n) {
      for (Index i = 0; i < n; ++i) p[i] *= scale;
    });
  }
  return norm;
}

template <typename Scalar>
class Adam {
 public:
  Adam(const LayerDims& dims, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(EmbeddingModel<Scalar>::zeros(dims)), v_(EmbeddingModel<Scalar>::zeros(dims)), lr_(lr), beta1_(beta1),
        beta2_(beta2), eps_(eps) {}

  void step(EmbeddingModel<Scalar>& model, const Gradient<Scalar>& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(beta1_);
    const auto b2 = static_cast<Scalar>(beta2_);
    const auto step_size = static_cast<Scalar>(lr_ / c1);
    const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
    const auto eps = static_cast<Scalar>(eps_);
    for (int l = 0; l < 3; ++l) {
      update(model.weights[l].array(), g.weights[l].array(), m_.weights[l].array(), v_.weights[l].array(), b1, b2,
             step_size, inv_c2, eps);
      update(model.biases[l].array(), g.biases[l].array(), m_.biases[l].array(), v_.biases[l].array(), b1, b2,
             step_size, inv_c2, eps);
    }
  }

  long steps() const noexcept { return t_; }

 private:
  template <typename P, typename G, typename M, typename V>
  static void update(P&& param, const G& grad, M&& m, V&& v, Scalar b1, Scalar b2, Scalar step_size, Scalar inv_c2,
                     Scalar eps) {
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v + (Scalar(1) - b2) * grad.square();
    param -= step_size * m / ((v * inv_c2).sqrt() + eps);
  }

  EmbeddingModel<Scalar> m_;
  EmbeddingModel<Scalar> v_;
  long t_ = 0;
  double lr_, beta1_, beta2_, eps_;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-4;
  double dropout = 0.2;
  double grad_clip_norm = 5.0;
  double init_std = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  Index hidden1 = 50;
  Index hidden2 = 2000;
  Index latent_dim = 20;
  std::uint64_t seed = 0;

  void check() const {
    if (epochs < 0) throw ValidationError("epochs must be non-negative", "train.epochs");
    if (batch_size < 1) throw ValidationError("batch_size must be positive", "train.batch_size");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive", "train.learning_rate");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)", "train.dropout");
    if (!(grad_clip_norm > 0.0)) throw ValidationError("grad_clip_norm must be positive", "train.grad_clip_norm");
    if (!(init_std > 0.0)) throw ValidationError("init_std must be positive", "train.init_std");
    if (hidden1 < 1 || hidden2 < 1 || latent_dim < 1) {
      throw ValidationError("layer sizes must be positive", "train.latent_dim");
    }
  }
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-pair loss
  double seconds = 0.0;
  long steps = 0;
  double max_clipped_norm = 0.0;  // largest post-clip gradient norm seen
  double must_satisfied = 0.0;    // fraction of must-links with affinity >= 0.5
  double cannot_satisfied = 0.0;  // fraction of cannot-links with affinity < 0.5
  double mean_must_affinity = 0.0;
  double mean_cannot_affinity = 0.0;
  std::vector<std::string> warnings;
};

// Maps word ids to rows of a representation matrix.
inline std::map<int, Index> row_index(const std::vector<int>& word_ids) {
  std::map<int, Index> index;
  for (std::size_t i = 0; i < word_ids.size(); ++i) index.emplace(word_ids[i], static_cast<Index>(i));
  return index;
}

// Gathers the constrained pairs into a batch. `columns` holds one word per
// column (D x N).
template <typename Scalar, typename Derived>
void make_batch_into(const Eigen::MatrixBase<Derived>& columns, const std::map<int, Index>& rows,
                     std::span<const Constraint> constraints, PairBatch<Scalar>& batch) {
  const auto b = static_cast<Index>(constraints.size());
  batch.left.resize(columns.rows(), b);
  batch.right.resize(columns.rows(), b);
  batch.labels.clear();
  for (Index k = 0; k < b; ++k) {
    const auto& c = constraints[static_cast<std::size_t>(k)];
    const auto li = rows.find(c.i);
    const auto ri = rows.find(c.j);
    if (li == rows.end() || ri == rows.end()) {
      throw ValidationError("constraint references an unknown word (" + std::to_string(c.i) + ", " +
                                std::to_string(c.j) + ")",
                            "constraints");
    }
    batch.left.col(k) = columns.col(li->second).template cast<Scalar>();
    batch.right.col(k) = columns.col(ri->second).template cast<Scalar>();
    batch.labels.push_back(c.label());
  }
}

template <typename Scalar, typename Derived>
PairBatch<Scalar> make_batch(const Eigen::MatrixBase<Derived>& columns, const std::map<int, Index>& rows,
                             std::span<const Constraint> constraints) {
  PairBatch<Scalar> batch;
  make_batch_into(columns, rows, constraints, batch);
  return batch;
}

template <typename Scalar>
PairBatch<Scalar> make_batch(const Representations& reps, std::span<const Constraint> constraints) {
  return make_batch<Scalar>(reps.z.transpose(), row_index(reps.word_ids), constraints);
}

// EVAL-mode embedding of every representation, one row per word.
template <typename Scalar>
Eigen::MatrixXd embed_all(const EmbeddingModel<Scalar>& model, const Representations& reps) {
  Eigen::MatrixXd out(reps.size(), model.latent_dim());
  if (reps.size() == 0) return out;
  if (reps.dim() != model.input_dim()) {
    throw std::invalid_argument("representation dimension does not match the model input");
  }
  constexpr Index kChunk = 256;
  for (Index start = 0; start < reps.size(); start += kChunk) {
    const Index n = std::min(kChunk, reps.size() - start);
    const typename EmbeddingModel<Scalar>::Matrix x = reps.z.middleRows(start, n).transpose().template cast<Scalar>();
    out.middleRows(start, n) = forward_batch(model, x, Mode::Eval).output.transpose().template cast<double>();
  }
  return out;
}

// Mean affinities and satisfaction rates of a constraint set under the model.
template <typename Scalar>
void evaluate_constraints(const EmbeddingModel<Scalar>& model, const Representations& reps,
                          std::span<const Constraint> constraints, TrainReport& report) {
  const Eigen::MatrixXd latent = embed_all(model, reps);
  const auto rows = row_index(reps.word_ids);
  double must_sum = 0.0, cannot_sum = 0.0;
  std::size_t must_n = 0, cannot_n = 0, must_ok = 0, cannot_ok = 0;
  for (const auto& c : constraints) {
    const double a = affinity(latent.row(rows.at(c.i)), latent.row(rows.at(c.j)));
    if (c.kind == ConstraintKind::MustLink) {
      must_sum += a;
      ++must_n;
      must_ok += a >= 0.5 ? 1 : 0;
    } else {
      cannot_sum += a;
      ++cannot_n;
      cannot_ok += a < 0.5 ? 1 : 0;
    }
  }
  report.mean_must_affinity = must_n ? must_sum / static_cast<double>(must_n) : 0.0;
  report.mean_cannot_affinity = cannot_n ? cannot_sum / static_cast<double>(cannot_n) : 0.0;
  report.must_satisfied = must_n ? static_cast<double>(must_ok) / static_cast<double>(must_n) : 0.0;
  report.cannot_satisfied = cannot_n ? static_cast<double>(cannot_ok) / static_cast<double>(cannot_n) : 0.0;
}

// Mini-batch Adam on the Siamese objective: seeded shuffle each epoch, global
// gradient-norm clipping, one optimizer step per batch.
template <typename Scalar>
TrainReport train(EmbeddingModel<Scalar>& model, const Representations& reps, std::span<const Constraint> constraints,
                  const TrainConfig& cfg) {
  cfg.check();
  const auto started = std::chrono::steady_clock::now();
  TrainReport report;
  if (constraints.empty()) {
    report.warnings.emplace_back("empty constraint set; training skipped");
    return report;
  }
  if (reps.dim() != model.input_dim()) {
    throw std::invalid_argument("representation dimension does not match the model input");
  }

  using Matrix = typename EmbeddingModel<Scalar>::Matrix;
  const Matrix columns = reps.z.transpose().template cast<Scalar>();
  const auto rows = row_index(reps.word_ids);
  for (const auto& c : constraints) {
    if (!rows.count(c.i) || !rows.count(c.j)) {
      throw ValidationError("constraint references an unknown word (" + std::to_string(c.i) + ", " +
                                std::to_string(c.j) + ")",
                            "constraints");
    }
  }

  std::mt19937_64 shuffle_rng(cfg.seed);
  DropoutSampler dropout(cfg.dropout, cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
  Adam<Scalar> adam(model.dims, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);

  std::vector<Constraint> pool(constraints.begin(), constraints.end());
  PairBatch<Scalar> batch;
  TrainWorkspace<Scalar> ws;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pool.begin(), pool.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < pool.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t n = std::min(pool.size() - start, static_cast<std::size_t>(cfg.batch_size));
      make_batch_into(columns, rows, std::span<const Constraint>(pool).subspan(start, n), batch);
      const double loss = loss_and_gradient_into(model, batch, Mode::Train, &dropout, ws);
      auto& grad = ws.gradient;
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch starting at " << start;
        throw TrainingError(msg.str());
      }
      clip_global_norm(grad, cfg.grad_clip_norm);
      report.max_clipped_norm = std::max(report.max_clipped_norm, global_norm(grad));
      adam.step(model, grad);
      epoch_loss += loss;
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(pool.size()));
  }
  if (!model.all_finite()) throw TrainingError("model parameters became non-finite");

  report.steps = adam.steps();
  evaluate_constraints(model, reps, constraints, report);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  Index coordinates_checked = 0;
  Index worst_coordinate = -1;
};

// |a - b| / max(|a|, |b|, 1e-6)
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Compares an analytic gradient against central differences of batch_loss
// (dropout off). Checks every coordinate when the model has at most
// `max_coordinates` parameters, otherwise a seeded random subset.
template <typename Scalar>
GradientCheckResult compare_gradients(const EmbeddingModel<Scalar>& model, const PairBatch<Scalar>& batch,
                                      const Gradient<Scalar>& analytic, double h, Index max_coordinates = 10000,
                                      std::uint64_t seed = 0) {
  std::vector<Index> coords(static_cast<std::size_t>(model.parameter_count()));
  std::iota(coords.begin(), coords.end(), Index{0});
  if (static_cast<Index>(coords.size()) > max_coordinates) {
    std::mt19937_64 rng(seed);
    std::vector<Index> subset;
    std::sample(coords.begin(), coords.end(), std::back_inserter(subset), max_coordinates, rng);
    coords = std::move(subset);
  }
  GradientCheckResult result;
  EmbeddingModel<Scalar> probe = model;
  for (Index c : coords) {
    const Scalar original = probe.parameter(c);
    probe.parameter(c) = original + static_cast<Scalar>(h);
    const double up = batch_loss(probe, batch, Mode::Eval);
    probe.parameter(c) = original - static_cast<Scalar>(h);
    const double down = batch_loss(probe, batch, Mode::Eval);
    probe.parameter(c) = original;
    const double numeric = (up - down) / (2.0 * h);
    const double err = relative_error(static_cast<double>(analytic.parameter(c)), numeric);
    if (result.worst_coordinate < 0 || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_coordinate = c;
    }
    ++result.coordinates_checked;
  }
  return result;
}

template <typename Scalar>
GradientCheckResult gradient_check(const EmbeddingModel<Scalar>& model, const PairBatch<Scalar>& batch, double h,
                                   Index max_coordinates = 10000, std::uint64_t seed = 0) {
  const auto analytic = loss_and_gradient(model, batch, Mode::Eval).gradient;
  return compare_gradients(model, batch, analytic, h, max_coordinates, seed);
}

// Binary checkpoint: 8-byte magic, u32 version, u32 scalar size, four u64
// layer sizes, then per layer the column-major weights and the bias, in host
// byte order.
inline constexpr char kCheckpointMagic[8] = {'D', 'A', 'F', 'F', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Scalar>
void save_checkpoint(const EmbeddingModel<Scalar>& model, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint32_t header[2] = {kCheckpointVersion, static_cast<std::uint32_t>(sizeof(Scalar))};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  for (Index d : model.dims) {
    const auto v = static_cast<std::uint64_t>(d);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  model.for_each_block([&](const Scalar* p, Index n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * static_cast<Index>(sizeof(Scalar))));
  });
  if (!out) throw std::runtime_error("failed to write checkpoint");
}

template <typename Scalar>
EmbeddingModel<Scalar> load_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) throw ParseError("checkpoint", "bad magic");
  std::uint32_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] != kCheckpointVersion) throw ParseError("checkpoint", "unsupported version");
  if (header[1] != sizeof(Scalar)) throw ParseError("checkpoint", "scalar size mismatch");
  LayerDims dims{};
  for (Index& d : dims) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in || v == 0 || v > (1u << 24)) throw ParseError("checkpoint", "bad layer size");
    d = static_cast<Index>(v);
  }
  auto model = EmbeddingModel<Scalar>::zeros(dims);
  model.for_each_block([&](Scalar* p, Index n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * static_cast<Index>(sizeof(Scalar))));
  });
  if (!in) throw ParseError("checkpoint", "truncated parameters");
  return model;
}

}  // namespace docaff
