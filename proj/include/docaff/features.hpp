#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "docaff/document.hpp"

namespace docaff {

// Layout of the content block: character-class histogram, token-shape
// one-hot, hashed trigrams, then the line-context block (histogram + shape
// averaged over the other words of the line).
inline constexpr int kContentWordFixedDims = 12;
inline constexpr int kContentContextDims = 12;

struct FeatureConfig {
  int style_dim = 32;
  int content_dim = 64;
  int font_families = 20;
  double noise_std = 0.05;
  std::uint64_t noise_seed = 0;
  bool use_external_features = true;

  int trigram_dim() const noexcept { return content_dim - kContentWordFixedDims - kContentContextDims; }
  void check() const;
};

// Word representations, one row per word in document order.
struct Representations {
  std::vector<int> word_ids;
  Eigen::MatrixXd z;  // N x D
  bool external = false;

  Eigen::Index size() const noexcept { return z.rows(); }
  Eigen::Index dim() const noexcept { return z.cols(); }
};

Eigen::Vector4d encode_geometry(const WordUnit& word);

// Style features before noise and normalization: family one-hot folded into
// the first style_dim - 6 slots, then bold, italic, log(font size), rgb/255.
Eigen::VectorXd raw_style_vector(const StyleAttrs& attrs, const FeatureConfig& cfg);

// Style block. With attributes: raw vector plus seeded Gaussian noise keyed by
// (doc_id, word id), L2-normalized. Without: glyph-geometry fallback (height,
// per-character aspect, uppercase ratio), L2-normalized.
Eigen::VectorXd encode_style(const WordUnit& word, const std::optional<StyleAttrs>& attrs, std::string_view doc_id,
                             const FeatureConfig& cfg);

// Content block for a word in its line. `line` may be null for words without
// a line; the context block is then zero.
Eigen::VectorXd encode_content(const WordUnit& word, const ContextualLine* line, const DocumentModel& doc,
                               const FeatureConfig& cfg);

// Per-word z = [style, content, geometry]; external feature vectors replace
// style+content when present and enabled.
Representations assemble_representations(const DocumentModel& doc, const FeatureConfig& cfg);

// Vectors used for visual-style neighbourhoods: the external features when in
// use, otherwise the style block. One row per word in document order.
Eigen::MatrixXd style_matrix(const DocumentModel& doc, const FeatureConfig& cfg);

}  // namespace docaff
