#include "docaff/features.hpp"

#include <cmath>
#include <random>

#include "docaff/text_rules.hpp"

namespace docaff {

namespace {

void normalize_in_place(Eigen::Ref<Eigen::VectorXd> v) {
  const double n = v.norm();
  if (n > 0.0 && std::isfinite(n)) {
    v /= n;
  } else {
    v.setZero();
  }
}

std::array<double, kContentWordFixedDims> word_fixed_block(std::string_view text) {
  std::array<double, kContentWordFixedDims> out{};
  const auto hist = char_class_histogram(text);
  std::copy(hist.begin(), hist.end(), out.begin());
  out[kCharClassCount + static_cast<std::size_t>(token_shape(text))] = 1.0;
  return out;
}

}  // namespace

void FeatureConfig::check() const {
  if (style_dim < 7) throw ValidationError("style_dim must be at least 7", "features.style_dim");
  if (trigram_dim() < 1) {
    throw ValidationError("content_dim must exceed " +
                              std::to_string(kContentWordFixedDims + kContentContextDims),
                          "features.content_dim");
  }
  if (font_families < 1) throw ValidationError("font_families must be positive", "features.font_families");
  if (noise_std < 0.0) throw ValidationError("noise_std must be non-negative", "features.noise_std");
}

Eigen::Vector4d encode_geometry(const WordUnit& word) {
  return {word.bbox.x, word.bbox.y, word.bbox.w, word.bbox.h};
}

Eigen::VectorXd raw_style_vector(const StyleAttrs& attrs, const FeatureConfig& cfg) {
  const int slots = cfg.style_dim - 6;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.style_dim);
  const int family = ((attrs.font_family_id % slots) + slots) % slots;
  v[family] = 1.0;
  v[slots + 0] = attrs.bold ? 1.0 : 0.0;
  v[slots + 1] = attrs.italic ? 1.0 : 0.0;
  v[slots + 2] = std::log(std::max(attrs.font_size, 1e-3));
  for (int c = 0; c < 3; ++c) v[slots + 3 + c] = attrs.color_rgb[c] / 255.0;
  return v;
}

Eigen::VectorXd encode_style(const WordUnit& word, const std::optional<StyleAttrs>& attrs, std::string_view doc_id,
                             const FeatureConfig& cfg) {
  Eigen::VectorXd v;
  if (attrs) {
    v = raw_style_vector(*attrs, cfg);
    if (cfg.noise_std > 0.0) {
      std::uint64_t key = fnv1a(doc_id);
      key = fnv1a(std::to_string(word.id), key);
      key ^= cfg.noise_seed * 0x9e3779b97f4a7c15ULL;
      std::mt19937_64 rng(key);
      std::normal_distribution<double> noise(0.0, cfg.noise_std);
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += noise(rng);
    }
  } else {
    v = Eigen::VectorXd::Zero(cfg.style_dim);
    const double h = word.bbox.h;
    const auto chars = std::max<std::size_t>(1, codepoint_count(word.text));
    v[0] = h;
    v[1] = h > 0.0 ? word.bbox.w / (h * static_cast<double>(chars)) : 0.0;
    v[2] = uppercase_ratio(word.text);
  }
  normalize_in_place(v);
  return v;
}

Eigen::VectorXd encode_content(const WordUnit& word, const ContextualLine* line, const DocumentModel& doc,
                               const FeatureConfig& cfg) {
  const int trigrams = cfg.trigram_dim();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.content_dim);

  const auto fixed = word_fixed_block(word.text);
  for (int i = 0; i < kContentWordFixedDims; ++i) v[i] = fixed[i];

  // Lower-cased codepoint trigrams with boundary markers.
  std::vector<char32_t> cps{U'^'};
  for (char32_t cp : decode_utf8(word.text)) {
    if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
    cps.push_back(cp);
  }
  cps.push_back(U'$');
  double total = 0.0;
  for (std::size_t i = 0; i + 2 < cps.size(); ++i) {
    std::string key(reinterpret_cast<const char*>(&cps[i]), 3 * sizeof(char32_t));
    v[kContentWordFixedDims + static_cast<Eigen::Index>(fnv1a(key) % static_cast<std::uint64_t>(trigrams))] += 1.0;
    total += 1.0;
  }
  if (total > 0.0) v.segment(kContentWordFixedDims, trigrams) /= total;

  const Eigen::Index ctx = kContentWordFixedDims + trigrams;
  int others = 0;
  if (line) {
    for (int wid : line->word_ids) {
      if (wid == word.id) continue;
      const auto block = word_fixed_block(doc.word(wid).text);
      for (int i = 0; i < kContentContextDims; ++i) v[ctx + i] += block[i];
      ++others;
    }
  }

  auto word_part = v.head(ctx);
  normalize_in_place(word_part);
  if (others > 0) {
    auto context = v.segment(ctx, kContentContextDims);
    normalize_in_place(context);
    // Equal weight for word and context halves keeps the total norm at one.
    v *= 1.0 / std::sqrt(2.0);
  }
  return v;
}

Representations assemble_representations(const DocumentModel& doc, const FeatureConfig& cfg) {
  cfg.check();
  Representations reps;
  const auto n = static_cast<Eigen::Index>(doc.words.size());
  reps.word_ids.reserve(doc.words.size());
  for (const auto& w : doc.words) reps.word_ids.push_back(w.id);
  if (n == 0) {
    reps.z.resize(0, cfg.style_dim + cfg.content_dim + 4);
    return reps;
  }

  reps.external = cfg.use_external_features && doc.has_external_features();
  if (reps.external) {
    const std::size_t len = doc.words.front().feature.size();
    for (const auto& w : doc.words) {
      if (w.feature.size() != len || len == 0) {
        throw ValidationError("external feature vectors have inconsistent lengths (word " + std::to_string(w.id) + ")",
                              "words.feature");
      }
    }
    reps.z.resize(n, static_cast<Eigen::Index>(len) + 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& w = doc.words[static_cast<std::size_t>(i)];
      reps.z.row(i).head(static_cast<Eigen::Index>(len)) =
          Eigen::Map<const Eigen::RowVectorXd>(w.feature.data(), static_cast<Eigen::Index>(len));
      reps.z.row(i).tail(4) = encode_geometry(w).transpose();
    }
    return reps;
  }

  std::map<int, const ContextualLine*> lines;
  for (const auto& l : doc.lines) lines.emplace(l.id, &l);

  const int d = cfg.style_dim + cfg.content_dim + 4;
  reps.z.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& w = doc.words[static_cast<std::size_t>(i)];
    const ContextualLine* line = nullptr;
    if (w.line_id) {
      if (auto it = lines.find(*w.line_id); it != lines.end()) line = it->second;
    }
    reps.z.row(i).head(cfg.style_dim) = encode_style(w, w.style, doc.doc_id, cfg).transpose();
    reps.z.row(i).segment(cfg.style_dim, cfg.content_dim) = encode_content(w, line, doc, cfg).transpose();
    reps.z.row(i).tail(4) = encode_geometry(w).transpose();
  }
  return reps;
}

Eigen::MatrixXd style_matrix(const DocumentModel& doc, const FeatureConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(doc.words.size());
  if (cfg.use_external_features && doc.has_external_features()) {
    const auto len = static_cast<Eigen::Index>(doc.words.front().feature.size());
    Eigen::MatrixXd m(n, len);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& f = doc.words[static_cast<std::size_t>(i)].feature;
      if (static_cast<Eigen::Index>(f.size()) != len) {
        throw ValidationError("external feature vectors have inconsistent lengths", "words.feature");
      }
      m.row(i) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), len);
    }
    return m;
  }
  Eigen::MatrixXd m(n, cfg.style_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& w = doc.words[static_cast<std::size_t>(i)];
    m.row(i) = encode_style(w, w.style, doc.doc_id, cfg).transpose();
  }
  return m;
}

}  // namespace docaff
