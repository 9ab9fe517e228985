#include "docaff/document.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "docaff/union_find.hpp"

namespace docaff {

BBox union_box(const BBox& a, const BBox& b) noexcept {
  const double x0 = std::min(a.x, b.x);
  const double y0 = std::min(a.y, b.y);
  const double x1 = std::max(a.right(), b.right());
  const double y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

bool DocumentModel::has_external_features() const noexcept {
  return !words.empty() &&
         std::any_of(words.begin(), words.end(), [](const WordUnit& w) { return !w.feature.empty(); });
}

std::size_t DocumentModel::word_index(int word_id) const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].id == word_id) return i;
  }
  throw ValidationError("unknown word id " + std::to_string(word_id), "word_id");
}

std::map<int, std::size_t> DocumentModel::word_index_map() const {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < words.size(); ++i) index.emplace(words[i].id, i);
  return index;
}

void validate(const DocumentModel& doc) {
  constexpr double kTol = 1e-6;
  if (!(doc.aspect_ratio > 0.0) || !std::isfinite(doc.aspect_ratio)) {
    throw ValidationError("aspect_ratio must be positive", "aspect_ratio");
  }
  std::set<int> ids;
  for (const auto& w : doc.words) {
    if (!ids.insert(w.id).second) {
      throw ValidationError("duplicate word id " + std::to_string(w.id), "words.id");
    }
    if (w.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw ValidationError("word " + std::to_string(w.id) + " has empty text", "words.text");
    }
    const BBox& b = w.bbox;
    if (b.x < 0.0 || b.y < 0.0 || b.w <= 0.0 || b.h <= 0.0 || b.right() > 1.0 + kTol ||
        b.bottom() > 1.0 + kTol) {
      throw ValidationError("word " + std::to_string(w.id) + " has an invalid bbox", "words.bbox");
    }
  }
  std::set<int> line_ids;
  for (const auto& line : doc.lines) {
    if (!line_ids.insert(line.id).second) {
      throw ValidationError("duplicate line id " + std::to_string(line.id), "lines.id");
    }
    if (line.word_ids.empty()) throw ValidationError("empty contextual line", "lines.word_ids");
  }
  for (const auto& w : doc.words) {
    if (w.line_id && !line_ids.count(*w.line_id)) {
      throw ValidationError("word " + std::to_string(w.id) + " references a missing line", "words.line_id");
    }
  }
}

double vertical_overlap(const BBox& a, const BBox& b) noexcept {
  const double top = std::max(a.y, b.y);
  const double bottom = std::min(a.bottom(), b.bottom());
  const double overlap = bottom - top;
  if (overlap <= 0.0) return 0.0;
  return std::min(1.0, overlap / std::min(a.h, b.h));
}

double line_weight(const BBox& a, const BBox& b, double aspect_ratio) noexcept {
  const double gap = std::max(0.0, b.x - a.right());
  return gap * aspect_ratio / std::max(a.h, b.h);
}

std::vector<ContextualLine> build_contextual_lines(DocumentModel& doc, const LineParams& params) {
  const std::size_t n = doc.words.size();
  UnionFind uf(n);

  for (std::size_t i = 0; i < n; ++i) {
    const WordUnit& a = doc.words[i];
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const WordUnit& b = doc.words[j];
      const bool right_of = b.bbox.x > a.bbox.x || (b.bbox.x == a.bbox.x && b.id > a.id);
      if (!right_of || vertical_overlap(a.bbox, b.bbox) < params.overlap_min) continue;
      if (best == n) {
        best = j;
        continue;
      }
      const WordUnit& cur = doc.words[best];
      if (b.bbox.x < cur.bbox.x || (b.bbox.x == cur.bbox.x && b.id < cur.id)) best = j;
    }
    if (best != n && line_weight(a.bbox, doc.words[best].bbox, doc.aspect_ratio) < params.threshold) {
      uf.unite(i, best);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

  std::vector<ContextualLine> lines;
  lines.reserve(groups.size());
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end(), [&](std::size_t l, std::size_t r) {
      const auto& a = doc.words[l];
      const auto& b = doc.words[r];
      return a.bbox.x != b.bbox.x ? a.bbox.x < b.bbox.x : a.id < b.id;
    });
    ContextualLine line;
    line.bbox = doc.words[members.front()].bbox;
    for (std::size_t m : members) {
      line.word_ids.push_back(doc.words[m].id);
      line.bbox = union_box(line.bbox, doc.words[m].bbox);
    }
    lines.push_back(std::move(line));
  }

  // Reading order: top to bottom, then left to right.
  std::sort(lines.begin(), lines.end(), [](const ContextualLine& a, const ContextualLine& b) {
    if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
    if (a.bbox.x != b.bbox.x) return a.bbox.x < b.bbox.x;
    return a.word_ids.front() < b.word_ids.front();
  });

  const auto index = doc.word_index_map();
  for (std::size_t l = 0; l < lines.size(); ++l) {
    lines[l].id = static_cast<int>(l);
    for (int wid : lines[l].word_ids) doc.words[index.at(wid)].line_id = lines[l].id;
  }
  doc.lines = lines;
  return lines;
}

}  // namespace docaff
