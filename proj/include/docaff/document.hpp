#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace docaff {

// Raised when an input file cannot be decoded. `field` names the offending
// JSON path when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Raised when decoded data violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message, std::string field = {})
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Normalized page box, top-left origin. All coordinates are fractions of the
// page width (x, w) or height (y, h).
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  bool operator==(const BBox&) const = default;
};

BBox union_box(const BBox& a, const BBox& b) noexcept;

struct StyleAttrs {
  int font_family_id = 0;
  bool bold = false;
  bool italic = false;
  double font_size = 12.0;
  std::array<int, 3> color_rgb{0, 0, 0};
  // Highlight strength set by emphasis edits; not part of the style encoding.
  double emphasis = 0.0;

  bool operator==(const StyleAttrs&) const = default;
};

struct WordUnit {
  int id = 0;
  std::string text;
  BBox bbox;
  std::optional<int> line_id;
  std::optional<StyleAttrs> style;
  std::vector<double> feature;  // externally supplied embedding, may be empty

  bool operator==(const WordUnit&) const = default;
};

struct ContextualLine {
  int id = 0;
  std::vector<int> word_ids;  // ascending bbox.x, ties by id
  BBox bbox;

  bool operator==(const ContextualLine&) const = default;
};

struct DocumentModel {
  std::string doc_id;
  double aspect_ratio = 1.0;  // image width / image height
  std::vector<WordUnit> words;
  std::vector<ContextualLine> lines;

  bool has_external_features() const noexcept;
  // Index of the word with the given id in `words`; throws when absent.
  std::size_t word_index(int word_id) const;
  const WordUnit& word(int word_id) const { return words[word_index(word_id)]; }
  std::map<int, std::size_t> word_index_map() const;

  bool operator==(const DocumentModel&) const = default;
};

// Warnings produced while decoding (e.g. clamped boxes).
struct IngestResult {
  DocumentModel doc;
  std::vector<std::string> warnings;
};

// Decodes the JSON document file. Lines are left empty.
IngestResult ingest_document(std::string_view file_bytes);

// Checks every document invariant; throws ValidationError on the first failure.
void validate(const DocumentModel& doc);

// Overlap of the y-intervals divided by the smaller height; 0 when disjoint.
double vertical_overlap(const BBox& a, const BBox& b) noexcept;

// s·r / max(h_a, h_b) where s is the horizontal gap from a's right edge to b's
// left edge, clamped at zero.
double line_weight(const BBox& a, const BBox& b, double aspect_ratio) noexcept;

struct LineParams {
  double threshold = 0.1;
  double overlap_min = 0.5;
};

// Links each word to its nearest right neighbour that overlaps vertically by
// at least `overlap_min`; the link survives when its weight is below
// `threshold`. Lines are the connected components. Assigns `line_id` on every
// word and returns the lines (also stored in doc.lines).
std::vector<ContextualLine> build_contextual_lines(DocumentModel& doc, const LineParams& params = {});

}  // namespace docaff
