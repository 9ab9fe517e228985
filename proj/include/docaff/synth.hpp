#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docaff/clustering.hpp"
#include "docaff/config.hpp"
#include "docaff/document.hpp"

namespace docaff {

enum class Template { Menu, Schedule, SimpleDoc, DenseDoc };

std::string_view to_string(Template t) noexcept;
std::optional<Template> template_from_string(std::string_view name) noexcept;

// Token generators available to categories.
enum class TokenKind { Title, Section, Name, Price, Prose, Time, Person, Heading, Event, Date, PageNumber };

struct CategorySpec {
  std::string label;
  StyleAttrs style;
  TokenKind tokens = TokenKind::Prose;
  int count = 0;  // template-specific: entries, paragraphs or lines
};

struct SynthSpec {
  Template kind = Template::Menu;
  std::uint64_t seed = 1;
  int items = 10;  // menu items, schedule rows, or paragraphs
  int columns = 1;
  double row_pitch = 1.5;    // row advance in multiples of the row height
  double jitter_std = 3e-4;  // positional jitter, page fractions
  double aspect_ratio = 0.75;
  std::vector<CategorySpec> categories;
};

// Default categories, styles and counts for a template. Font families are a
// seeded permutation so documents differ in appearance.
SynthSpec make_spec(Template kind, int items, std::uint64_t seed);

// word id -> category label
struct GroundTruth {
  std::map<int, std::string> labels;

  std::vector<std::string> categories() const;
};

struct SynthDocument {
  DocumentModel doc;
  GroundTruth truth;
};

// Deterministic for a given spec. Categories with count 0 are omitted. Throws
// ValidationError when the layout does not fit on the page.
SynthDocument generate_document(const SynthSpec& spec);

// (1/N) * sum over clusters of the largest category overlap.
double purity(const ClusterAssignment& assignment, const GroundTruth& truth);

// Scribbles needed to isolate one category: one per extra fragment to merge
// plus two per mixed cluster to split.
int scribble_estimate(const ClusterAssignment& assignment, const GroundTruth& truth, std::string_view category);

struct BenchmarkRow {
  std::string template_name;
  std::uint64_t seed = 0;
  std::size_t words = 0;
  std::size_t lines = 0;
  std::size_t clusters = 0;
  std::size_t constraints = 0;
  double purity = 0.0;
  std::map<std::string, int> scribbles;  // per category
  double seconds = 0.0;
};

struct TemplateSummary {
  std::string template_name;
  std::size_t documents = 0;
  double mean_purity = 0.0;
  double mean_words = 0.0;
  double mean_seconds = 0.0;
  std::map<std::string, double> mean_scribbles;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<TemplateSummary> summaries;
  double mean_purity = 0.0;
  std::map<std::string, double> mean_scribbles;  // per category label, all documents
  double total_seconds = 0.0;
};

BenchmarkReport run_benchmark(const std::vector<SynthSpec>& corpus, const PipelineConfig& cfg);

std::string benchmark_csv(const BenchmarkReport& report);

}  // namespace docaff
