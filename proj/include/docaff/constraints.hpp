#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "docaff/document.hpp"
#include "docaff/text_rules.hpp"

namespace docaff {

enum class ConstraintKind { MustLink, CannotLink };
enum class ConstraintSource { Intra, Inter, User };

std::string_view to_string(ConstraintKind kind) noexcept;
std::string_view to_string(ConstraintSource source) noexcept;

struct Constraint {
  int i = 0;  // smaller word id
  int j = 0;
  ConstraintKind kind = ConstraintKind::MustLink;
  ConstraintSource source = ConstraintSource::Intra;

  int label() const noexcept { return kind == ConstraintKind::MustLink ? 1 : 0; }
  std::pair<int, int> pair() const noexcept { return {i, j}; }
  bool operator==(const Constraint&) const = default;
};

// Orders the pair so that i < j; throws on i == j.
Constraint make_constraint(int a, int b, ConstraintKind kind, ConstraintSource source);

struct ConstraintStats {
  std::size_t must_intra = 0;
  std::size_t must_inter = 0;
  std::size_t must_user = 0;
  std::size_t cannot_inter = 0;
  std::size_t cannot_user = 0;
  std::size_t dropped_conflicts = 0;  // cannot-links removed by precedence
  std::size_t dropped_by_cap = 0;
  std::size_t dropped_by_balance = 0;

  std::size_t must() const noexcept { return must_intra + must_inter + must_user; }
  std::size_t cannot() const noexcept { return cannot_inter + cannot_user; }
  std::size_t total() const noexcept { return must() + cannot(); }
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  ConstraintStats stats;

  void recount();
};

struct ConstraintConfig {
  int k = 6;
  double height_ratio_max = 1.25;
  std::size_t must_link_cap = 1000;
  double must_fraction = 0.6;
  std::uint64_t rng_seed = 0;
  // When false the cap and balance steps are skipped (no random sampling).
  bool sample = true;

  void check() const;
};

enum class NeighborMode { Nearest, Farthest };

// Pairwise cosine distance between rows; zero rows are at distance 1.
Eigen::MatrixXd cosine_distances(const Eigen::MatrixXd& rows);

// Mutual k-nearest (or k-farthest) pairs over a symmetric distance matrix
// whose rows correspond to `ids`. Ties break by ascending id. Pairs are
// returned as (smaller id, larger id), sorted.
std::vector<std::pair<int, int>> mutual_neighbor_pairs(const Eigen::MatrixXd& distances, std::span<const int> ids,
                                                       int k, NeighborMode mode);

// max(h)/min(h) strictly below ratio_max.
bool height_compatible(const WordUnit& a, const WordUnit& b, double ratio_max);
bool height_compatible(double ha, double hb, double ratio_max);

// Must-link every unordered pair within each line.
std::vector<Constraint> generate_intra_constraints(std::span<const ContextualLine> lines);

// Words taking part in inter-line constraints, with the tag they compare on.
struct CharacterizingWord {
  std::size_t index;  // into doc.words
  SemanticTag tag;
};
std::vector<CharacterizingWord> characterizing_words(const DocumentModel& doc, std::span<const SemanticTag> tags);

// Cross-line constraints from style neighbourhoods, syntax bins, semantic tags
// and height ratios. `style` and `tags` are aligned with doc.words.
std::vector<Constraint> generate_inter_constraints(const DocumentModel& doc, const Eigen::MatrixXd& style,
                                                   std::span<const SemanticTag> tags, const ConstraintConfig& cfg);

// Precedence (must over cannot), dedupe, must-link cap, then balance so that
// must-links make up cfg.must_fraction of the total.
ConstraintSet consolidate_and_balance(std::span<const Constraint> intra, std::span<const Constraint> inter,
                                      const ConstraintConfig& cfg);

// Largest cannot count c with m / (m + c) >= fraction.
std::size_t balanced_cannot_count(std::size_t must, double fraction);
// Smallest must count m with m / (m + c) >= fraction.
std::size_t balanced_must_count(std::size_t cannot, double fraction);

// Runs the whole generation for a document with built lines.
ConstraintSet generate_constraints(const DocumentModel& doc, const Eigen::MatrixXd& style,
                                   const ConstraintConfig& cfg);

std::vector<SemanticTag> tag_words(const DocumentModel& doc);

}  // namespace docaff
