#pragma once

#include <span>
#include <utility>
#include <vector>

#include "docaff/constraints.hpp"
#include "docaff/pipeline.hpp"

namespace docaff {

struct UserSelection {
  enum class Kind { MustGroup, CannotGroup };
  Kind kind = Kind::MustGroup;
  std::vector<int> group_a;  // the MUST_GROUP words, or the first CANNOT_GROUP group
  std::vector<int> group_b;  // second CANNOT_GROUP group

  static UserSelection must(std::vector<int> words) { return {Kind::MustGroup, std::move(words), {}}; }
  static UserSelection cannot(std::vector<int> a, std::vector<int> b) {
    return {Kind::CannotGroup, std::move(a), std::move(b)};
  }
};

// Raised when user constraints contradict each other.
class ConstraintConflict : public ValidationError {
 public:
  explicit ConstraintConflict(std::vector<std::pair<int, int>> pairs);
  const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<std::pair<int, int>> pairs_;
};

void validate_selection(const UserSelection& sel);

// All pairs inside a MUST_GROUP; all cross pairs of a CANNOT_GROUP.
std::vector<Constraint> selection_to_constraints(const UserSelection& sel);

// Drops auto constraints on pairs the user constrained, then appends every
// user constraint verbatim (no sampling or balancing).
ConstraintSet merge_constraints(const ConstraintSet& auto_set, std::span<const Constraint> user);

// Validates the selections against the session's words and accumulates their
// constraints. Returns the constraints added.
std::vector<Constraint> add_user_selections(RefineSession& session, std::span<const UserSelection> selections);

// Warm-starts from the current model, trains `epochs` epochs on the merged
// constraints, re-embeds and re-clusters.
void refine(RefineSession& session, int epochs);

}  // namespace docaff
