#include "docaff/refine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace docaff {

namespace {

std::string conflict_message(const std::vector<std::pair<int, int>>& pairs) {
  std::ostringstream os;
  os << "contradictory user constraints on";
  for (const auto& [a, b] : pairs) os << " (" << a << ", " << b << ")";
  return os.str();
}

}  // namespace

ConstraintConflict::ConstraintConflict(std::vector<std::pair<int, int>> pairs)
    : ValidationError(conflict_message(pairs), "constraints"), pairs_(std::move(pairs)) {}

void validate_selection(const UserSelection& sel) {
  if (sel.kind == UserSelection::Kind::MustGroup) {
    const std::set<int> unique(sel.group_a.begin(), sel.group_a.end());
    if (unique.size() < 2) throw ValidationError("a must-group selection needs at least two distinct words", "word_ids");
    return;
  }
  if (sel.group_a.empty() || sel.group_b.empty()) {
    throw ValidationError("a cannot-group selection needs two non-empty groups", "group_a");
  }
  const std::set<int> a(sel.group_a.begin(), sel.group_a.end());
  for (int w : sel.group_b) {
    if (a.count(w)) throw ValidationError("cannot-group selections must be disjoint", "group_b");
  }
}

std::vector<Constraint> selection_to_constraints(const UserSelection& sel) {
  validate_selection(sel);
  std::vector<Constraint> out;
  if (sel.kind == UserSelection::Kind::MustGroup) {
    const std::set<int> unique(sel.group_a.begin(), sel.group_a.end());
    const std::vector<int> words(unique.begin(), unique.end());
    for (std::size_t a = 0; a < words.size(); ++a) {
      for (std::size_t b = a + 1; b < words.size(); ++b) {
        out.push_back(make_constraint(words[a], words[b], ConstraintKind::MustLink, ConstraintSource::User));
      }
    }
    return out;
  }
  const std::set<int> ga(sel.group_a.begin(), sel.group_a.end());
  const std::set<int> gb(sel.group_b.begin(), sel.group_b.end());
  for (int a : ga) {
    for (int b : gb) out.push_back(make_constraint(a, b, ConstraintKind::CannotLink, ConstraintSource::User));
  }
  return out;
}

ConstraintSet merge_constraints(const ConstraintSet& auto_set, std::span<const Constraint> user) {
  std::map<std::pair<int, int>, ConstraintKind> user_kind;
  std::vector<std::pair<int, int>> conflicts;
  std::vector<Constraint> user_unique;
  for (const auto& c : user) {
    auto [it, inserted] = user_kind.emplace(c.pair(), c.kind);
    if (inserted) {
      user_unique.push_back(c);
    } else if (it->second != c.kind) {
      conflicts.push_back(c.pair());
    }
  }
  if (!conflicts.empty()) {
    std::sort(conflicts.begin(), conflicts.end());
    conflicts.erase(std::unique(conflicts.begin(), conflicts.end()), conflicts.end());
    throw ConstraintConflict(std::move(conflicts));
  }

  ConstraintSet merged;
  merged.stats.dropped_by_cap = auto_set.stats.dropped_by_cap;
  merged.stats.dropped_by_balance = auto_set.stats.dropped_by_balance;
  merged.stats.dropped_conflicts = auto_set.stats.dropped_conflicts;
  for (const auto& c : auto_set.constraints) {
    const auto it = user_kind.find(c.pair());
    if (it == user_kind.end()) {
      merged.constraints.push_back(c);
    } else if (it->second != c.kind) {
      ++merged.stats.dropped_conflicts;
    }
  }
  for (const auto& c : user_unique) {
    Constraint u = c;
    u.source = ConstraintSource::User;
    merged.constraints.push_back(u);
  }
  merged.recount();
  return merged;
}

std::vector<Constraint> add_user_selections(RefineSession& session, std::span<const UserSelection> selections) {
  const auto index = session.doc.word_index_map();
  std::vector<Constraint> added;
  for (const auto& sel : selections) {
    for (const auto* group : {&sel.group_a, &sel.group_b}) {
      for (int w : *group) {
        if (!index.count(w)) throw ValidationError("unknown word id " + std::to_string(w), "word_ids");
      }
    }
    const auto cs = selection_to_constraints(sel);
    added.insert(added.end(), cs.begin(), cs.end());
  }
  session.user_constraints.insert(session.user_constraints.end(), added.begin(), added.end());
  return added;
}

void refine(RefineSession& session, int epochs) {
  if (!session.trained) throw ValidationError("session has not been run yet", "session");
  if (epochs < 0) throw ValidationError("epochs must be non-negative", "epochs");
  const ConstraintSet merged = merge_constraints(session.auto_constraints, session.user_constraints);

  TrainConfig cfg = session.config.train;
  cfg.epochs = epochs;
  cfg.seed = session.config.train.seed + 1000003ULL * (session.history.size() + 1);

  RefineRecord record;
  record.epochs = epochs;
  record.user_constraints = session.user_constraints.size();
  record.training_constraints = merged.constraints.size();
  if (epochs > 0) record.report = train(session.model, session.reps, merged.constraints, cfg);
  recluster(session);
  record.clusters = session.assignment.cluster_count();
  session.history.push_back(std::move(record));
}

}  // namespace docaff
