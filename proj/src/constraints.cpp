#include "docaff/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace docaff {

std::string_view to_string(ConstraintKind kind) noexcept {
  return kind == ConstraintKind::MustLink ? "MUST_LINK" : "CANNOT_LINK";
}

std::string_view to_string(ConstraintSource source) noexcept {
  switch (source) {
    case ConstraintSource::Intra: return "INTRA";
    case ConstraintSource::Inter: return "INTER";
    case ConstraintSource::User: return "USER";
  }
  return "INTRA";
}

Constraint make_constraint(int a, int b, ConstraintKind kind, ConstraintSource source) {
  if (a == b) throw ValidationError("constraint pair must reference two distinct words", "pair");
  return {std::min(a, b), std::max(a, b), kind, source};
}

void ConstraintSet::recount() {
  const auto keep = stats;
  stats = {};
  stats.dropped_conflicts = keep.dropped_conflicts;
  stats.dropped_by_cap = keep.dropped_by_cap;
  stats.dropped_by_balance = keep.dropped_by_balance;
  for (const auto& c : constraints) {
    if (c.kind == ConstraintKind::MustLink) {
      switch (c.source) {
        case ConstraintSource::Intra: ++stats.must_intra; break;
        case ConstraintSource::Inter: ++stats.must_inter; break;
        case ConstraintSource::User: ++stats.must_user; break;
      }
    } else {
      (c.source == ConstraintSource::User ? stats.cannot_user : stats.cannot_inter)++;
    }
  }
}

void ConstraintConfig::check() const {
  if (k < 1) throw ValidationError("k must be at least 1", "constraints.k");
  if (!(height_ratio_max > 1.0)) throw ValidationError("height_ratio_max must exceed 1", "constraints.height_ratio_max");
  if (!(must_fraction > 0.0 && must_fraction < 1.0)) {
    throw ValidationError("must_fraction must lie in (0, 1)", "constraints.must_fraction");
  }
}

Eigen::MatrixXd cosine_distances(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd unit = rows;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double n = unit.row(i).norm();
    if (n > 0.0) unit.row(i) /= n;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(rows.rows(), rows.rows()) - unit * unit.transpose();
  d.diagonal().setZero();
  return d.cwiseMax(0.0);
}

std::vector<std::pair<int, int>> mutual_neighbor_pairs(const Eigen::MatrixXd& distances, std::span<const int> ids,
                                                       int k, NeighborMode mode) {
  const auto n = static_cast<int>(ids.size());
  if (n < 2 || k < 1) return {};
  k = std::min(k, n - 1);

  // Neighbour sets as sorted index lists.
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    auto closer = [&](int a, int b) {
      const double da = distances(i, a);
      const double db = distances(i, b);
      if (da != db) return mode == NeighborMode::Nearest ? da < db : da > db;
      return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    auto& s = sets[static_cast<std::size_t>(i)];
    s.assign(order.begin(), order.begin() + k);
    std::sort(s.begin(), s.end());
  }

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j : sets[static_cast<std::size_t>(i)]) {
      if (j <= i) continue;
      const auto& back = sets[static_cast<std::size_t>(j)];
      if (std::binary_search(back.begin(), back.end(), i)) {
        const int a = ids[static_cast<std::size_t>(i)];
        const int b = ids[static_cast<std::size_t>(j)];
        pairs.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

bool height_compatible(double ha, double hb, double ratio_max) {
  return std::max(ha, hb) / std::min(ha, hb) < ratio_max;
}

bool height_compatible(const WordUnit& a, const WordUnit& b, double ratio_max) {
  return height_compatible(a.bbox.h, b.bbox.h, ratio_max);
}

std::vector<Constraint> generate_intra_constraints(std::span<const ContextualLine> lines) {
  std::vector<Constraint> out;
  for (const auto& line : lines) {
    for (std::size_t a = 0; a < line.word_ids.size(); ++a) {
      for (std::size_t b = a + 1; b < line.word_ids.size(); ++b) {
        out.push_back(make_constraint(line.word_ids[a], line.word_ids[b], ConstraintKind::MustLink,
                                      ConstraintSource::Intra));
      }
    }
  }
  return out;
}

std::vector<SemanticTag> tag_words(const DocumentModel& doc) {
  std::vector<SemanticTag> tags;
  tags.reserve(doc.words.size());
  for (const auto& w : doc.words) tags.push_back(semantic_tag(w.text));
  return tags;
}

std::vector<CharacterizingWord> characterizing_words(const DocumentModel& doc, std::span<const SemanticTag> tags) {
  const auto index = doc.word_index_map();
  std::vector<CharacterizingWord> out;
  for (const auto& line : doc.lines) {
    std::vector<SemanticTag> line_tags;
    for (int wid : line.word_ids) line_tags.push_back(tags[index.at(wid)]);
    const auto character = characterize_line(line_tags);
    if (!character) continue;  // noisy line
    for (int wid : line.word_ids) {
      const std::size_t idx = index.at(wid);
      if (*character == SemanticTag::Plain || tags[idx] == *character) out.push_back({idx, *character});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

std::vector<Constraint> generate_inter_constraints(const DocumentModel& doc, const Eigen::MatrixXd& style,
                                                   std::span<const SemanticTag> tags, const ConstraintConfig& cfg) {
  std::vector<Constraint> out;
  if (doc.words.size() < 2) return out;

  std::vector<int> ids;
  for (const auto& w : doc.words) ids.push_back(w.id);
  const Eigen::MatrixXd dist = cosine_distances(style);
  const auto near_list = mutual_neighbor_pairs(dist, ids, cfg.k, NeighborMode::Nearest);
  const auto far_list = mutual_neighbor_pairs(dist, ids, cfg.k, NeighborMode::Farthest);
  const std::set<std::pair<int, int>> near(near_list.begin(), near_list.end());
  const std::set<std::pair<int, int>> far(far_list.begin(), far_list.end());

  const auto words = characterizing_words(doc, tags);
  std::vector<SyntaxBin> bins;
  bins.reserve(words.size());
  for (const auto& cw : words) bins.push_back(syntax_bin(doc.words[cw.index].text));

  for (std::size_t a = 0; a < words.size(); ++a) {
    const WordUnit& wa = doc.words[words[a].index];
    for (std::size_t b = a + 1; b < words.size(); ++b) {
      const WordUnit& wb = doc.words[words[b].index];
      if (wa.line_id == wb.line_id) continue;
      const std::pair<int, int> key{std::min(wa.id, wb.id), std::max(wa.id, wb.id)};
      const bool same_bin = bins[a] == bins[b];
      const bool same_tag = words[a].tag == words[b].tag;
      const bool same_height = height_compatible(wa, wb, cfg.height_ratio_max);
      const bool is_near = near.count(key) > 0;
      const bool is_far = far.count(key) > 0;
      if (is_near && same_bin && same_tag && same_height) {
        out.push_back(make_constraint(wa.id, wb.id, ConstraintKind::MustLink, ConstraintSource::Inter));
      }
      if (is_far || !same_bin || !same_tag || !same_height) {
        out.push_back(make_constraint(wa.id, wb.id, ConstraintKind::CannotLink, ConstraintSource::Inter));
      }
    }
  }
  return out;
}

std::size_t balanced_cannot_count(std::size_t must, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(must) * (1.0 - fraction) / fraction + 1e-9));
}

std::size_t balanced_must_count(std::size_t cannot, double fraction) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(cannot) * fraction / (1.0 - fraction) - 1e-9));
}

namespace {

// Uniform subset of `count` elements preserving the input order.
std::vector<Constraint> sample_subset(const std::vector<Constraint>& items, std::size_t count, std::mt19937_64& rng) {
  if (count >= items.size()) return items;
  std::vector<Constraint> out;
  out.reserve(count);
  std::sample(items.begin(), items.end(), std::back_inserter(out), count, rng);
  return out;
}

}  // namespace

ConstraintSet consolidate_and_balance(std::span<const Constraint> intra, std::span<const Constraint> inter,
                                      const ConstraintConfig& cfg) {
  ConstraintSet result;
  std::set<std::pair<int, int>> must_pairs;
  for (auto span : {intra, inter}) {
    for (const auto& c : span) {
      if (c.kind == ConstraintKind::MustLink) must_pairs.insert(c.pair());
    }
  }

  std::vector<Constraint> must;
  std::vector<Constraint> cannot;
  std::set<std::pair<int, int>> seen;
  for (auto span : {intra, inter}) {
    for (const auto& c : span) {
      if (c.kind == ConstraintKind::CannotLink && must_pairs.count(c.pair())) {
        ++result.stats.dropped_conflicts;
        continue;
      }
      if (!seen.insert(c.pair()).second) continue;
      (c.kind == ConstraintKind::MustLink ? must : cannot).push_back(c);
    }
  }

  if (cfg.sample) {
    std::mt19937_64 rng(cfg.rng_seed);
    if (must.size() > cfg.must_link_cap) {
      result.stats.dropped_by_cap = must.size() - cfg.must_link_cap;
      must = sample_subset(must, cfg.must_link_cap, rng);
    }
    if (!must.empty() && !cannot.empty()) {
      const std::size_t max_cannot = balanced_cannot_count(must.size(), cfg.must_fraction);
      if (cannot.size() > max_cannot) {
        result.stats.dropped_by_balance = cannot.size() - max_cannot;
        cannot = sample_subset(cannot, max_cannot, rng);
      } else {
        const std::size_t keep_must = balanced_must_count(cannot.size(), cfg.must_fraction);
        if (must.size() > keep_must) {
          result.stats.dropped_by_balance = must.size() - keep_must;
          must = sample_subset(must, keep_must, rng);
        }
      }
    }
  }

  result.constraints = std::move(must);
  result.constraints.insert(result.constraints.end(), cannot.begin(), cannot.end());
  std::sort(result.constraints.begin(), result.constraints.end(),
            [](const Constraint& a, const Constraint& b) { return a.pair() < b.pair(); });
  result.recount();
  return result;
}

ConstraintSet generate_constraints(const DocumentModel& doc, const Eigen::MatrixXd& style,
                                   const ConstraintConfig& cfg) {
  cfg.check();
  const auto tags = tag_words(doc);
  const auto intra = generate_intra_constraints(doc.lines);
  const auto inter = generate_inter_constraints(doc, style, tags, cfg);
  return consolidate_and_balance(intra, inter, cfg);
}

}  // namespace docaff
