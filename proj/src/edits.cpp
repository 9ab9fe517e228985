#include "docaff/edits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <set>

#include "docaff/text_rules.hpp"

namespace docaff {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool fits(const BBox& b) {
  return b.x >= 0.0 && b.y >= 0.0 && b.w > 0.0 && b.h > 0.0 && b.right() <= 1.0 && b.bottom() <= 1.0;
}

int decimals_of(double v) {
  for (int k = 0; k <= 6; ++k) {
    const double scaled = v * std::pow(10.0, k);
    if (std::abs(scaled - std::round(scaled)) < 1e-9 * std::max(1.0, std::abs(scaled))) return k;
  }
  return 6;
}

std::string group_thousands(const std::string& digits) {
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

// Keeps the box's top-left corner and scales its width with the text length.
void retext(WordUnit& w, std::string text) {
  const auto before = codepoint_count(w.text);
  const auto after = codepoint_count(text);
  if (before > 0 && after > 0) w.bbox.w *= static_cast<double>(after) / static_cast<double>(before);
  w.text = std::move(text);
}

StyleAttrs& style_of(WordUnit& w) {
  if (!w.style) w.style = StyleAttrs{};
  return *w.style;
}

void rebuild_lines(DocumentModel& doc) {
  const auto index = doc.word_index_map();
  std::vector<ContextualLine> kept;
  for (auto& line : doc.lines) {
    std::vector<int> ids;
    for (int id : line.word_ids) {
      if (index.count(id)) ids.push_back(id);
    }
    if (ids.empty()) continue;
    line.word_ids = std::move(ids);
    line.bbox = doc.words[index.at(line.word_ids.front())].bbox;
    for (int id : line.word_ids) line.bbox = union_box(line.bbox, doc.words[index.at(id)].bbox);
    kept.push_back(std::move(line));
  }
  doc.lines = std::move(kept);
}

// Applies the spec to the given word ids; fills affected/skipped.
void apply_to_words(DocumentModel& doc, const std::vector<int>& ids, const EditSpec& spec, std::vector<int>& affected,
                    std::vector<int>& skipped) {
  validate_edit(spec);
  const auto index = doc.word_index_map();
  std::vector<int> present;
  for (int id : ids) {
    if (index.count(id)) {
      present.push_back(id);
    } else {
      skipped.push_back(id);
    }
  }
  auto word = [&](int id) -> WordUnit& { return doc.words[index.at(id)]; };

  std::visit(
      Overloaded{
          [&](const SetColor& e) {
            for (int id : present) style_of(word(id)).color_rgb = e.rgb;
            affected = present;
          },
          [&](const SetWeight& e) {
            for (int id : present) style_of(word(id)).bold = e.bold;
            affected = present;
          },
          [&](const SetItalic& e) {
            for (int id : present) style_of(word(id)).italic = e.italic;
            affected = present;
          },
          [&](const ScaleFont& e) {
            for (int id : present) {
              WordUnit& w = word(id);
              BBox b = w.bbox;
              b.w *= e.factor;
              b.h *= e.factor;
              if (!fits(b)) {
                skipped.push_back(id);
                continue;
              }
              w.bbox = b;
              style_of(w).font_size *= e.factor;
              affected.push_back(id);
            }
          },
          [&](const DeleteWords&) {
            const std::set<int> doomed(present.begin(), present.end());
            std::erase_if(doc.words, [&](const WordUnit& w) { return doomed.count(w.id) > 0; });
            affected = present;
          },
          [&](const Emphasize& e) {
            for (int id : present) style_of(word(id)).emphasis = e.intensity;
            affected = present;
          },
          [&](const NumericShift& e) {
            for (int id : present) {
              WordUnit& w = word(id);
              const SemanticTag tag = semantic_tag(w.text);
              const bool numeric = tag == SemanticTag::Number || tag == SemanticTag::Price || tag == SemanticTag::Percent;
              auto shifted = numeric ? shift_number(w.text, e.delta) : std::nullopt;
              if (!shifted) {
                skipped.push_back(id);
                continue;
              }
              retext(w, std::move(*shifted));
              affected.push_back(id);
            }
          },
          [&](const TimeShift& e) {
            for (int id : present) {
              WordUnit& w = word(id);
              auto shifted = semantic_tag(w.text) == SemanticTag::Time ? shift_time(w.text, e.delta_minutes)
                                                                       : std::nullopt;
              if (!shifted) {
                skipped.push_back(id);
                continue;
              }
              retext(w, std::move(*shifted));
              affected.push_back(id);
            }
          },
          [&](const FindReplace& e) {
            const std::regex re(e.pattern);
            for (int id : present) {
              WordUnit& w = word(id);
              if (!std::regex_search(w.text, re)) {
                skipped.push_back(id);
                continue;
              }
              std::string text = std::regex_replace(w.text, re, e.replacement);
              if (trim(text).empty()) {
                skipped.push_back(id);
                continue;
              }
              retext(w, std::move(text));
              affected.push_back(id);
            }
          },
          [&](const AlignX& e) {
            // Members grouped by line; a word without a line is its own line.
            std::map<std::pair<int, int>, std::vector<int>> groups;
            for (int id : present) {
              const WordUnit& w = word(id);
              groups[w.line_id ? std::pair{*w.line_id, 0} : std::pair{-1, id}].push_back(id);
            }
            for (auto& [key, members] : groups) {
              std::sort(members.begin(), members.end(), [&](int a, int b) {
                const double xa = word(a).bbox.x;
                const double xb = word(b).bbox.x;
                return xa != xb ? xa < xb : a < b;
              });
              const double delta = e.target_x - word(members.front()).bbox.x;
              const bool ok = std::all_of(members.begin(), members.end(), [&](int id) {
                BBox b = word(id).bbox;
                b.x += delta;
                return fits(b);
              });
              for (int id : members) {
                if (ok) {
                  if (members.front() == id) {
                    word(id).bbox.x = e.target_x;
                  } else {
                    word(id).bbox.x += delta;
                  }
                  affected.push_back(id);
                } else {
                  skipped.push_back(id);
                }
              }
            }
          },
          [&](const Translate& e) {
            for (int id : present) {
              WordUnit& w = word(id);
              BBox b = w.bbox;
              b.x += e.dx;
              b.y += e.dy;
              if (!fits(b)) {
                skipped.push_back(id);
                continue;
              }
              w.bbox = b;
              affected.push_back(id);
            }
          },
      },
      spec);

  std::sort(affected.begin(), affected.end());
  std::sort(skipped.begin(), skipped.end());
  rebuild_lines(doc);
}

}  // namespace

std::string_view edit_name(const EditSpec& spec) noexcept {
  static constexpr std::string_view names[] = {"SET_COLOR",     "SET_WEIGHT", "SET_ITALIC",   "SCALE_FONT",
                                                "DELETE",        "EMPHASIZE",  "NUMERIC_SHIFT", "TIME_SHIFT",
                                                "FIND_REPLACE",  "ALIGN_X",    "TRANSLATE"};
  return names[spec.index()];
}

void validate_edit(const EditSpec& spec) {
  std::visit(Overloaded{
                 [](const SetColor& e) {
                   for (int c : e.rgb) {
                     if (c < 0 || c > 255) throw ValidationError("rgb components must be in [0, 255]", "rgb");
                   }
                 },
                 [](const ScaleFont& e) {
                   if (!(e.factor > 0.0) || !std::isfinite(e.factor)) {
                     throw ValidationError("factor must be positive", "factor");
                   }
                 },
                 [](const Emphasize& e) {
                   if (!(e.intensity > 0.0 && e.intensity <= 1.0)) {
                     throw ValidationError("intensity must be in (0, 1]", "intensity");
                   }
                 },
                 [](const NumericShift& e) {
                   if (!std::isfinite(e.delta)) throw ValidationError("delta must be finite", "delta");
                 },
                 [](const FindReplace& e) {
                   if (e.pattern.empty()) throw ValidationError("pattern must not be empty", "pattern");
                   try {
                     std::regex re(e.pattern);
                   } catch (const std::regex_error& err) {
                     throw ValidationError(std::string("invalid pattern: ") + err.what(), "pattern");
                   }
                 },
                 [](const AlignX& e) {
                   if (!(e.target_x >= 0.0 && e.target_x <= 1.0)) {
                     throw ValidationError("target_x must be in [0, 1]", "target_x");
                   }
                 },
                 [](const Translate& e) {
                   if (!std::isfinite(e.dx) || !std::isfinite(e.dy)) {
                     throw ValidationError("dx and dy must be finite", "dx");
                   }
                 },
                 [](const auto&) {},
             },
             spec);
}

std::optional<std::string> shift_number(std::string_view text, double delta) {
  static const std::regex re("(-?)([0-9]{1,3}(?:,[0-9]{3})+|[0-9]+)(?:\\.([0-9]+))?");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  std::string integer = m[2].str();
  const bool grouped = integer.find(',') != std::string::npos;
  std::erase(integer, ',');
  const std::string fraction = m[3].matched ? m[3].str() : std::string{};
  const int decimals = std::max(static_cast<int>(fraction.size()), decimals_of(delta));
  double value = std::stod(integer + (fraction.empty() ? "" : "." + fraction));
  if (m[1].length() > 0) value = -value;
  value += delta;

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, std::abs(value));
  std::string digits = buf;
  const bool negative = value < 0.0 && std::strtod(buf, nullptr) != 0.0;
  if (grouped) {
    const auto dot = digits.find('.');
    digits = group_thousands(digits.substr(0, dot)) + (dot == std::string::npos ? "" : digits.substr(dot));
  }
  return m.prefix().str() + (negative ? "-" : "") + digits + m.suffix().str();
}

std::optional<std::string> shift_time(std::string_view text, int delta_minutes) {
  static const std::regex re("([0-9]{1,2}):([0-9]{2})");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  const int hours = std::stoi(m[1].str());
  const int minutes = std::stoi(m[2].str());
  if (hours > 23 || minutes > 59) return std::nullopt;
  constexpr int kDay = 24 * 60;
  const int total = (((hours * 60 + minutes + delta_minutes) % kDay) + kDay) % kDay;
  char buf[16];
  std::snprintf(buf, sizeof buf, m[1].length() == 2 ? "%02d:%02d" : "%d:%02d", total / 60, total % 60);
  return m.prefix().str() + buf + m.suffix().str();
}

std::pair<DocumentModel, EditLogEntry> apply_edit(const DocumentModel& doc, const ClusterAssignment& assignment,
                                                  int cluster_id, const EditSpec& spec) {
  if (cluster_id < 0 || static_cast<std::size_t>(cluster_id) >= assignment.clusters.size()) {
    throw ValidationError("unknown cluster id " + std::to_string(cluster_id), "cluster_id");
  }
  validate_edit(spec);
  EditLogEntry entry;
  entry.cluster_id = cluster_id;
  entry.spec = spec;
  DocumentModel out = doc;
  apply_to_words(out, assignment.clusters[static_cast<std::size_t>(cluster_id)], spec, entry.affected,
                 entry.skipped);
  validate(out);
  return {std::move(out), std::move(entry)};
}

DocumentModel replay_entry(const DocumentModel& doc, const EditLogEntry& entry) {
  DocumentModel out = doc;
  std::vector<int> affected;
  std::vector<int> skipped;
  apply_to_words(out, entry.affected, entry.spec, affected, skipped);
  if (affected != entry.affected) {
    throw ValidationError("edit log entry does not replay onto this document", "edits");
  }
  validate(out);
  return out;
}

DocumentModel replay(const DocumentModel& original, std::span<const EditLogEntry> log) {
  DocumentModel doc = original;
  for (const auto& entry : log) doc = replay_entry(doc, entry);
  return doc;
}

}  // namespace docaff
