#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "docaff/clustering.hpp"
#include "docaff/document.hpp"

namespace docaff {

struct SetColor {
  std::array<int, 3> rgb{0, 0, 0};
  bool operator==(const SetColor&) const = default;
};
struct SetWeight {
  bool bold = true;
  bool operator==(const SetWeight&) const = default;
};
struct SetItalic {
  bool italic = true;
  bool operator==(const SetItalic&) const = default;
};
struct ScaleFont {
  double factor = 1.0;  // > 0; scales font size and bbox about the top-left corner
  bool operator==(const ScaleFont&) const = default;
};
struct DeleteWords {
  bool operator==(const DeleteWords&) const = default;
};
struct Emphasize {
  double intensity = 1.0;  // (0, 1]
  bool operator==(const Emphasize&) const = default;
};
struct NumericShift {
  double delta = 0.0;
  bool operator==(const NumericShift&) const = default;
};
struct TimeShift {
  int delta_minutes = 0;
  bool operator==(const TimeShift&) const = default;
};
struct FindReplace {
  std::string pattern;  // ECMAScript regular expression
  std::string replacement;
  bool operator==(const FindReplace&) const = default;
};
struct AlignX {
  double target_x = 0.0;  // [0, 1]
  bool operator==(const AlignX&) const = default;
};
struct Translate {
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const Translate&) const = default;
};

using EditSpec = std::variant<SetColor, SetWeight, SetItalic, ScaleFont, DeleteWords, Emphasize, NumericShift,
                              TimeShift, FindReplace, AlignX, Translate>;

// SET_COLOR, SET_WEIGHT, ...
std::string_view edit_name(const EditSpec& spec) noexcept;

// Throws ValidationError when a parameter is out of range.
void validate_edit(const EditSpec& spec);

struct EditLogEntry {
  int cluster_id = 0;
  EditSpec spec;
  std::vector<int> affected;  // words the edit changed, ascending id
  std::vector<int> skipped;   // members the edit did not apply to (or no longer present)

  bool operator==(const EditLogEntry&) const = default;
};

using EditLog = std::vector<EditLogEntry>;

// Applies `spec` to every word of `cluster_id` that is still present in `doc`.
// Words outside the cluster are untouched. Throws ValidationError for an
// unknown cluster or an invalid spec.
std::pair<DocumentModel, EditLogEntry> apply_edit(const DocumentModel& doc, const ClusterAssignment& assignment,
                                                  int cluster_id, const EditSpec& spec);

// Re-applies one entry to exactly its affected words.
DocumentModel replay_entry(const DocumentModel& doc, const EditLogEntry& entry);

DocumentModel replay(const DocumentModel& original, std::span<const EditLogEntry> log);

// "$5.99" + 1 -> "$6.99". Empty when the text holds no number.
std::optional<std::string> shift_number(std::string_view text, double delta);

// "23:30" + 60 -> "00:30". Empty when the text holds no hh:mm time.
std::optional<std::string> shift_time(std::string_view text, int delta_minutes);

struct PagePx {
  double width = 1000.0;
  double height = 1000.0;
};

// Deterministic translucent color for a cluster id, "#rrggbb".
std::string cluster_color(int cluster_id);

// SVG 1.1 with one <text> per word at its scaled top-left corner; with an
// assignment, translucent cluster rectangles are drawn behind the words.
std::string render_svg(const DocumentModel& doc, const ClusterAssignment* assignment, PagePx page);

}  // namespace docaff
