#include "docaff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "docaff/text_rules.hpp"

namespace docaff {

namespace {

constexpr double kPageHeightPx = 1000.0;
constexpr double kMargin = 0.06;
constexpr double kWordGap = 0.05;  // intra-line gap in multiples of the line height

const std::vector<std::string> kTitleWords = {
    "GRAND", "CAFE", "TRATTORIA", "BISTRO", "ANNUAL", "REPORT", "SUMMER", "MEETING", "PROGRAM", "NOTES",
    "HARBOR", "GARDEN", "CITY", "COUNCIL", "OPEN", "HOUSE", "WINTER", "FORUM", "KITCHEN", "NORTH"};

const std::vector<std::string> kSectionWords = {"STARTERS", "SOUPS", "SALADS", "MAINS", "PASTA", "GRILL",
                                                "DESSERTS", "DRINKS", "SIDES", "SPECIALS", "BRUNCH", "SEAFOOD"};

const std::vector<std::string> kFoodNames = {
    "Carbonara", "Risotto", "Bruschetta", "Lasagna", "Tiramisu", "Gnocchi", "Minestrone", "Calamari", "Focaccia",
    "Ravioli", "Panzanella", "Arancini", "Osso", "Polenta", "Cannoli", "Gelato", "Burrata", "Caprese", "Frittata",
    "Saltimbocca", "Piccata", "Marsala", "Cioppino", "Tortellini", "Pappardelle", "Affogato", "Crostini",
    "Carpaccio", "Stromboli", "Panettone", "Ribollita", "Zuppa", "Biscotti", "Semifreddo", "Vitello", "Branzino",
    "Agnolotti", "Cacciatore", "Puttanesca", "Amatriciana"};

const std::vector<std::string> kProse = {
    "fresh", "tomato", "basil", "garlic", "olive", "oil", "with", "and", "served", "over", "slow", "roasted",
    "crispy", "herbs", "lemon", "butter", "cream", "sauce", "wild", "mushroom", "smoked", "cheese", "house",
    "made", "pasta", "grilled", "seasonal", "greens", "sweet", "pepper", "the", "of", "in", "a", "to", "for",
    "data", "results", "model", "system", "analysis", "method", "process", "design", "review", "team", "report",
    "growth", "market", "value", "project", "service", "quality", "support", "local", "community", "program",
    "budget", "plan", "future", "public", "policy", "study", "level", "early", "recent", "across", "within",
    "each", "more", "than", "this", "that", "from", "their", "which", "also", "such", "these", "while"};

const std::vector<std::string> kEventWords = {"Opening", "Keynote", "Panel", "Workshop", "Lunch", "Break",
                                              "Session", "Networking", "Closing", "Remarks", "Poster", "Demo",
                                              "Tutorial", "Welcome", "Awards", "Reception", "Talk", "Review"};

const std::vector<std::string> kPeople = {"Anna", "Kowalski", "Maria", "Rossi", "James", "Chen", "Laura",
                                          "Okafor", "David", "Silva", "Elena", "Novak", "Peter", "Haas",
                                          "Sofia", "Moreau", "Omar", "Lindqvist", "Grace", "Tanaka"};

const std::vector<std::string> kHeadingWords = {"Introduction", "Overview", "Results", "Methods", "Background",
                                                "Summary", "Discussion", "Findings", "Outlook", "Scope",
                                                "Approach", "Context", "Budget", "Timeline", "Goals", "Impact"};

class Generator {
 public:
  Generator(const SynthSpec& spec) : spec_(spec), rng_(spec.seed * 0x9e3779b97f4a7c15ULL + 17) {
    out_.doc.doc_id = std::string(to_string(spec.kind)) + "-" + std::to_string(spec.seed);
    out_.doc.aspect_ratio = spec.aspect_ratio;
    width_px_ = kPageHeightPx * spec.aspect_ratio;
  }

  SynthDocument finish() && {
    validate(out_.doc);
    return std::move(out_);
  }

  const CategorySpec* category(std::string_view label) const {
    for (const auto& c : spec_.categories) {
      if (c.label == label && c.count > 0) return &c;
    }
    return nullptr;
  }

  double height(const StyleAttrs& s) const { return s.font_size * 1.3 / kPageHeightPx; }

  double width(std::string_view text, const StyleAttrs& s) const {
    return static_cast<double>(codepoint_count(text)) * 0.55 * s.font_size * (s.bold ? 1.08 : 1.0) / width_px_;
  }

  double gap(const StyleAttrs& s) const {
    // weight = gap_px / height_px once normalized by the aspect ratio
    return kWordGap * height(s) * kPageHeightPx / width_px_;
  }

  std::string token(TokenKind kind) {
    switch (kind) {
      case TokenKind::Title: return pick(kTitleWords);
      case TokenKind::Section: return pick(kSectionWords);
      case TokenKind::Name: return pick(kFoodNames);
      case TokenKind::Prose: return pick(kProse);
      case TokenKind::Person: return pick(kPeople);
      case TokenKind::Heading: return pick(kHeadingWords);
      case TokenKind::Event: return pick(kEventWords);
      case TokenKind::Price: {
        std::uniform_int_distribution<int> dollars(4, 38);
        static const int cents[] = {0, 25, 50, 75, 95, 99};
        std::uniform_int_distribution<int> c(0, 5);
        const int ct = cents[c(rng_)];
        return "$" + std::to_string(dollars(rng_)) + "." + (ct < 10 ? "0" : "") + std::to_string(ct);
      }
      case TokenKind::Time: {
        std::uniform_int_distribution<int> hour(8, 19);
        std::uniform_int_distribution<int> quarter(0, 3);
        const int m = quarter(rng_) * 15;
        return std::to_string(hour(rng_)) + ":" + (m < 10 ? "0" : "") + std::to_string(m);
      }
      case TokenKind::Date: {
        std::uniform_int_distribution<int> day(1, 28);
        std::uniform_int_distribution<int> month(1, 12);
        std::uniform_int_distribution<int> year(2015, 2024);
        return std::to_string(day(rng_)) + "/" + std::to_string(month(rng_)) + "/" + std::to_string(year(rng_));
      }
      case TokenKind::PageNumber: {
        std::uniform_int_distribution<int> page(2, 99);
        return std::to_string(page(rng_));
      }
    }
    return "x";
  }

  std::vector<std::string> tokens(TokenKind kind, int lo, int hi) {
    std::uniform_int_distribution<int> n(lo, hi);
    std::vector<std::string> words;
    const int count = n(rng_);
    for (int i = 0; i < count; ++i) words.push_back(token(kind));
    return words;
  }

  // Places words left to right on one row; returns the right edge.
  double place_run(const std::vector<std::string>& words, const CategorySpec& cat, double x, double y) {
    const double h = height(cat.style);
    x += jitter();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) x += gap(cat.style);
      add_word(words[i], cat, x, y, h);
      x += width(words[i], cat.style);
    }
    return x;
  }

  // Flows words into rows within [x0, x1]; returns the y below the last row.
  double flow(const std::vector<std::string>& words, const CategorySpec& cat, double x0, double x1, double y) {
    const double h = height(cat.style);
    std::vector<std::string> row;
    double row_width = 0.0;
    for (const auto& w : words) {
      const double ww = width(w, cat.style);
      const double extra = row.empty() ? ww : gap(cat.style) + ww;
      if (!row.empty() && x0 + row_width + extra > x1) {
        place_run(row, cat, x0, y);
        y += h * spec_.row_pitch;
        row.clear();
        row_width = 0.0;
      }
      row_width += row.empty() ? ww : gap(cat.style) + ww;
      row.push_back(w);
    }
    if (!row.empty()) {
      place_run(row, cat, x0, y);
      y += h * spec_.row_pitch;
    }
    return y;
  }

  double place_right_aligned(const std::string& word, const CategorySpec& cat, double right, double y) {
    const double w = width(word, cat.style);
    add_word(word, cat, right - w, y, height(cat.style));
    return right - w;
  }

  double line_height(const CategorySpec& cat) const { return height(cat.style) * spec_.row_pitch; }

  std::mt19937_64& rng() { return rng_; }

 private:
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
    return items[d(rng_)];
  }

  double jitter() {
    if (spec_.jitter_std <= 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, spec_.jitter_std);
    return std::clamp(n(rng_), -3.0 * spec_.jitter_std, 3.0 * spec_.jitter_std);
  }

  void add_word(const std::string& text, const CategorySpec& cat, double x, double y, double h) {
    const double w = width(text, cat.style);
    const double yy = y + jitter();
    if (x < 0.0 || yy < 0.0 || x + w > 1.0 || yy + h > 1.0 - 0.5 * kMargin) {
      throw ValidationError("layout overflow: " + std::to_string(out_.doc.words.size()) +
                                " words placed before running off the page",
                            "items");
    }
    WordUnit word;
    word.id = static_cast<int>(out_.doc.words.size());
    word.text = text;
    word.bbox = {x, yy, w, h};
    StyleAttrs style = cat.style;
    std::normal_distribution<double> size_noise(0.0, 0.1);
    style.font_size = std::max(1.0, style.font_size + size_noise(rng_));
    std::uniform_int_distribution<int> color_noise(-4, 4);
    for (int& c : style.color_rgb) c = std::clamp(c + color_noise(rng_), 0, 255);
    word.style = style;
    out_.truth.labels[word.id] = cat.label;
    out_.doc.words.push_back(std::move(word));
  }

  const SynthSpec& spec_;
  std::mt19937_64 rng_;
  SynthDocument out_;
  double width_px_;
};

StyleAttrs style(int family, bool bold, bool italic, double size, std::array<int, 3> rgb) {
  StyleAttrs s;
  s.font_family_id = family;
  s.bold = bold;
  s.italic = italic;
  s.font_size = size;
  s.color_rgb = rgb;
  return s;
}

void layout_menu(Generator& g, const SynthSpec& spec) {
  const double left = kMargin;
  const double right = 1.0 - kMargin;
  double y = kMargin;
  if (const auto* title = g.category("title")) {
    g.place_run(g.tokens(TokenKind::Title, 1, 3), *title, 0.3, y);
    y += g.line_height(*title) + 0.01;
  }
  const auto* section = g.category("section");
  const auto* item = g.category("item");
  const auto* price = g.category("price");
  const auto* desc = g.category("desc");
  if (!item) return;

  const int columns = std::max(1, spec.columns);
  const double col_gap = 0.05;
  const double col_width = (right - left - col_gap * (columns - 1)) / columns;
  const int sections = section ? section->count : 0;
  const int per_section = sections > 0 ? (item->count + sections - 1) / sections : item->count;
  const int per_column = (item->count + columns - 1) / columns;

  const double top = y;
  int placed = 0;
  for (int col = 0; col < columns; ++col) {
    double cy = top;
    const double cx0 = left + col * (col_width + col_gap);
    const double cx1 = cx0 + col_width;
    for (int k = 0; k < per_column && placed < item->count; ++k, ++placed) {
      if (section && placed % per_section == 0) {
        cy += 0.004;
        g.place_run({g.token(TokenKind::Section)}, *section, cx0, cy);
        cy += g.line_height(*section);
      }
      g.place_run({g.token(TokenKind::Name)}, *item, cx0, cy);
      if (price) g.place_right_aligned(g.token(TokenKind::Price), *price, cx1, cy);
      cy += g.line_height(*item);
      if (desc) cy = g.flow(g.tokens(TokenKind::Prose, 3, 7), *desc, cx0 + 0.01, cx1 - 0.12, cy);
      cy += 0.006;
    }
  }
}

void layout_schedule(Generator& g, const SynthSpec&) {
  double y = kMargin;
  if (const auto* title = g.category("title")) {
    g.place_run(g.tokens(TokenKind::Title, 2, 3), *title, 0.25, y);
    y += g.line_height(*title) + 0.02;
  }
  const auto* time = g.category("time");
  const auto* event = g.category("event");
  const auto* speaker = g.category("speaker");
  const int rows = std::max({time ? time->count : 0, event ? event->count : 0, speaker ? speaker->count : 0});
  for (int r = 0; r < rows; ++r) {
    double h = 0.0;
    if (time && r < time->count) {
      g.place_run({g.token(TokenKind::Time)}, *time, kMargin, y);
      h = std::max(h, g.line_height(*time));
    }
    if (event && r < event->count) {
      g.place_run(g.tokens(TokenKind::Event, 1, 3), *event, 0.2, y);
      h = std::max(h, g.line_height(*event));
    }
    if (speaker && r < speaker->count) {
      g.place_run({g.token(TokenKind::Person), g.token(TokenKind::Person)}, *speaker, 0.62, y);
      h = std::max(h, g.line_height(*speaker));
    }
    y += h + 0.008;
  }
}

void layout_simple(Generator& g, const SynthSpec&) {
  const double left = kMargin;
  const double right = 1.0 - kMargin;
  double y = kMargin;
  if (const auto* title = g.category("title")) {
    g.place_run(g.tokens(TokenKind::Title, 2, 4), *title, left, y);
    y += g.line_height(*title);
  }
  if (const auto* date = g.category("date")) {
    g.place_run({g.token(TokenKind::Date)}, *date, left, y);
    y += g.line_height(*date) + 0.015;
  }
  const auto* heading = g.category("heading");
  const auto* body = g.category("body");
  const int paragraphs = body ? body->count : 0;
  for (int p = 0; p < paragraphs; ++p) {
    if (heading && p < heading->count) {
      g.place_run(g.tokens(TokenKind::Heading, 1, 3), *heading, left, y);
      y += g.line_height(*heading);
    }
    y = g.flow(g.tokens(TokenKind::Prose, 25, 45), *body, left, right, y);
    y += 0.012;
  }
}

void layout_dense(Generator& g, const SynthSpec& spec) {
  const double left = kMargin;
  const double right = 1.0 - kMargin;
  const int columns = std::max(1, spec.columns);
  const double col_gap = 0.05;
  const double col_width = (right - left - col_gap * (columns - 1)) / columns;
  const auto* heading = g.category("heading");
  const auto* body = g.category("body");
  const auto* caption = g.category("caption");
  const auto* footer = g.category("footer");
  const int paragraphs = body ? body->count : 0;
  const int per_column = (paragraphs + columns - 1) / columns;

  int p = 0;
  for (int col = 0; col < columns; ++col) {
    double y = kMargin;
    const double x0 = left + col * (col_width + col_gap);
    const double x1 = x0 + col_width;
    for (int k = 0; k < per_column && p < paragraphs; ++k, ++p) {
      if (heading && p % 2 == 0 && p / 2 < heading->count) {
        g.place_run(g.tokens(TokenKind::Heading, 1, 2), *heading, x0, y);
        y += g.line_height(*heading);
      }
      y = g.flow(g.tokens(TokenKind::Prose, 30, 48), *body, x0, x1, y);
      if (caption && p % 2 == 1 && p / 2 < caption->count) {
        y += 0.004;
        y = g.flow(g.tokens(TokenKind::Prose, 4, 8), *caption, x0 + 0.02, x1 - 0.02, y);
      }
      y += 0.008;
    }
  }
  if (footer) g.place_run({g.token(TokenKind::PageNumber)}, *footer, 0.49, 0.93);
}

}  // namespace

std::string_view to_string(Template t) noexcept {
  switch (t) {
    case Template::Menu: return "MENU";
    case Template::Schedule: return "SCHEDULE";
    case Template::SimpleDoc: return "SIMPLE_DOC";
    case Template::DenseDoc: return "DENSE_DOC";
  }
  return "MENU";
}

std::optional<Template> template_from_string(std::string_view name) noexcept {
  for (auto t : {Template::Menu, Template::Schedule, Template::SimpleDoc, Template::DenseDoc}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

SynthSpec make_spec(Template kind, int items, std::uint64_t seed) {
  SynthSpec spec;
  spec.kind = kind;
  spec.items = items;
  spec.seed = seed;

  std::vector<int> families(20);
  std::iota(families.begin(), families.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::shuffle(families.begin(), families.end(), rng);
  auto fam = [&](int i) { return families[static_cast<std::size_t>(i)]; };

  switch (kind) {
    case Template::Menu:
      spec.columns = items > 14 ? 2 : 1;
      spec.categories = {
          {"title", style(fam(0), true, false, 28, {20, 20, 20}), TokenKind::Title, 1},
          {"section", style(fam(1), true, false, 17, {120, 30, 30}), TokenKind::Section, std::max(1, items / 5)},
          {"item", style(fam(2), true, false, 13, {10, 10, 10}), TokenKind::Name, items},
          {"price", style(fam(3), false, false, 13, {10, 10, 10}), TokenKind::Price, items},
          {"desc", style(fam(4), false, true, 11, {80, 80, 80}), TokenKind::Prose, items},
      };
      break;
    case Template::Schedule:
      spec.categories = {
          {"title", style(fam(0), true, false, 24, {20, 20, 60}), TokenKind::Title, 1},
          {"time", style(fam(1), false, false, 12, {10, 10, 10}), TokenKind::Time, items},
          {"event", style(fam(2), true, false, 12, {10, 10, 10}), TokenKind::Event, items},
          {"speaker", style(fam(3), false, true, 11, {90, 90, 90}), TokenKind::Person, items},
      };
      break;
    case Template::SimpleDoc:
      spec.categories = {
          {"title", style(fam(0), true, false, 24, {20, 20, 20}), TokenKind::Title, 1},
          {"date", style(fam(1), false, false, 11, {100, 100, 100}), TokenKind::Date, 1},
          {"heading", style(fam(2), true, false, 15, {30, 30, 90}), TokenKind::Heading, items},
          {"body", style(fam(3), false, false, 11, {10, 10, 10}), TokenKind::Prose, items},
      };
      break;
    case Template::DenseDoc:
      spec.columns = 2;
      spec.categories = {
          {"heading", style(fam(0), true, false, 13, {30, 30, 90}), TokenKind::Heading, (items + 1) / 2},
          {"body", style(fam(1), false, false, 10, {10, 10, 10}), TokenKind::Prose, items},
          {"caption", style(fam(2), false, true, 9, {90, 90, 90}), TokenKind::Prose, items / 2},
          {"footer", style(fam(3), false, false, 9, {60, 60, 60}), TokenKind::PageNumber, 1},
      };
      break;
  }
  return spec;
}

std::vector<std::string> GroundTruth::categories() const {
  std::set<std::string> unique;
  for (const auto& [id, label] : labels) unique.insert(label);
  return {unique.begin(), unique.end()};
}

SynthDocument generate_document(const SynthSpec& spec) {
  if (spec.items < 0) throw ValidationError("items must be non-negative", "items");
  if (!(spec.aspect_ratio > 0.0)) throw ValidationError("aspect_ratio must be positive", "aspect_ratio");
  Generator g(spec);
  switch (spec.kind) {
    case Template::Menu: layout_menu(g, spec); break;
    case Template::Schedule: layout_schedule(g, spec); break;
    case Template::SimpleDoc: layout_simple(g, spec); break;
    case Template::DenseDoc: layout_dense(g, spec); break;
  }
  return std::move(g).finish();
}

double purity(const ClusterAssignment& assignment, const GroundTruth& truth) {
  if (assignment.word_to_cluster.size() != truth.labels.size()) {
    throw ValidationError("cluster assignment and ground truth cover different word sets", "assignment");
  }
  for (const auto& [wid, cid] : assignment.word_to_cluster) {
    if (!truth.labels.count(wid)) {
      throw ValidationError("word " + std::to_string(wid) + " has no ground-truth label", "assignment");
    }
  }
  if (truth.labels.empty()) return 1.0;
  std::size_t majority_sum = 0;
  for (const auto& cluster : assignment.clusters) {
    std::map<std::string, std::size_t> counts;
    for (int wid : cluster) ++counts[truth.labels.at(wid)];
    std::size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    majority_sum += best;
  }
  return static_cast<double>(majority_sum) / static_cast<double>(truth.labels.size());
}

int scribble_estimate(const ClusterAssignment& assignment, const GroundTruth& truth, std::string_view category) {
  int touching = 0;
  int mixed = 0;
  for (const auto& cluster : assignment.clusters) {
    bool has_category = false;
    bool has_other = false;
    for (int wid : cluster) {
      const auto it = truth.labels.find(wid);
      const bool match = it != truth.labels.end() && it->second == category;
      has_category |= match;
      has_other |= !match;
    }
    if (has_category) {
      ++touching;
      if (has_other) ++mixed;
    }
  }
  return std::max(0, touching - 1) + 2 * mixed;
}

}  // namespace docaff
