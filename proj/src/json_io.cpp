#include "docaff/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "docaff/config.hpp"

namespace docaff {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::string& parent, const std::string& key) { return parent.empty() ? key : parent + "." + key; }

std::string at(const std::string& parent, std::size_t index) { return parent + "[" + std::to_string(index) + "]"; }

const Json& require(const Json& j, const char* key, const std::string& parent) {
  if (!j.is_object()) throw ParseError(parent, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(join(parent, key), "missing field");
  return *it;
}

double get_number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(field, "expected a finite number");
  return v;
}

long long get_integer(const Json& j, const std::string& field) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  throw ParseError(field, "expected an integer");
}

int get_int(const Json& j, const std::string& field) {
  const long long v = get_integer(j, field);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError(field, "integer out of range");
  }
  return static_cast<int>(v);
}

bool get_bool(const Json& j, const std::string& field) {
  if (!j.is_boolean()) throw ParseError(field, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& field) {
  if (!j.is_string()) throw ParseError(field, "expected a string");
  return j.get<std::string>();
}

std::vector<int> get_int_list(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError(field, "expected an array of integers");
  std::vector<int> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_int(j[i], at(field, i)));
  return out;
}

double number_or(const Json& j, const char* key, double fallback, const std::string& parent) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : get_number(*it, join(parent, key));
}

BBox bbox_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) throw ParseError(field, "expected [x, y, w, h]");
  return {get_number(j[0], at(field, 0)), get_number(j[1], at(field, 1)), get_number(j[2], at(field, 2)),
          get_number(j[3], at(field, 3))};
}

Json bbox_to_json(const BBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

std::array<int, 3> rgb_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ParseError(field, "expected three integers");
  std::array<int, 3> rgb{};
  for (std::size_t i = 0; i < 3; ++i) {
    rgb[i] = get_int(j[i], at(field, i));
    if (rgb[i] < 0 || rgb[i] > 255) throw ValidationError("color components must lie in [0, 255]", at(field, i));
  }
  return rgb;
}

// Clamps one coordinate pair into the page; records a warning for large moves.
void clamp_box(BBox& b, int word_id, std::vector<std::string>& warnings) {
  const BBox before = b;
  b.x = std::clamp(b.x, 0.0, 1.0);
  b.y = std::clamp(b.y, 0.0, 1.0);
  if (b.w > 0.0) b.w = std::min(b.w, 1.0 - b.x);
  if (b.h > 0.0) b.h = std::min(b.h, 1.0 - b.y);
  const double moved = std::max({std::abs(b.x - before.x), std::abs(b.y - before.y), std::abs(b.w - before.w),
                                 std::abs(b.h - before.h)});
  if (moved > 1e-3) {
    std::ostringstream os;
    os << "word " << word_id << ": bbox clamped into the page (moved by " << moved << ")";
    warnings.push_back(os.str());
  }
}

WordUnit word_from_json(const Json& jw, const std::string& field) {
  if (!jw.is_object()) throw ParseError(field, "expected an object");
  WordUnit w;
  w.id = get_int(require(jw, "id", field), join(field, "id"));
  w.text = get_string(require(jw, "text", field), join(field, "text"));
  w.bbox = bbox_from_json(require(jw, "bbox", field), join(field, "bbox"));
  if (const auto it = jw.find("style_attrs"); it != jw.end() && !it->is_null()) {
    w.style = style_from_json(*it, join(field, "style_attrs"));
  }
  if (const auto it = jw.find("feature"); it != jw.end() && !it->is_null()) {
    const std::string f = join(field, "feature");
    if (!it->is_array()) throw ParseError(f, "expected an array of numbers");
    for (std::size_t k = 0; k < it->size(); ++k) w.feature.push_back(get_number((*it)[k], at(f, k)));
  }
  if (const auto it = jw.find("line_id"); it != jw.end() && !it->is_null()) {
    w.line_id = get_int(*it, join(field, "line_id"));
  }
  return w;
}

Json word_to_json(const WordUnit& w) {
  Json j{{"id", w.id}, {"text", w.text}, {"bbox", bbox_to_json(w.bbox)}};
  if (w.style) j["style_attrs"] = style_to_json(*w.style);
  if (!w.feature.empty()) j["feature"] = w.feature;
  if (w.line_id) j["line_id"] = *w.line_id;
  return j;
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(what, std::string("malformed JSON: ") + e.what());
  }
}

Json style_to_json(const StyleAttrs& s) {
  Json j{{"font_family_id", s.font_family_id},
         {"bold", s.bold},
         {"italic", s.italic},
         {"font_size", s.font_size},
         {"color_rgb", s.color_rgb}};
  if (s.emphasis != 0.0) j["emphasis"] = s.emphasis;
  return j;
}

StyleAttrs style_from_json(const Json& j, const std::string& field) {
  if (!j.is_object()) throw ParseError(field, "expected an object");
  StyleAttrs s;
  if (const auto it = j.find("font_family_id"); it != j.end()) {
    s.font_family_id = get_int(*it, join(field, "font_family_id"));
    if (s.font_family_id < 0) throw ValidationError("font_family_id must be non-negative", join(field, "font_family_id"));
  }
  if (const auto it = j.find("bold"); it != j.end()) s.bold = get_bool(*it, join(field, "bold"));
  if (const auto it = j.find("italic"); it != j.end()) s.italic = get_bool(*it, join(field, "italic"));
  if (const auto it = j.find("font_size"); it != j.end()) {
    s.font_size = get_number(*it, join(field, "font_size"));
    if (!(s.font_size > 0.0)) throw ValidationError("font_size must be positive", join(field, "font_size"));
  }
  if (const auto it = j.find("color_rgb"); it != j.end()) s.color_rgb = rgb_from_json(*it, join(field, "color_rgb"));
  if (const auto it = j.find("emphasis"); it != j.end()) s.emphasis = get_number(*it, join(field, "emphasis"));
  return s;
}

IngestResult ingest_document(std::string_view file_bytes) {
  const Json j = parse_json(file_bytes, "document");
  if (!j.is_object()) throw ParseError("document", "expected a JSON object");
  IngestResult result;
  DocumentModel& doc = result.doc;
  doc.doc_id = get_string(require(j, "doc_id", ""), "doc_id");
  doc.aspect_ratio = get_number(require(j, "aspect_ratio", ""), "aspect_ratio");
  const Json& words = require(j, "words", "");
  if (!words.is_array()) throw ParseError("words", "expected an array");
  doc.words.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    WordUnit w = word_from_json(words[i], at("words", i));
    w.line_id.reset();
    clamp_box(w.bbox, w.id, result.warnings);
    doc.words.push_back(std::move(w));
  }
  validate(doc);
  return result;
}

Json document_to_json(const DocumentModel& doc) {
  Json words = Json::array();
  for (const auto& w : doc.words) words.push_back(word_to_json(w));
  Json j{{"doc_id", doc.doc_id}, {"aspect_ratio", doc.aspect_ratio}, {"words", std::move(words)}};
  if (!doc.lines.empty()) {
    Json lines = Json::array();
    for (const auto& l : doc.lines) {
      lines.push_back({{"id", l.id}, {"word_ids", l.word_ids}, {"bbox", bbox_to_json(l.bbox)}});
    }
    j["lines"] = std::move(lines);
  }
  return j;
}

DocumentModel document_from_json(const Json& j) {
  DocumentModel doc;
  doc.doc_id = get_string(require(j, "doc_id", ""), "doc_id");
  doc.aspect_ratio = get_number(require(j, "aspect_ratio", ""), "aspect_ratio");
  const Json& words = require(j, "words", "");
  if (!words.is_array()) throw ParseError("words", "expected an array");
  for (std::size_t i = 0; i < words.size(); ++i) doc.words.push_back(word_from_json(words[i], at("words", i)));
  if (const auto it = j.find("lines"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& jl = (*it)[i];
      const std::string f = at("lines", i);
      ContextualLine line;
      line.id = get_int(require(jl, "id", f), join(f, "id"));
      line.word_ids = get_int_list(require(jl, "word_ids", f), join(f, "word_ids"));
      line.bbox = bbox_from_json(require(jl, "bbox", f), join(f, "bbox"));
      doc.lines.push_back(std::move(line));
    }
  }
  validate(doc);
  return doc;
}

Json clusters_to_json(const ClusterAssignment& assignment) {
  Json clusters = Json::array();
  for (std::size_t c = 0; c < assignment.clusters.size(); ++c) {
    clusters.push_back({{"id", static_cast<int>(c)}, {"word_ids", assignment.clusters[c]}});
  }
  return {{"clusters", std::move(clusters)}};
}

ClusterAssignment clusters_from_json(const Json& j) {
  const Json& clusters = require(j, "clusters", "");
  if (!clusters.is_array()) throw ParseError("clusters", "expected an array");
  ClusterAssignment out;
  out.clusters.resize(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const std::string f = at("clusters", c);
    const int id = get_int(require(clusters[c], "id", f), join(f, "id"));
    if (id < 0 || static_cast<std::size_t>(id) >= clusters.size()) throw ValidationError("cluster id out of range", f);
    out.clusters[static_cast<std::size_t>(id)] = get_int_list(require(clusters[c], "word_ids", f), join(f, "word_ids"));
    for (int w : out.clusters[static_cast<std::size_t>(id)]) {
      if (!out.word_to_cluster.emplace(w, id).second) {
        throw ValidationError("word " + std::to_string(w) + " appears in two clusters", f);
      }
    }
  }
  return out;
}

Json projection_to_json(const std::vector<int>& word_ids, const Eigen::MatrixXd& projection,
                        const ClusterAssignment& assignment) {
  if (static_cast<Eigen::Index>(word_ids.size()) != projection.rows()) {
    throw std::invalid_argument("projection rows do not match the word ids");
  }
  Json points = Json::array();
  for (std::size_t i = 0; i < word_ids.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto it = assignment.word_to_cluster.find(word_ids[i]);
    points.push_back({{"word_id", word_ids[i]},
                      {"xy", Json::array({projection(r, 0), projection(r, 1)})},
                      {"cluster_id", it == assignment.word_to_cluster.end() ? Json(nullptr) : Json(it->second)}});
  }
  return {{"points", std::move(points)}};
}

Json constraint_to_json(const Constraint& c) {
  return {{"i", c.i}, {"j", c.j}, {"kind", std::string(to_string(c.kind))}, {"source", std::string(to_string(c.source))}};
}

Constraint constraint_from_json(const Json& j) {
  const int a = get_int(require(j, "i", ""), "i");
  const int b = get_int(require(j, "j", ""), "j");
  const std::string kind = get_string(require(j, "kind", ""), "kind");
  const std::string source = get_string(require(j, "source", ""), "source");
  ConstraintKind k;
  if (kind == to_string(ConstraintKind::MustLink)) {
    k = ConstraintKind::MustLink;
  } else if (kind == to_string(ConstraintKind::CannotLink)) {
    k = ConstraintKind::CannotLink;
  } else {
    throw ParseError("kind", "unknown constraint kind '" + kind + "'");
  }
  ConstraintSource s;
  if (source == to_string(ConstraintSource::Intra)) {
    s = ConstraintSource::Intra;
  } else if (source == to_string(ConstraintSource::Inter)) {
    s = ConstraintSource::Inter;
  } else if (source == to_string(ConstraintSource::User)) {
    s = ConstraintSource::User;
  } else {
    throw ParseError("source", "unknown constraint source '" + source + "'");
  }
  return make_constraint(a, b, k, s);
}

std::string constraints_jsonl(std::span<const Constraint> constraints) {
  std::string out;
  for (const auto& c : constraints) out += constraint_to_json(c).dump() + "\n";
  return out;
}

Json constraint_stats_to_json(const ConstraintStats& s) {
  return {{"must", s.must()},
          {"cannot", s.cannot()},
          {"total", s.total()},
          {"must_intra", s.must_intra},
          {"must_inter", s.must_inter},
          {"must_user", s.must_user},
          {"cannot_inter", s.cannot_inter},
          {"cannot_user", s.cannot_user},
          {"dropped_conflicts", s.dropped_conflicts},
          {"dropped_by_cap", s.dropped_by_cap},
          {"dropped_by_balance", s.dropped_by_balance}};
}

Json train_report_to_json(const TrainReport& r) {
  return {{"epochs", r.epoch_loss.size()},
          {"epoch_loss", r.epoch_loss},
          {"final_loss", r.epoch_loss.empty() ? Json(nullptr) : Json(r.epoch_loss.back())},
          {"steps", r.steps},
          {"max_clipped_norm", r.max_clipped_norm},
          {"must_satisfied", r.must_satisfied},
          {"cannot_satisfied", r.cannot_satisfied},
          {"mean_must_affinity", r.mean_must_affinity},
          {"mean_cannot_affinity", r.mean_cannot_affinity},
          {"warnings", r.warnings}};
}

TrainReport train_report_from_json(const Json& j) {
  TrainReport r;
  r.epoch_loss = field_or(j, "epoch_loss", std::vector<double>{});
  r.steps = field_or(j, "steps", 0L);
  r.max_clipped_norm = field_or(j, "max_clipped_norm", 0.0);
  r.must_satisfied = field_or(j, "must_satisfied", 0.0);
  r.cannot_satisfied = field_or(j, "cannot_satisfied", 0.0);
  r.mean_must_affinity = field_or(j, "mean_must_affinity", 0.0);
  r.mean_cannot_affinity = field_or(j, "mean_cannot_affinity", 0.0);
  r.warnings = field_or(j, "warnings", std::vector<std::string>{});
  return r;
}

UserSelection selection_from_json(const Json& j) {
  const std::string kind = get_string(require(j, "kind", ""), "kind");
  if (kind == "MUST_GROUP") return UserSelection::must(get_int_list(require(j, "word_ids", ""), "word_ids"));
  if (kind == "CANNOT_GROUP") {
    return UserSelection::cannot(get_int_list(require(j, "group_a", ""), "group_a"),
                                 get_int_list(require(j, "group_b", ""), "group_b"));
  }
  throw ParseError("kind", "expected MUST_GROUP or CANNOT_GROUP");
}

Json selection_to_json(const UserSelection& sel) {
  if (sel.kind == UserSelection::Kind::MustGroup) return {{"kind", "MUST_GROUP"}, {"word_ids", sel.group_a}};
  return {{"kind", "CANNOT_GROUP"}, {"group_a", sel.group_a}, {"group_b", sel.group_b}};
}

EditSpec edit_spec_from_json(const Json& j) {
  const std::string op = get_string(require(j, "op", ""), "op");
  EditSpec spec;
  if (op == "SET_COLOR") {
    spec = SetColor{rgb_from_json(require(j, "rgb", ""), "rgb")};
  } else if (op == "SET_WEIGHT") {
    spec = SetWeight{get_bool(require(j, "bold", ""), "bold")};
  } else if (op == "SET_ITALIC") {
    spec = SetItalic{get_bool(require(j, "italic", ""), "italic")};
  } else if (op == "SCALE_FONT") {
    spec = ScaleFont{get_number(require(j, "factor", ""), "factor")};
  } else if (op == "DELETE") {
    spec = DeleteWords{};
  } else if (op == "EMPHASIZE") {
    spec = Emphasize{number_or(j, "intensity", 1.0, "")};
  } else if (op == "NUMERIC_SHIFT") {
    spec = NumericShift{get_number(require(j, "delta", ""), "delta")};
  } else if (op == "TIME_SHIFT") {
    spec = TimeShift{get_int(require(j, "delta_minutes", ""), "delta_minutes")};
  } else if (op == "FIND_REPLACE") {
    spec = FindReplace{get_string(require(j, "pattern", ""), "pattern"),
                       get_string(require(j, "replacement", ""), "replacement")};
  } else if (op == "ALIGN_X") {
    spec = AlignX{get_number(require(j, "target_x", ""), "target_x")};
  } else if (op == "TRANSLATE") {
    spec = Translate{number_or(j, "dx", 0.0, ""), number_or(j, "dy", 0.0, "")};
  } else {
    throw ParseError("op", "unknown edit '" + op + "'");
  }
  validate_edit(spec);
  return spec;
}

Json edit_spec_to_json(const EditSpec& spec) {
  Json j{{"op", std::string(edit_name(spec))}};
  std::visit(Overloaded{
                 [&](const SetColor& e) { j["rgb"] = e.rgb; },
                 [&](const SetWeight& e) { j["bold"] = e.bold; },
                 [&](const SetItalic& e) { j["italic"] = e.italic; },
                 [&](const ScaleFont& e) { j["factor"] = e.factor; },
                 [&](const DeleteWords&) {},
                 [&](const Emphasize& e) { j["intensity"] = e.intensity; },
                 [&](const NumericShift& e) { j["delta"] = e.delta; },
                 [&](const TimeShift& e) { j["delta_minutes"] = e.delta_minutes; },
                 [&](const FindReplace& e) {
                   j["pattern"] = e.pattern;
                   j["replacement"] = e.replacement;
                 },
                 [&](const AlignX& e) { j["target_x"] = e.target_x; },
                 [&](const Translate& e) {
                   j["dx"] = e.dx;
                   j["dy"] = e.dy;
                 },
             },
             spec);
  return j;
}

Json edit_entry_to_json(const EditLogEntry& e) {
  return {{"cluster_id", e.cluster_id},
          {"spec", edit_spec_to_json(e.spec)},
          {"affected", e.affected},
          {"skipped", e.skipped}};
}

EditLogEntry edit_entry_from_json(const Json& j) {
  EditLogEntry e;
  e.cluster_id = get_int(require(j, "cluster_id", ""), "cluster_id");
  e.spec = edit_spec_from_json(require(j, "spec", ""));
  e.affected = get_int_list(require(j, "affected", ""), "affected");
  if (const auto it = j.find("skipped"); it != j.end()) e.skipped = get_int_list(*it, "skipped");
  return e;
}

namespace {

const char* token_names[] = {"TITLE", "SECTION", "NAME", "PRICE", "PROSE", "TIME",
                             "PERSON", "HEADING", "EVENT", "DATE", "PAGE_NUMBER"};

TokenKind token_kind_from_string(const std::string& name, const std::string& field) {
  for (std::size_t i = 0; i < std::size(token_names); ++i) {
    if (name == token_names[i]) return static_cast<TokenKind>(i);
  }
  throw ParseError(field, "unknown token generator '" + name + "'");
}

}  // namespace

SynthSpec synth_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("spec", "expected an object");
  const std::string name = get_string(require(j, "template", ""), "template");
  const auto kind = template_from_string(name);
  if (!kind) throw ParseError("template", "unknown template '" + name + "'");
  const auto seed = j.contains("seed") ? get_integer(j["seed"], "seed") : 1;
  if (seed < 0) throw ValidationError("seed must be non-negative", "seed");
  const int items = j.contains("items") ? get_int(j["items"], "items") : 10;
  SynthSpec spec = make_spec(*kind, items, static_cast<std::uint64_t>(seed));
  if (j.contains("columns")) spec.columns = get_int(j["columns"], "columns");
  spec.row_pitch = number_or(j, "row_pitch", spec.row_pitch, "");
  spec.jitter_std = number_or(j, "jitter_std", spec.jitter_std, "");
  spec.aspect_ratio = number_or(j, "aspect_ratio", spec.aspect_ratio, "");
  if (const auto it = j.find("categories"); it != j.end()) {
    if (!it->is_array()) throw ParseError("categories", "expected an array");
    spec.categories.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& jc = (*it)[i];
      const std::string f = at("categories", i);
      CategorySpec c;
      c.label = get_string(require(jc, "label", f), join(f, "label"));
      c.style = style_from_json(require(jc, "style_attrs", f), join(f, "style_attrs"));
      c.tokens = token_kind_from_string(get_string(require(jc, "tokens", f), join(f, "tokens")), join(f, "tokens"));
      c.count = get_int(require(jc, "count", f), join(f, "count"));
      spec.categories.push_back(std::move(c));
    }
  }
  if (spec.columns < 1) throw ValidationError("columns must be positive", "columns");
  if (!(spec.row_pitch >= 1.0)) throw ValidationError("row_pitch must be at least 1", "row_pitch");
  if (!(spec.jitter_std >= 0.0)) throw ValidationError("jitter_std must be non-negative", "jitter_std");
  return spec;
}

Json synth_spec_to_json(const SynthSpec& spec) {
  Json cats = Json::array();
  for (const auto& c : spec.categories) {
    cats.push_back({{"label", c.label},
                    {"style_attrs", style_to_json(c.style)},
                    {"tokens", token_names[static_cast<int>(c.tokens)]},
                    {"count", c.count}});
  }
  return {{"template", std::string(to_string(spec.kind))},
          {"seed", spec.seed},
          {"items", spec.items},
          {"columns", spec.columns},
          {"row_pitch", spec.row_pitch},
          {"jitter_std", spec.jitter_std},
          {"aspect_ratio", spec.aspect_ratio},
          {"categories", std::move(cats)}};
}

std::vector<SynthSpec> corpus_from_json(const Json& j) {
  const Json& docs = require(j, "documents", "");
  if (!docs.is_array()) throw ParseError("documents", "expected an array");
  std::vector<SynthSpec> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    try {
      out.push_back(synth_spec_from_json(docs[i]));
    } catch (const ParseError& e) {
      throw ParseError(join(at("documents", i), e.field()), e.what());
    }
  }
  return out;
}

Json ground_truth_to_json(const GroundTruth& truth) {
  Json labels = Json::array();
  for (const auto& [id, label] : truth.labels) labels.push_back({{"word_id", id}, {"category", label}});
  return {{"categories", truth.categories()}, {"labels", std::move(labels)}};
}

Json benchmark_to_json(const BenchmarkReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"template", r.template_name},
                    {"seed", r.seed},
                    {"words", r.words},
                    {"lines", r.lines},
                    {"clusters", r.clusters},
                    {"constraints", r.constraints},
                    {"purity", r.purity},
                    {"scribbles", r.scribbles},
                    {"seconds", r.seconds}});
  }
  Json summaries = Json::array();
  for (const auto& t : report.summaries) {
    summaries.push_back({{"template", t.template_name},
                         {"documents", t.documents},
                         {"mean_purity", t.mean_purity},
                         {"mean_words", t.mean_words},
                         {"mean_seconds", t.mean_seconds},
                         {"mean_scribbles", t.mean_scribbles}});
  }
  return {{"documents", rows.size()},
          {"mean_purity", report.mean_purity},
          {"mean_scribbles", report.mean_scribbles},
          {"total_seconds", report.total_seconds},
          {"templates", std::move(summaries)},
          {"rows", std::move(rows)}};
}

void apply_config_overrides(PipelineConfig& cfg, const Json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw ParseError("config", "expected an object of config overrides");
  for (const auto& [key, value] : overrides.items()) {
    if (value.is_object()) {
      for (const auto& [sub, v] : value.items()) {
        apply_config_overrides(cfg, Json{{key + "." + sub, v}});
      }
      continue;
    }
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number()) {
      text = value.dump();
    } else {
      throw ParseError(key, "expected a string, number or boolean");
    }
    set_config_value(cfg, key, text);
  }
}

}  // namespace docaff
