#include <doctest.h>

#include "docaff/json_io.hpp"
#include "docaff/pipeline.hpp"
#include "fixtures.hpp"

using namespace docaff;

TEST_CASE("document round trip keeps lines and styles") {
  auto generated = docaff::testing::small_menu(2, 4);
  DocumentModel doc = generated.doc;
  build_contextual_lines(doc);
  doc.words[0].feature = {0.25, -1.5};
  const Json j = document_to_json(doc);
  CHECK(document_from_json(j) == doc);
  const auto ingested = ingest_document(j.dump());
  CHECK(ingested.doc.words == [&] {
    auto words = doc.words;
    for (auto& w : words) w.line_id.reset();
    return words;
  }());
}

TEST_CASE("cluster and projection formats") {
  ClusterAssignment a;
  a.clusters = {{1, 4}, {2}};
  a.word_to_cluster = {{1, 0}, {4, 0}, {2, 1}};
  const Json j = clusters_to_json(a);
  CHECK(j.dump() == R"({"clusters":[{"id":0,"word_ids":[1,4]},{"id":1,"word_ids":[2]}]})");
  CHECK(clusters_from_json(j) == a);

  Eigen::MatrixXd p(3, 2);
  p << 0.5, -1, 0, 0, 2, 3;
  const Json proj = projection_to_json({1, 2, 4}, p, a);
  REQUIRE(proj["points"].size() == 3);
  CHECK(proj["points"][1]["word_id"] == 2);
  CHECK(proj["points"][1]["cluster_id"] == 1);
  CHECK(proj["points"][0]["xy"][0] == 0.5);
}

TEST_CASE("constraints, selections and edits") {
  const Constraint c = make_constraint(9, 3, ConstraintKind::CannotLink, ConstraintSource::User);
  CHECK(constraint_to_json(c).dump() == R"({"i":3,"j":9,"kind":"CANNOT_LINK","source":"USER"})");
  CHECK(constraint_from_json(constraint_to_json(c)) == c);
  const std::vector<Constraint> list{c, make_constraint(1, 2, ConstraintKind::MustLink, ConstraintSource::Intra)};
  const std::string jsonl = constraints_jsonl(list);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);

  const auto must = selection_from_json(parse_json(R"({"kind":"MUST_GROUP","word_ids":[1,2,3,4]})"));
  CHECK(must.kind == UserSelection::Kind::MustGroup);
  CHECK(must.group_a.size() == 4);
  const auto cannot = selection_from_json(parse_json(R"({"kind":"CANNOT_GROUP","group_a":[1],"group_b":[2,3]})"));
  CHECK(selection_from_json(selection_to_json(cannot)).group_b == cannot.group_b);
  CHECK_THROWS_AS(selection_from_json(parse_json(R"({"kind":"LASSO"})")), ParseError);

  for (const EditSpec& spec :
       std::vector<EditSpec>{SetColor{{1, 2, 3}}, SetWeight{false}, SetItalic{true}, ScaleFont{1.5}, DeleteWords{},
                             Emphasize{0.3}, NumericShift{-0.25}, TimeShift{90}, FindReplace{"a+", "b"},
                             AlignX{0.2}, Translate{0.01, -0.02}}) {
    CHECK(edit_spec_from_json(edit_spec_to_json(spec)) == spec);
  }
  CHECK(edit_spec_to_json(TimeShift{60}).dump() == R"({"delta_minutes":60,"op":"TIME_SHIFT"})");
  const EditLogEntry entry{2, TimeShift{60}, {1, 2}, {3}};
  CHECK(edit_entry_from_json(edit_entry_to_json(entry)) == entry);
}

TEST_CASE("train report and synth spec round trips") {
  TrainReport r;
  r.epoch_loss = {1.5, 0.25};
  r.steps = 4;
  r.mean_must_affinity = 0.9;
  r.warnings = {"w"};
  const auto back = train_report_from_json(train_report_to_json(r));
  CHECK(back.epoch_loss == r.epoch_loss);
  CHECK(back.steps == 4);
  CHECK(back.warnings == r.warnings);

  const auto spec = make_spec(Template::DenseDoc, 7, 12);
  const auto again = synth_spec_from_json(synth_spec_to_json(spec));
  CHECK(generate_document(again).doc == generate_document(spec).doc);
  const auto corpus = corpus_from_json(parse_json(R"({"documents":[{"template":"MENU","seed":3,"items":5}]})"));
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].kind == Template::Menu);
}

TEST_CASE("config text round trip and overrides") {
  PipelineConfig cfg;
  cfg.set_seed(5);
  cfg.train.epochs = 42;
  cfg.cluster.likelihood_min = 0.8;
  const std::string text = format_config(cfg);
  CHECK(format_config(parse_config(text)) == text);
  CHECK(parse_config("# comment\n\ntrain.epochs = 7\n").train.epochs == 7);
  CHECK_THROWS_AS(parse_config("train.nope=1"), ValidationError);
  CHECK_THROWS_AS(parse_config("train.epochs=ten"), ValidationError);
  CHECK_THROWS_AS(parse_config("train.dropout=1.5"), ValidationError);
  for (const auto& key : config_keys()) CHECK(text.find(key + "=") != std::string::npos);

  PipelineConfig o;
  apply_config_overrides(o, parse_json(R"({"train.epochs": 3, "cluster": {"likelihood_min": "0.9"}})"));
  CHECK(o.train.epochs == 3);
  CHECK(o.cluster.likelihood_min == 0.9);
}

TEST_CASE("seed propagation") {
  PipelineConfig cfg;
  cfg.set_seed(99);
  CHECK(cfg.train.seed != 0);
  PipelineConfig other;
  other.set_seed(100);
  CHECK(other.train.seed != cfg.train.seed);
  CHECK(other.constraints.rng_seed != cfg.constraints.rng_seed);
}
