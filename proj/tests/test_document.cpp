#include <doctest.h>

#include <cmath>

#include "docaff/document.hpp"
#include "fixtures.hpp"

using namespace docaff;
using docaff::testing::word;

TEST_CASE("vertical overlap") {
  CHECK(vertical_overlap({0, 0.1, 0.1, 0.05}, {0.2, 0.1, 0.1, 0.05}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(vertical_overlap({0, 0.1, 0.1, 0.05}, {0.2, 0.2, 0.1, 0.05}) == 0.0);
  // overlap 0.02 over the smaller height 0.04
  CHECK(vertical_overlap({0, 0.10, 0.1, 0.04}, {0.2, 0.12, 0.1, 0.08}) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("line weight") {
  // gap 0.005, r 0.8, heights 0.05 / 0.04
  CHECK(line_weight({0.1, 0.1, 0.1, 0.05}, {0.205, 0.1, 0.1, 0.04}, 0.8) == doctest::Approx(0.08).epsilon(1e-9));
  // gap 0.01, r 0.75, heights 0.05 / 0.03
  CHECK(line_weight({0.1, 0.1, 0.1, 0.05}, {0.21, 0.1, 0.1, 0.03}, 0.75) == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(line_weight({0.1, 0.1, 0.1, 0.05}, {0.2, 0.1, 0.1, 0.05}, 3.0) == 0.0);
  CHECK(line_weight({0.1, 0.1, 0.1, 0.05}, {0.15, 0.1, 0.1, 0.05}, 1.0) == 0.0);
}

TEST_CASE("two words join or split on the weight threshold") {
  DocumentModel doc;
  doc.aspect_ratio = 0.8;
  doc.words = {word(1, "a", {0.1, 0.1, 0.1, 0.05}), word(2, "b", {0.205, 0.1, 0.1, 0.04})};
  CHECK(build_contextual_lines(doc).size() == 1);

  doc.aspect_ratio = 0.75;
  doc.words = {word(1, "a", {0.1, 0.1, 0.1, 0.05}), word(2, "b", {0.21, 0.1, 0.1, 0.03})};
  CHECK(build_contextual_lines(doc).size() == 2);
}

TEST_CASE("five words with alternating gaps match the thresholded-adjacency components") {
  const double weights[4] = {0.05, 0.2, 0.05, 0.05};
  const double h = 0.05;
  DocumentModel doc;
  doc.aspect_ratio = 1.0;
  double x = 0.05;
  for (int i = 0; i < 5; ++i) {
    doc.words.push_back(word(i, "w" + std::to_string(i), {x, 0.3, 0.1, h}));
    if (i < 4) x += 0.1 + weights[i] * h / doc.aspect_ratio;
  }

  std::vector<std::vector<bool>> adj(5, std::vector<bool>(5, false));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      const BBox& a = doc.words[static_cast<std::size_t>(i)].bbox;
      const BBox& b = doc.words[static_cast<std::size_t>(j)].bbox;
      if (std::abs(i - j) == 1 && vertical_overlap(a, b) >= 0.5 &&
          line_weight(a.x < b.x ? a : b, a.x < b.x ? b : a, 1.0) < 0.1) {
        adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
      }
    }
  }
  const auto expected = docaff::testing::closure_partition(adj);
  CHECK(expected == std::set<std::vector<int>>{{0, 1}, {2, 3, 4}});

  const auto lines = build_contextual_lines(doc);
  std::set<std::vector<int>> got;
  for (const auto& l : lines) got.insert(l.word_ids);
  CHECK(got == expected);
}

TEST_CASE("lines are ordered left to right and cover every word") {
  DocumentModel doc;
  doc.aspect_ratio = 1.0;
  doc.words = {word(5, "c", {0.4, 0.1, 0.1, 0.04}), word(3, "a", {0.1, 0.1, 0.1, 0.04}),
               word(4, "b", {0.2, 0.1, 0.1, 0.04}), word(9, "z", {0.1, 0.5, 0.1, 0.04})};
  const auto lines = build_contextual_lines(doc);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].word_ids == std::vector<int>{3, 4});
  CHECK(lines[1].word_ids == std::vector<int>{5});
  CHECK(lines[2].word_ids == std::vector<int>{9});
  CHECK(lines[0].bbox.x == doctest::Approx(0.1));
  CHECK(lines[0].bbox.w == doctest::Approx(0.2));
  CHECK(lines[0].bbox.h == doctest::Approx(0.04));
  for (const auto& w : doc.words) CHECK(w.line_id.has_value());
  CHECK_NOTHROW(validate(doc));
}

TEST_CASE("raising the threshold never adds lines") {
  auto generated = docaff::testing::small_menu(11, 8);
  std::size_t previous = generated.doc.words.size() + 1;
  for (double t : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
    DocumentModel doc = generated.doc;
    const auto n = build_contextual_lines(doc, {t, 0.5}).size();
    CHECK(n <= previous);
    previous = n;
  }
}

TEST_CASE("ingest maps fields and validates") {
  const auto r = ingest_document(R"({"doc_id":"x","aspect_ratio":0.75,"words":[
    {"id":1,"text":"Pasta","bbox":[0.1,0.1,0.2,0.05]},
    {"id":2,"text":"$5.99","bbox":[0.4,0.1,0.1,0.05],"style_attrs":{"font_family_id":2,"bold":true,
     "italic":false,"font_size":11,"color_rgb":[1,2,3]}}]})");
  CHECK(r.doc.words.size() == 2);
  CHECK(r.doc.aspect_ratio == 0.75);
  CHECK(r.doc.lines.empty());
  REQUIRE(r.doc.words[1].style.has_value());
  CHECK(r.doc.words[1].style->bold);
  CHECK(r.warnings.empty());

  CHECK(ingest_document(R"({"doc_id":"e","aspect_ratio":1,"words":[]})").doc.words.empty());
  CHECK_THROWS_AS(ingest_document(R"({"doc_id":"d","aspect_ratio":1,"words":[
    {"id":7,"text":"a","bbox":[0.1,0.1,0.1,0.1]},{"id":7,"text":"b","bbox":[0.3,0.1,0.1,0.1]}]})"),
                  ValidationError);
}

TEST_CASE("ingest clamps boxes and names malformed fields") {
  const auto r = ingest_document(R"({"doc_id":"x","aspect_ratio":1,"words":[
    {"id":1,"text":"edge","bbox":[0.95,0.1,0.1,0.05]}]})");
  CHECK(r.warnings.size() == 1);
  CHECK(r.doc.words[0].bbox.right() <= 1.0 + 1e-12);

  try {
    ingest_document(R"({"doc_id":"x","aspect_ratio":1,"words":[{"id":1,"text":"a","bbox":[0.1,0.1]}]})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "words[0].bbox");
  }
  CHECK_THROWS_AS(ingest_document("{not json"), ParseError);
}
