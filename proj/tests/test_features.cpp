#include <doctest.h>

#include "docaff/features.hpp"
#include "docaff/text_rules.hpp"
#include "fixtures.hpp"

using namespace docaff;
using docaff::testing::styled;
using docaff::testing::word;

TEST_CASE("syntax bins") {
  CHECK(syntax_bin("HELLO") == SyntaxBin::Upper);
  CHECK(syntax_bin("hello") == SyntaxBin::Lower);
  CHECK(syntax_bin("Hello") == SyntaxBin::Mixed);
  CHECK(syntax_bin("12:30") == SyntaxBin::Mixed);
  CHECK(syntax_bin("ÉTÉ") == SyntaxBin::Upper);
}

TEST_CASE("semantic tags follow the rule order") {
  CHECK(semantic_tag("$5.99") == SemanticTag::Price);
  CHECK(semantic_tag("5.99€") == SemanticTag::Price);
  CHECK(semantic_tag("45%") == SemanticTag::Percent);
  CHECK(semantic_tag("12:30") == SemanticTag::Time);
  CHECK(semantic_tag("9:05pm") == SemanticTag::Time);
  CHECK(semantic_tag("12/05/2024") == SemanticTag::Date);
  CHECK(semantic_tag("3rd") == SemanticTag::Ordinal);
  CHECK(semantic_tag("1,250") == SemanticTag::Number);
  CHECK(semantic_tag("Pasta") == SemanticTag::Plain);
  CHECK(semantic_tag("--") == SemanticTag::None);
}

TEST_CASE("line characterization") {
  const SemanticTag price[] = {SemanticTag::Plain, SemanticTag::Price};
  const SemanticTag noisy[] = {SemanticTag::Time, SemanticTag::Price};
  const SemanticTag plain[] = {SemanticTag::Plain, SemanticTag::Plain, SemanticTag::Plain};
  CHECK(characterize_line(price) == SemanticTag::Price);
  CHECK_FALSE(characterize_line(noisy).has_value());
  CHECK(characterize_line(plain) == SemanticTag::Plain);
}

TEST_CASE("content primitives") {
  const auto hist = char_class_histogram("12:30");
  CHECK(hist[static_cast<std::size_t>(CharClass::Digit)] == doctest::Approx(0.8));
  CHECK(token_shape("12:30") == TokenShape::NumericWithSeparators);
  CHECK(token_shape("HELLO") != token_shape("hello"));
  CHECK(codepoint_count("café") == 4);
}

TEST_CASE("geometry block is the bbox") {
  for (const BBox b : {BBox{0.1, 0.2, 0.3, 0.05}, BBox{0, 0, 1, 1}, BBox{0.5, 0.5, 0.01, 0.02}}) {
    const auto g = encode_geometry(word(1, "x", b));
    CHECK(g == Eigen::Vector4d(b.x, b.y, b.w, b.h));
  }
}

TEST_CASE("style encoding") {
  FeatureConfig cfg;
  const auto a = styled(1, "x", {0.1, 0.1, 0.1, 0.05}, docaff::testing::style_of(3, false, 10));
  SUBCASE("deterministic under the same key") {
    CHECK(encode_style(a, a.style, "doc", cfg) == encode_style(a, a.style, "doc", cfg));
    CHECK(encode_style(a, a.style, "doc", cfg).norm() == doctest::Approx(1.0));
  }
  SUBCASE("sizes 10 and 11 are near-parallel without noise") {
    cfg.noise_std = 0.0;
    StyleAttrs s11 = *a.style;
    s11.font_size = 11;
    const auto u = encode_style(a, a.style, "doc", cfg);
    const auto v = encode_style(a, s11, "doc", cfg);
    // raw vectors differ only in the log-size slot; cosine by hand
    const auto ru = raw_style_vector(*a.style, cfg);
    const auto rv = raw_style_vector(s11, cfg);
    const double expected = ru.dot(rv) / (ru.norm() * rv.norm());
    CHECK(u.dot(v) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected > 0.98);
  }
  SUBCASE("bold changes exactly one raw coordinate") {
    StyleAttrs bold = *a.style;
    bold.bold = true;
    const Eigen::VectorXd diff = raw_style_vector(bold, cfg) - raw_style_vector(*a.style, cfg);
    CHECK((diff.array() != 0.0).count() == 1);
  }
  SUBCASE("glyph fallback without attributes") {
    const auto f = encode_style(word(2, "ABc", {0.1, 0.1, 0.09, 0.03}), std::nullopt, "doc", cfg);
    CHECK(f.norm() == doctest::Approx(1.0));
    CHECK(f.tail(cfg.style_dim - 3).isZero());
  }
}

TEST_CASE("content encoding differs across lines only in the context block") {
  DocumentModel doc;
  doc.aspect_ratio = 1.0;
  doc.words = {word(1, "Pasta", {0.1, 0.1, 0.1, 0.04}), word(2, "$5.99", {0.202, 0.1, 0.1, 0.04}),
               word(3, "Pasta", {0.1, 0.5, 0.1, 0.04}), word(4, "fresh", {0.202, 0.5, 0.1, 0.04})};
  build_contextual_lines(doc);
  FeatureConfig cfg;
  const auto u = encode_content(doc.words[0], &doc.lines[0], doc, cfg);
  const auto v = encode_content(doc.words[2], &doc.lines[1], doc, cfg);
  const Eigen::Index ctx = cfg.content_dim - kContentContextDims;
  CHECK(u.head(ctx).isApprox(v.head(ctx)));
  CHECK_FALSE(u.tail(kContentContextDims).isApprox(v.tail(kContentContextDims)));
  CHECK(u.norm() == doctest::Approx(1.0));
}

TEST_CASE("assembled representations") {
  auto generated = docaff::testing::small_menu();
  DocumentModel doc = generated.doc;
  build_contextual_lines(doc);
  FeatureConfig cfg;
  const auto reps = assemble_representations(doc, cfg);
  CHECK(reps.dim() == 100);
  CHECK(reps.size() == static_cast<Eigen::Index>(doc.words.size()));
  for (Eigen::Index i = 0; i < reps.size(); ++i) {
    const auto& b = doc.words[static_cast<std::size_t>(i)].bbox;
    CHECK(reps.z.row(i).tail<4>().transpose() == Eigen::Vector4d(b.x, b.y, b.w, b.h));
    CHECK(reps.z.row(i).head(32).norm() == doctest::Approx(1.0));
  }

  for (auto& w : doc.words) w.feature.assign(512, 0.5);
  const auto external = assemble_representations(doc, cfg);
  CHECK(external.dim() == 516);
  doc.words[0].feature.resize(3);
  CHECK_THROWS_AS(assemble_representations(doc, cfg), ValidationError);

  DocumentModel empty;
  CHECK(assemble_representations(empty, cfg).size() == 0);
}
