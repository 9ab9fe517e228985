#include <doctest.h>

#include <sstream>

#include "docaff/refine.hpp"
#include "docaff/synth.hpp"
#include "fixtures.hpp"

using namespace docaff;

TEST_CASE("selections become pairwise constraints") {
  CHECK(selection_to_constraints(UserSelection::must({1, 2, 3, 4})).size() == 6);
  const auto cannot = selection_to_constraints(UserSelection::cannot({1, 2}, {3, 4, 5}));
  CHECK(cannot.size() == 6);
  for (const auto& c : cannot) {
    CHECK(c.kind == ConstraintKind::CannotLink);
    CHECK(c.source == ConstraintSource::User);
  }
  CHECK_THROWS_AS(selection_to_constraints(UserSelection::must({1})), ValidationError);
  CHECK_THROWS_AS(selection_to_constraints(UserSelection::must({1, 1})), ValidationError);
  CHECK_THROWS_AS(selection_to_constraints(UserSelection::cannot({1, 2}, {2})), ValidationError);
  CHECK_THROWS_AS(selection_to_constraints(UserSelection::cannot({}, {2})), ValidationError);
}

TEST_CASE("merging user constraints") {
  ConstraintSet auto_set;
  auto_set.constraints = {make_constraint(3, 9, ConstraintKind::CannotLink, ConstraintSource::Inter),
                          make_constraint(1, 2, ConstraintKind::MustLink, ConstraintSource::Intra)};
  auto_set.recount();

  const std::vector<Constraint> user{make_constraint(3, 9, ConstraintKind::MustLink, ConstraintSource::User)};
  const auto merged = merge_constraints(auto_set, user);
  CHECK(merged.constraints.size() == 2);
  CHECK(merged.stats.must_user == 1);
  CHECK(merged.stats.cannot_inter == 0);

  const std::vector<Constraint> disjoint{make_constraint(5, 6, ConstraintKind::CannotLink, ConstraintSource::User)};
  CHECK(merge_constraints(auto_set, disjoint).constraints.size() == 3);

  const std::vector<Constraint> contradictory{make_constraint(3, 9, ConstraintKind::MustLink, ConstraintSource::User),
                                              make_constraint(9, 3, ConstraintKind::CannotLink, ConstraintSource::User)};
  try {
    merge_constraints(auto_set, contradictory);
    FAIL("expected a conflict");
  } catch (const ConstraintConflict& e) {
    CHECK(e.pairs() == std::vector<std::pair<int, int>>{{3, 9}});
  }
}

TEST_CASE("user constraints are exempt from the cap and the balance") {
  ConstraintSet auto_set;
  std::vector<Constraint> user;
  for (int i = 0; i < 1500; ++i) user.push_back(make_constraint(2 * i, 2 * i + 1, ConstraintKind::MustLink, ConstraintSource::User));
  const auto merged = merge_constraints(auto_set, user);
  CHECK(merged.stats.must_user == 1500);
}

TEST_CASE("refinement sessions") {
  const auto generated = docaff::testing::small_menu(6, 5);
  auto cfg = docaff::testing::fast_config(3);
  RefineSession s = run_pipeline(generated.doc, cfg);
  REQUIRE(s.trained);
  CHECK(s.assignment.word_to_cluster.size() == s.doc.words.size());
  CHECK(s.projection.rows() == static_cast<Eigen::Index>(s.doc.words.size()));

  SUBCASE("zero epochs keeps the clusters") {
    const auto before = s.assignment;
    const auto model = s.model;
    refine(s, 0);
    CHECK(s.assignment == before);
    CHECK(s.model == model);
    CHECK(s.history.size() == 1);
  }
  SUBCASE("user constraints survive and runs are deterministic") {
    const int a = s.doc.words[0].id;
    const int b = s.doc.words.back().id;
    const std::vector<UserSelection> sel{UserSelection::must({a, b})};
    CHECK(add_user_selections(s, sel).size() == 1);
    RefineSession twin = s;
    refine(s, 3);
    refine(s, 3);
    refine(twin, 3);
    refine(twin, 3);
    CHECK(s.model == twin.model);
    CHECK(s.assignment == twin.assignment);
    CHECK(s.history.back().user_constraints == 1);
    CHECK(s.history.back().training_constraints == merge_constraints(s.auto_constraints, s.user_constraints).constraints.size());
  }
  SUBCASE("unknown words are rejected") {
    const std::vector<UserSelection> sel{UserSelection::must({1, 100000})};
    CHECK_THROWS_AS(add_user_selections(s, sel), ValidationError);
    CHECK(s.user_constraints.empty());
  }
  SUBCASE("refining before a run is an error") {
    RefineSession fresh = prepare_session(generated.doc, cfg);
    CHECK_THROWS_AS(refine(fresh, 1), ValidationError);
  }
}

TEST_CASE("pipeline handles degenerate documents") {
  auto cfg = docaff::testing::fast_config();
  DocumentModel empty;
  empty.aspect_ratio = 1.0;
  const auto s = run_pipeline(empty, cfg);
  CHECK(s.assignment.cluster_count() == 0);

  DocumentModel single;
  single.aspect_ratio = 1.0;
  single.words = {docaff::testing::word(1, "alone", {0.1, 0.1, 0.2, 0.05})};
  const auto one = run_pipeline(single, cfg);
  CHECK(one.assignment.cluster_count() == 1);
  CHECK(one.projection.rows() == 1);
  CHECK(one.projection.isZero());
}
