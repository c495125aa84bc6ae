#include <cmath>

#include "doctest.h"
#include "qvkit/error.hpp"
#include "qvkit/schemes.hpp"
#include "qvkit/stake.hpp"

using namespace qvkit;

TEST_CASE("voting credit per family") {
  CHECK(voting_credit(SchemeSpec::qv2(), 9) == 3.0);
  CHECK(voting_credit(SchemeSpec::linear(), 7) == 7.0);
  CHECK(voting_credit(SchemeSpec::gpv(0.25), 16) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(voting_credit(SchemeSpec::qv1(), 5) == 5.0);
  CHECK(voting_credit(SchemeSpec::qv3(), 4) == 2.0);
}

TEST_CASE("scheme construction and parsing") {
  CHECK_THROWS_AS(SchemeSpec::gpv(1.0), Error);
  CHECK_THROWS_AS(SchemeSpec::gpv(0.0), Error);
  CHECK_THROWS_AS(SchemeSpec(Family::Qv3, Polarity::YesAbstain, StakeMode::Split), Error);
  CHECK_THROWS_AS(SchemeSpec(Family::Qv1, Polarity::YesAbstain, StakeMode::Unsplit), Error);
  CHECK(SchemeSpec::qv3().mode() == StakeMode::Unsplit);
  CHECK(parse_scheme("gpv:0.25").gamma() == 0.25);
  CHECK(parse_scheme("gpv:0.25").name() == "gpv(0.25)");
  CHECK(parse_scheme("qv1").family() == Family::Qv1);
  CHECK_THROWS_AS(parse_scheme("qv9"), Error);
  CHECK_THROWS_AS(parse_scheme("gpv:abc"), Error);
}

TEST_CASE("validate_ballot") {
  const ValidationOptions opts;
  CHECK_FALSE(validate_ballot(SchemeSpec::qv2(), 9, {"v", {1, 2, 0}}, 3, opts));
  CHECK_FALSE(validate_ballot(SchemeSpec::qv3(), 9, {"v", {3, 0, 3}}, 3, opts));

  auto over = validate_ballot(SchemeSpec::qv2(), 9, {"v", {2, 2, 0}}, 3, opts);
  REQUIRE(over);
  CHECK(over->kind == ViolationKind::CreditMismatch);
  CHECK(over->expected == 3.0);
  CHECK(over->actual == 4.0);

  auto illegal = validate_ballot(SchemeSpec::qv3(), 9, {"v", {3, 1, 0}}, 3, opts);
  REQUIRE(illegal);
  CHECK(illegal->kind == ViolationKind::IllegalEntry);
  CHECK(illegal->index == 1);

  auto neg = validate_ballot(SchemeSpec::qv2(), 9, {"v", {4, -1, 0}}, 3, opts);
  REQUIRE(neg);
  CHECK(neg->kind == ViolationKind::NegativeUnderYesAbstain);

  // Negative votes consume credit under yes-no-abstain.
  CHECK_FALSE(validate_ballot(SchemeSpec::qv2(Polarity::YesNoAbstain), 9, {"v", {2, -1, 0}}, 3,
                              opts));

  auto arity = validate_ballot(SchemeSpec::qv2(), 9, {"v", {3}}, 3, opts);
  REQUIRE(arity);
  CHECK(arity->kind == ViolationKind::LengthMismatch);

  auto under = validate_ballot(SchemeSpec::qv2(), 9, {"v", {1, 0, 0}}, 3, opts);
  REQUIRE(under);
  CHECK(under->kind == ViolationKind::CreditMismatch);
  CHECK_FALSE(validate_ballot(SchemeSpec::qv2(), 9, {"v", {1, 0, 0}}, 3, {1e-9, true}));
}

TEST_CASE("concentrated ballot is valid for every scheme") {
  for (const auto& s : {SchemeSpec::linear(), SchemeSpec::qv1(), SchemeSpec::qv2(),
                        SchemeSpec::qv3(), SchemeSpec::gpv(0.3)}) {
    for (double stake : {0.01, 1.0, 7.5, 1e6}) {
      CHECK_FALSE(validate_ballot(s, stake, {"v", {voting_credit(s, stake), 0, 0}}, 3));
    }
  }
}

TEST_CASE("score and vscore") {
  CHECK(score({{"a", {1, 0}}, {"b", {2, 0}}}, 2) == std::vector<double>{3, 0});
  CHECK(score({}, 2) == std::vector<double>{0, 0});
  CHECK(score({{"a", {1, -1}}, {"b", {0, 1}}}, 2) == std::vector<double>{1, 0});
  CHECK_THROWS_AS(score({{"a", {1}}}, 2), Error);

  auto single = vscore(SchemeSpec::qv1(), {{"v", {3, 0, 0}}}, 3);
  CHECK(single[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(single[1] == 0.0);

  auto spread = vscore(SchemeSpec::qv1(), {{"a", {1, 1, 1}}, {"b", {1, 1, 1}}, {"c", {1, 1, 1}}}, 3);
  CHECK(spread == std::vector<double>{3, 3, 3});

  auto neg = vscore(SchemeSpec::qv1(Polarity::YesNoAbstain), {{"a", {-4, 0}}}, 2);
  CHECK(neg[0] == -2.0);
}

TEST_CASE("tally") {
  auto d = canonicalize({{"a", 1}, {"b", 2}});
  auto lin = tally(SchemeSpec::linear(), d, {{"a", {1, 0}}, {"b", {0, 2}}}, 2);
  CHECK(lin.score == std::vector<double>{1, 2});
  CHECK(lin.vscore == std::vector<double>{1, 2});

  auto d3 = canonicalize({{"p", 4}, {"q", 9}});
  auto qv3 = tally(SchemeSpec::qv3(), d3, {{"p", {2, 2}}, {"q", {3, 0}}}, 2);
  CHECK(qv3.vscore == std::vector<double>{5, 2});
  REQUIRE(qv3.credit_used.size() == 2);
  CHECK(qv3.credit_used[0].second == 2.0);

  try {
    tally(SchemeSpec::linear(), d, {{"zz", {1, 0}}}, 2);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownVoter);
    CHECK(e.subject() == "zz");
  }
  try {
    tally(SchemeSpec::qv2(), d3, {{"q", {2, 2}}}, 2);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBallot);
    CHECK(e.subject() == "q");
  }
  try {
    tally(SchemeSpec::qv2(), d3, {{"q", {3}}}, 2);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
    CHECK(e.subject() == "q");
  }
}

TEST_CASE("identity-f schemes have vscore equal to score and tallies are additive") {
  auto d = canonicalize({{"a", 4}, {"b", 9}, {"c", 16}});
  std::vector<BallotProfile> A{{"a", {1, 1, 0}}};
  std::vector<BallotProfile> B{{"b", {0, 1, 2}}, {"c", {4, 0, 0}}};
  std::vector<BallotProfile> all = A;
  all.insert(all.end(), B.begin(), B.end());
  auto whole = tally(SchemeSpec::qv2(), d, all, 3);
  CHECK(whole.score == whole.vscore);
  auto ta = tally(SchemeSpec::qv2(), d, A, 3);
  auto tb = tally(SchemeSpec::qv2(), d, B, 3);
  for (int l = 0; l < 3; ++l) CHECK(whole.vscore[l] == ta.vscore[l] + tb.vscore[l]);

  // Unsplit: a voter on c proposals contributes c·g(s).
  auto u = tally(SchemeSpec::qv3(), d, {{"c", {4, 4, 4}}}, 3);
  CHECK(u.vscore[0] + u.vscore[1] + u.vscore[2] == 12.0);
}
