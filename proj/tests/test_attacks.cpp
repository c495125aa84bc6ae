#include <cmath>
#include <random>

#include "doctest.h"
#include "qvkit/attacks.hpp"
#include "qvkit/error.hpp"

using namespace qvkit;

namespace {

// Each of n voters with stake s backs their own proposal honestly, or spreads
// s/n over every proposal when colluding.
std::pair<std::vector<BallotProfile>, std::vector<BallotProfile>> plans(std::size_t n, double s) {
  std::vector<BallotProfile> honest, colluding;
  for (std::size_t i = 0; i < n; ++i) {
    BallotProfile h{"v" + std::to_string(i), std::vector<double>(n, 0.0)};
    h.allocations[i] = s;
    honest.push_back(h);
    colluding.push_back({h.voter_id, std::vector<double>(n, s / n)});
  }
  return {honest, colluding};
}

}  // namespace

TEST_CASE("three-voter collusion example") {
  auto [honest, colluding] = plans(3, 3.0);
  std::vector<double> stakes{3, 3, 3};
  auto rep = collusion_gain(stakes, 3, honest, colluding);
  CHECK(rep.kind == AttackKind::Collusion);
  for (double v : rep.baseline) CHECK(std::fabs(v - std::sqrt(3.0)) <= 1e-12);
  for (double v : rep.attacked) CHECK(v == 3.0);
  CHECK(std::fabs(rep.gain - std::sqrt(3.0)) <= 1e-12);
}

TEST_CASE("collusion gain is sqrt(n) against direct vscore computation") {
  for (std::size_t n = 2; n <= 10; ++n) {
    for (double s : {1.0, 4.0, 12.5}) {
      auto [honest, colluding] = plans(n, s);
      std::vector<double> stakes(n, s);
      auto rep = collusion_gain(stakes, n, honest, colluding);
      const auto hv = vscore(SchemeSpec::qv1(), honest, n);
      const auto cv = vscore(SchemeSpec::qv1(), colluding, n);
      CHECK(std::fabs(rep.gain - cv[0] / hv[0]) <= 1e-12 * rep.gain);
      CHECK(std::fabs(rep.gain - std::sqrt(static_cast<double>(n))) <= 1e-12 * rep.gain);
    }
  }
}

TEST_CASE("collusion input errors") {
  auto [honest, colluding] = plans(3, 3.0);
  std::vector<double> two{3, 3};
  CHECK_THROWS_AS(collusion_gain(two, 3, honest, colluding), Error);
  colluding[0].allocations = {2, 2, 2};
  std::vector<double> stakes{3, 3, 3};
  try {
    collusion_gain(stakes, 3, honest, colluding);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBallot);
    CHECK(e.subject() == "v0");
  }
}

TEST_CASE("sybil gain closed form") {
  for (long long k = 1; k <= 100; ++k) {
    for (double s : {0.5, 1.0, 9.0, 1e6}) {
      const double root = std::sqrt(static_cast<double>(k));
      for (const auto& sc : {SchemeSpec::qv1(), SchemeSpec::qv2(), SchemeSpec::qv3()}) {
        CHECK(std::fabs(sybil_gain(sc, s, k) - root) <= 1e-12 * root);
      }
      CHECK(sybil_gain(SchemeSpec::linear(), s, k) == 1.0);
    }
  }
  CHECK(sybil_gain(SchemeSpec::gpv(0.25), 8, 16) == doctest::Approx(8.0).epsilon(1e-12));
  try {
    sybil_gain(SchemeSpec::qv2(), 1, 0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("sybil gain matches a direct tally of the split identities") {
  for (long long k : {2LL, 5LL, 17LL}) {
    const double s = 9.0;
    for (const auto& sc : {SchemeSpec::qv1(), SchemeSpec::qv2(), SchemeSpec::qv3()}) {
      std::vector<BallotProfile> one{{"w", {voting_credit(sc, s), 0}}};
      std::vector<BallotProfile> many;
      for (long long i = 0; i < k; ++i) {
        many.push_back({"s" + std::to_string(i), {voting_credit(sc, s / k), 0}});
      }
      const double direct = vscore(sc, many, 2)[0] / vscore(sc, one, 2)[0];
      CHECK(std::fabs(sybil_gain(sc, s, k) - direct) <= 1e-12 * direct);
    }
  }
}

TEST_CASE("sybil report flags the unsplit scheme") {
  auto rep = sybil_report(SchemeSpec::qv3(), 9, 9);
  CHECK(rep.gain == doctest::Approx(3.0).epsilon(1e-14));
  bool flagged = false;
  for (const auto& n : rep.narrative) flagged = flagged || n.step.find("qv3") != std::string::npos;
  CHECK(flagged);
}

TEST_CASE("last voter never loses by optimizing") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto scheme : {UtilityScheme::Qv1, UtilityScheme::Qv2}) {
    for (int t = 0; t < 40; ++t) {
      const std::size_t m = 2 + t % 3;
      LastVoterScenario sc;
      sc.scheme = scheme;
      std::vector<StakeEntry> prior;
      const SchemeSpec spec = scheme == UtilityScheme::Qv1 ? SchemeSpec::qv1() : SchemeSpec::qv2();
      for (int j = 0; j < 4; ++j) {
        const double stake = 0.5 + 10 * u(rng);
        prior.push_back({"p" + std::to_string(j), stake});
        std::vector<double> w(m);
        double tot = 0;
        for (auto& x : w) tot += (x = u(rng) + 1e-3);
        for (auto& x : w) x *= voting_credit(spec, stake) / tot;
        sc.prior_ballots.push_back({"p" + std::to_string(j), w});
      }
      sc.prior_stakes = canonicalize(prior);
      sc.last_voter_stake = 0.5 + 10 * u(rng);
      for (std::size_t r = 0; r < m; ++r) {
        sc.profits.push_back(10 * u(rng));
        sc.alignment.push_back(0.8 * u(rng));
      }
      auto rep = last_voter_advantage(sc);
      CHECK(rep.kind == AttackKind::LastVoter);
      CHECK(rep.gain >= 1.0 - 1e-9);
    }
  }
}

TEST_CASE("last voter problem reads prior mass through f") {
  LastVoterScenario sc;
  sc.scheme = UtilityScheme::Qv1;
  sc.prior_stakes = canonicalize({{"a", 4}, {"b", 9}});
  sc.prior_ballots = {{"a", {4, 0}}, {"b", {0, 9}}};
  sc.last_voter_stake = 1;
  sc.profits = {1, 1};
  sc.alignment = {0.5, 0.0};
  auto p = last_voter_problem(sc);
  CHECK(p.total_external[0] == 2.0);
  CHECK(p.total_external[1] == 3.0);
  CHECK(p.aligned_external[0] == 1.0);
  CHECK(p.aligned_external[1] == 0.0);
}
