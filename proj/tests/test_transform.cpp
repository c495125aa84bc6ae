#include <cmath>
#include <random>

#include "doctest.h"
#include "qvkit/error.hpp"
#include "qvkit/metrics.hpp"
#include "qvkit/transform.hpp"
#include "support/oracles.hpp"
#include "support/populations.hpp"

using namespace qvkit;
using doctest::Approx;

namespace {
StakeDistribution dist_of(const std::vector<double>& s) {
  std::vector<StakeEntry> e;
  for (std::size_t i = 0; i < s.size(); ++i) e.push_back({"v" + std::to_string(i), s[i]});
  return canonicalize(std::move(e));
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qvkit::Error");
  return ErrorCode::InvalidArgument;
}
}  // namespace

TEST_CASE("apply_gamma") {
  auto d = dist_of({1, 4, 9});
  auto t = apply_gamma(d, 0.5);
  CHECK(t[0].stake == 1.0);
  CHECK(t[1].stake == 2.0);
  CHECK(t[2].stake == 3.0);
  CHECK(t[2].voter_id == d[2].voter_id);
  CHECK(apply_gamma(d, 1.0) == d);
  CHECK_THROWS_AS(apply_gamma(d, 0.0), Error);
}

TEST_CASE("top_share") {
  auto d = dist_of({1, 99});
  CHECK(top_share(d, 1, 1.0) == Approx(0.99).epsilon(1e-15));
  CHECK(top_share(d, 1, 1e-12) == Approx(0.5).epsilon(1e-9));
  CHECK(top_share(d, 2, 0.3) == 1.0);
  CHECK(code_of([&] { top_share(d, 0, 0.5); }) == ErrorCode::KOutOfRange);
  CHECK(code_of([&] { top_share(d, 3, 0.5); }) == ErrorCode::KOutOfRange);

  for (std::size_t t = 0; t < 20; ++t) {
    auto p = testpop::tie_free_population(3, t);
    const auto s = p.stakes();
    const std::size_t k = 1 + t % p.size();
    for (double g : {0.05, 0.4, 0.8, 1.0}) {
      CHECK(oracle::relative_close(top_share(p, k, g), oracle::top_share(s, k, g), 1e-12));
    }
  }
}

TEST_CASE("top_share is increasing in gamma") {
  for (std::size_t t = 0; t < 30; ++t) {
    auto p = testpop::tie_free_population(8, t);
    const std::size_t k = 1 + t % std::min<std::size_t>(p.size() - 1, 5);
    double prev = 0.0;
    for (int i = 1; i <= 20; ++i) {
      const double v = top_share(p, k, 0.05 * i);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("top_share derivative matches finite differences") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pick(0.05, 0.95);
  for (std::size_t t = 0; t < 10; ++t) {
    auto p = testpop::tie_free_population(21, t);
    const double g = pick(rng);
    const double h = 1e-6;
    const double fd = (top_share(p, 1, g + h) - top_share(p, 1, g - h)) / (2 * h);
    const double an = top_share_derivative(p, 1, g);
    CHECK(fd > 0);
    CHECK(std::fabs(fd - an) <= 1e-4 * std::fabs(an));
  }
}

TEST_CASE("gamma_search closed form for two voters") {
  auto d = dist_of({1, 99});
  auto r = gamma_search(d, 1, 0.6);
  CHECK(r.converged);
  CHECK(std::fabs(r.gamma - std::log(1.5) / std::log(99.0)) <= 1e-6);
  CHECK(std::fabs(r.achieved_share - 0.6) <= 1e-9);
  CHECK(r.iterations <= 200);
}

TEST_CASE("gamma_search bounds") {
  auto d = dist_of({1, 99});
  CHECK(code_of([&] { gamma_search(d, 1, 0.5); }) == ErrorCode::TargetBelowFloor);
  CHECK(code_of([&] { gamma_search(d, 1, 0.3); }) == ErrorCode::TargetBelowFloor);
  auto above = gamma_search(d, 1, 0.995);
  CHECK(above.gamma == 1.0);
  CHECK(above.converged);
  CHECK(above.achieved_share == Approx(0.99).epsilon(1e-15));
  GammaSearchOptions strict;
  strict.strict_input = true;
  CHECK(code_of([&] { gamma_search(d, 1, 0.995, strict); }) == ErrorCode::TargetAboveCurrent);
  CHECK(code_of([&] { gamma_search(d, 3, 0.7); }) == ErrorCode::KOutOfRange);
}

TEST_CASE("gamma_search reports non-convergence instead of failing") {
  auto d = dist_of({1, 99});
  GammaSearchOptions few;
  few.max_iter = 3;
  auto r = gamma_search(d, 1, 0.6, few);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.gamma > 0.0);
  CHECK(r.gamma < 1.0);
}

TEST_CASE("transform properties") {
  auto d = dist_of({1, 4, 9});
  auto rep = verify_transform_properties(d, 0.5, 1.0);
  for (const auto& c : rep.checks) {
    if (c.id <= 5) CHECK_MESSAGE(c.passed, c.name);
  }
  auto d2 = dist_of({1, 3, 7, 50, 300});
  auto found = gamma_search(d2, 1, 0.5);
  auto rep2 = verify_transform_properties(d2, found.gamma, 0.5);
  CHECK(rep2.all_passed());

  auto tied = dist_of({2, 2, 2});
  auto rep3 = verify_transform_properties(tied, 0.5, 1.0);
  bool any_tie = false;
  for (const auto& c : rep3.checks) any_tie = any_tie || c.tie_degenerate;
  CHECK(any_tie);
}

TEST_CASE("apply_gamma preserves ranking") {
  for (std::size_t t = 0; t < 20; ++t) {
    auto p = testpop::tie_free_population(4, t);
    auto q = apply_gamma(p, 0.37);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i].voter_id == p[i].voter_id);
  }
}
