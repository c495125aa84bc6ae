#include "qvkit/attacks.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "qvkit/error.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Collusion: return "collusion";
    case AttackKind::Sybil: return "sybil";
    case AttackKind::LastVoter: return "last-voter";
  }
  return "unknown";
}

namespace {

void require_plan(std::span<const double> stakes, std::size_t m,
                  const std::vector<BallotProfile>& plan, const SchemeSpec& scheme) {
  if (plan.size() != stakes.size()) {
    throw Error(ErrorCode::LengthMismatch, "plan must hold one ballot per voter");
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (auto v = validate_ballot(scheme, stakes[i], plan[i], m)) {
      throw Error(ErrorCode::InvalidBallot,
                  "ballot of voter '" + plan[i].voter_id + "' rejected: " + v->describe(),
                  plan[i].voter_id);
    }
  }
}

}  // namespace

AttackReport collusion_gain(std::span<const double> stakes, std::size_t m,
                            const std::vector<BallotProfile>& honest_plan,
                            const std::vector<BallotProfile>& colluding_plan) {
  const SchemeSpec scheme = SchemeSpec::qv1();
  require_plan(stakes, m, honest_plan, scheme);
  require_plan(stakes, m, colluding_plan, scheme);

  AttackReport out;
  out.kind = AttackKind::Collusion;
  out.baseline = vscore(scheme, honest_plan, m);
  out.attacked = vscore(scheme, colluding_plan, m);

  double gain = std::numeric_limits<double>::infinity();
  std::vector<double> targeted;
  for (std::size_t l = 0; l < m; ++l) {
    if (out.baseline[l] > 0.0) {
      targeted.push_back(static_cast<double>(l));
      gain = std::min(gain, out.attacked[l] / out.baseline[l]);
    }
  }
  if (targeted.empty()) {
    throw Error(ErrorCode::InvalidArgument, "honest plan supports no proposal");
  }
  out.gain = gain;
  out.narrative.push_back({"honest vscore", out.baseline, "each voter backs own proposals"});
  out.narrative.push_back({"colluding vscore", out.attacked, "voters spread credit across the coalition"});
  out.narrative.push_back({"targeted proposals", targeted, "gain is the minimum ratio over these"});
  return out;
}

double sybil_gain(const SchemeSpec& scheme, double stake, long long k) {
  if (!(stake > 0.0) || !std::isfinite(stake)) {
    throw Error(ErrorCode::NonPositiveStake, "stake must be positive");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "identity count must be at least 1");
  if (k == 1) return 1.0;
  // Linear credit is additive in stake, so splitting leaves the mass unchanged.
  if (scheme.family() == Family::Linear) return 1.0;
  const double kd = static_cast<double>(k);
  const double single = scheme.vote_transform(scheme.credit_transform(stake));
  const double split = kd * scheme.vote_transform(scheme.credit_transform(stake / kd));
  return split / single;
}

AttackReport sybil_report(const SchemeSpec& scheme, double stake, long long k) {
  AttackReport out;
  out.kind = AttackKind::Sybil;
  const double single = scheme.vote_transform(scheme.credit_transform(stake));
  out.gain = sybil_gain(scheme, stake, k);
  out.baseline = {single};
  out.attacked = {single * out.gain};
  out.narrative.push_back({"single identity", {stake, single}, "stake and vote mass on one proposal"});
  out.narrative.push_back({"split identities", {static_cast<double>(k), stake / static_cast<double>(k)},
                           "identity count and stake per identity, all on the same proposal"});
  if (scheme.family() == Family::Qv3 && out.gain > 1.0) {
    out.narrative.push_back({"qv3 note", {out.gain},
                             "unsplit stake does not prevent the gain: k identities cast "
                             "k*sqrt(s/k) = sqrt(k*s) > sqrt(s)"});
  }
  return out;
}

UtilityProblem last_voter_problem(const LastVoterScenario& sc) {
  const std::size_t m = sc.profits.size();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "scenario has no proposals");
  if (!sc.alignment.empty() && sc.alignment.size() != m) {
    throw Error(ErrorCode::LengthMismatch, "alignment must have one fraction per proposal");
  }
  const SchemeSpec scheme =
      sc.scheme == UtilityScheme::Qv1 ? SchemeSpec::qv1() : SchemeSpec::qv2();
  // Validates every prior ballot against its voter's stake.
  tally(scheme, sc.prior_stakes, sc.prior_ballots, m);

  std::vector<CompensatedSum> mass(m);
  for (const auto& ballot : sc.prior_ballots) {
    for (std::size_t r = 0; r < m; ++r) {
      mass[r].add(scheme.vote_transform(std::fabs(ballot.allocations[r])));
    }
  }
  UtilityProblem p;
  p.scheme = sc.scheme;
  p.own_stake = sc.last_voter_stake;
  p.profits = sc.profits;
  p.total_external.resize(m);
  p.aligned_external.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double fraction = sc.alignment.empty() ? 1.0 : sc.alignment[r];
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "alignment fractions must lie in [0,1]",
                  std::to_string(r));
    }
    p.total_external[r] = mass[r].value();
    p.aligned_external[r] = fraction * p.total_external[r];
  }
  validate(p);
  return p;
}

AttackReport last_voter_advantage(const LastVoterScenario& sc) {
  const UtilityProblem p = last_voter_problem(sc);
  const std::size_t m = p.size();

  std::vector<double> naive(m, 1.0);
  double total_profit = 0.0;
  for (double pi : p.profits) total_profit += pi;
  if (total_profit > 0.0) naive = p.profits;
  const double norm = p.scheme == UtilityScheme::Qv1
                          ? std::sqrt(std::inner_product(naive.begin(), naive.end(),
                                                         naive.begin(), 0.0))
                          : std::accumulate(naive.begin(), naive.end(), 0.0);
  for (double& x : naive) x *= std::sqrt(p.own_stake) / norm;

  const double naive_utility = utility(p, naive);
  const AllocationSolution best = maximize(p);

  AttackReport out;
  out.kind = AttackKind::LastVoter;
  out.baseline = {naive_utility};
  out.attacked = {best.utility};
  if (naive_utility > 0.0) {
    out.gain = best.utility / naive_utility;
  } else {
    out.gain = best.utility > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  out.narrative.push_back({"observed prior mass", p.total_external, "b_r seen before voting"});
  out.narrative.push_back({"aligned prior mass", p.aligned_external, "a_r"});
  out.narrative.push_back({"naive allocation", naive, "proportional to profits"});
  out.narrative.push_back({"optimized allocation", best.allocation,
                           best.degenerate ? "flat objective, canonical point"
                                           : "utility maximizer"});
  return out;
}

}  // namespace qvkit
