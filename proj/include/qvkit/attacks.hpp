#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qvkit/schemes.hpp"
#include "qvkit/stake.hpp"
#include "qvkit/utility.hpp"

namespace qvkit {

enum class AttackKind { Collusion, Sybil, LastVoter };
std::string_view to_string(AttackKind kind);

struct NarrativeStep {
  std::string step;
  std::vector<double> values;
  std::string note;
};

struct AttackReport {
  AttackKind kind = AttackKind::Collusion;
  std::vector<double> baseline;  // vscores, or {utility}
  std::vector<double> attacked;
  double gain = 1.0;
  std::vector<NarrativeStep> narrative;
};

// QV-1 collusion: voter i (stake stakes[i]) casts honest_plan[i] or
// colluding_plan[i]. Gain is the smallest colluding/honest vscore ratio over
// proposals the honest plan supports. Throws InvalidBallot, LengthMismatch.
AttackReport collusion_gain(std::span<const double> stakes, std::size_t m,
                            const std::vector<BallotProfile>& honest_plan,
                            const std::vector<BallotProfile>& colluding_plan);

// Vote mass on one proposal from k identities of stake s/k each, relative to
// a single identity holding s. √k for qv1/qv2/qv3, k^(1−γ) for gpv, 1 for linear.
double sybil_gain(const SchemeSpec& scheme, double stake, long long k);

AttackReport sybil_report(const SchemeSpec& scheme, double stake, long long k);

struct LastVoterScenario {
  UtilityScheme scheme = UtilityScheme::Qv2;
  StakeDistribution prior_stakes;
  std::vector<BallotProfile> prior_ballots;
  double last_voter_stake = 1.0;
  std::vector<double> profits;
  // Per-proposal fraction of prior mass counted as aligned with the last
  // voter (a_r = fraction·b_r). Empty means 1 for every proposal.
  std::vector<double> alignment;
};

// The last voter sees prior mass b_r = Σ_j f(|b_r^(j)|) and compares a
// profit-proportional allocation with the utility maximizer.
// gain = optimized utility / naive utility.
AttackReport last_voter_advantage(const LastVoterScenario& scenario);

// The problem the last voter faces, exposed for inspection and tests.
UtilityProblem last_voter_problem(const LastVoterScenario& scenario);

}  // namespace qvkit
