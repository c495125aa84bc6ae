#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvkit/stake.hpp"

namespace qvkit {

// Scheme families and their credit (g) and vote (f) transforms:
//   linear  g(x)=x    f(x)=x    split or unsplit
//   qv1     g(x)=x    f(x)=√x   split
//   qv2     g(x)=√x   f(x)=x    split
//   qv3     g(x)=√x   f(x)=x    unsplit
//   gpv(γ)  g(x)=x^γ  f(x)=x    split, γ in (0,1)
enum class Family { Linear, Qv1, Qv2, Qv3, Gpv };
enum class StakeMode { Split, Unsplit };
enum class Polarity { YesAbstain, YesNoAbstain };

class SchemeSpec {
 public:
  // Throws InvalidSpec on family/mode mismatch, GammaOutOfRange for gpv.
  explicit SchemeSpec(Family family, Polarity polarity = Polarity::YesAbstain,
                      std::optional<StakeMode> mode = std::nullopt,
                      double gamma = 0.5);

  static SchemeSpec linear(StakeMode mode = StakeMode::Split,
                           Polarity polarity = Polarity::YesAbstain) {
    return SchemeSpec(Family::Linear, polarity, mode);
  }
  static SchemeSpec qv1(Polarity p = Polarity::YesAbstain) { return SchemeSpec(Family::Qv1, p); }
  static SchemeSpec qv2(Polarity p = Polarity::YesAbstain) { return SchemeSpec(Family::Qv2, p); }
  static SchemeSpec qv3(Polarity p = Polarity::YesAbstain) { return SchemeSpec(Family::Qv3, p); }
  static SchemeSpec gpv(double gamma, Polarity p = Polarity::YesAbstain) {
    return SchemeSpec(Family::Gpv, p, std::nullopt, gamma);
  }

  Family family() const noexcept { return family_; }
  StakeMode mode() const noexcept { return mode_; }
  Polarity polarity() const noexcept { return polarity_; }
  double gamma() const noexcept { return gamma_; }

  double credit_transform(double stake) const;  // g
  double vote_transform(double amount) const;   // f, on |b|
  bool vote_transform_is_identity() const noexcept { return family_ != Family::Qv1; }

  // "linear", "qv1", ..., "gpv(0.25)"
  std::string name() const;

 private:
  Family family_;
  StakeMode mode_;
  Polarity polarity_;
  double gamma_;
};

// Parses "linear", "qv1", "qv2", "qv3", "gpv:<gamma>".
SchemeSpec parse_scheme(std::string_view text, Polarity polarity = Polarity::YesAbstain,
                        std::optional<StakeMode> mode = std::nullopt);

struct BallotProfile {
  std::string voter_id;
  std::vector<double> allocations;  // voting-credit units, one per proposal
};

struct ValidationOptions {
  double tol = 1e-9;
  bool allow_undervote = false;  // accept Σ|b| <= g(s) in split mode
};

enum class ViolationKind { LengthMismatch, CreditMismatch, IllegalEntry, NegativeUnderYesAbstain };

struct BallotViolation {
  ViolationKind kind;
  std::size_t index = 0;  // proposal index for entry-level violations
  double expected = 0.0;  // credit for CreditMismatch, arity for LengthMismatch
  double actual = 0.0;

  std::string describe() const;
};

std::string_view to_string(ViolationKind kind);

struct TallyResult {
  std::vector<double> score;
  std::vector<double> vscore;
  std::vector<std::pair<std::string, double>> credit_used;  // ballot order
};

double voting_credit(const SchemeSpec& scheme, double stake);

std::optional<BallotViolation> validate_ballot(const SchemeSpec& scheme, double stake,
                                               const BallotProfile& profile, std::size_t m,
                                               const ValidationOptions& opts = {});

// Raw per-proposal sums. Throws LengthMismatch naming the voter.
std::vector<double> score(const std::vector<BallotProfile>& ballots, std::size_t m);

// Σ sign(b)·f(|b|) per proposal. Ballots are assumed already validated.
std::vector<double> vscore(const SchemeSpec& scheme, const std::vector<BallotProfile>& ballots,
                           std::size_t m);

// Validates every ballot against its voter's stake, then tallies.
// Throws UnknownVoter or InvalidBallot (subject = voter id).
TallyResult tally(const SchemeSpec& scheme, const StakeDistribution& dist,
                  const std::vector<BallotProfile>& ballots, std::size_t m,
                  const ValidationOptions& opts = {});

}  // namespace qvkit
