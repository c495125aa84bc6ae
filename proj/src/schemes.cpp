#include "qvkit/schemes.hpp"

#include <cmath>
#include <sstream>

#include "qvkit/error.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

SchemeSpec::SchemeSpec(Family family, Polarity polarity, std::optional<StakeMode> mode,
                       double gamma)
    : family_(family), mode_(StakeMode::Split), polarity_(polarity), gamma_(0.5) {
  const StakeMode natural = family == Family::Qv3 ? StakeMode::Unsplit : StakeMode::Split;
  if (mode && family != Family::Linear && *mode != natural) {
    throw Error(ErrorCode::InvalidSpec,
                "qv1, qv2 and gpv require split stake; qv3 requires unsplit stake");
  }
  mode_ = mode.value_or(natural);
  if (family == Family::Gpv) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
      throw Error(ErrorCode::GammaOutOfRange, "gpv gamma must lie in (0,1)");
    }
    gamma_ = gamma;
  } else if (family == Family::Linear) {
    gamma_ = 1.0;
  }
}

double SchemeSpec::credit_transform(double stake) const {
  switch (family_) {
    case Family::Linear:
    case Family::Qv1:
      return stake;
    case Family::Qv2:
    case Family::Qv3:
      return std::sqrt(stake);
    case Family::Gpv:
      return std::pow(stake, gamma_);
  }
  return stake;
}

double SchemeSpec::vote_transform(double amount) const {
  return family_ == Family::Qv1 ? std::sqrt(amount) : amount;
}

std::string SchemeSpec::name() const {
  switch (family_) {
    case Family::Linear: return "linear";
    case Family::Qv1: return "qv1";
    case Family::Qv2: return "qv2";
    case Family::Qv3: return "qv3";
    case Family::Gpv: {
      std::ostringstream os;
      os.precision(12);
      os << "gpv(" << gamma_ << ")";
      return os.str();
    }
  }
  return "unknown";
}

SchemeSpec parse_scheme(std::string_view text, Polarity polarity,
                        std::optional<StakeMode> mode) {
  if (text == "linear") return SchemeSpec(Family::Linear, polarity, mode);
  if (text == "qv1") return SchemeSpec(Family::Qv1, polarity, mode);
  if (text == "qv2") return SchemeSpec(Family::Qv2, polarity, mode);
  if (text == "qv3") return SchemeSpec(Family::Qv3, polarity, mode);
  if (text.starts_with("gpv:")) {
    const std::string rest(text.substr(4));
    std::size_t used = 0;
    double gamma = 0.0;
    try {
      gamma = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size()) {
      throw Error(ErrorCode::InvalidSpec, "cannot parse gamma in '" + std::string(text) + "'");
    }
    return SchemeSpec(Family::Gpv, polarity, mode, gamma);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scheme '" + std::string(text) + "'",
              std::string(text));
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::LengthMismatch: return "LengthMismatch";
    case ViolationKind::CreditMismatch: return "CreditMismatch";
    case ViolationKind::IllegalEntry: return "IllegalEntry";
    case ViolationKind::NegativeUnderYesAbstain: return "NegativeUnderYesAbstain";
  }
  return "Unknown";
}

std::string BallotViolation::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << to_string(kind);
  switch (kind) {
    case ViolationKind::LengthMismatch:
      os << "(expected " << expected << " allocations, got " << actual << ")";
      break;
    case ViolationKind::CreditMismatch:
      os << "(expected " << expected << ", actual " << actual << ")";
      break;
    case ViolationKind::IllegalEntry:
      os << "(index " << index << ", value " << actual << ")";
      break;
    case ViolationKind::NegativeUnderYesAbstain:
      os << "(index " << index << ")";
      break;
  }
  return os.str();
}

double voting_credit(const SchemeSpec& scheme, double stake) {
  if (!(stake > 0.0)) {
    throw Error(ErrorCode::NonPositiveStake, "stake must be positive");
  }
  return scheme.credit_transform(stake);
}

std::optional<BallotViolation> validate_ballot(const SchemeSpec& scheme, double stake,
                                               const BallotProfile& profile, std::size_t m,
                                               const ValidationOptions& opts) {
  const auto& b = profile.allocations;
  if (b.size() != m) {
    return BallotViolation{ViolationKind::LengthMismatch, 0, static_cast<double>(m),
                           static_cast<double>(b.size())};
  }
  for (std::size_t l = 0; l < m; ++l) {
    if (!std::isfinite(b[l])) {
      return BallotViolation{ViolationKind::IllegalEntry, l, 0.0, b[l]};
    }
    if (b[l] < 0.0 && scheme.polarity() == Polarity::YesAbstain) {
      return BallotViolation{ViolationKind::NegativeUnderYesAbstain, l, 0.0, b[l]};
    }
  }

  const double credit = voting_credit(scheme, stake);
  if (scheme.mode() == StakeMode::Unsplit) {
    for (std::size_t l = 0; l < m; ++l) {
      const double mag = std::fabs(b[l]);
      if (mag > opts.tol && std::fabs(mag - credit) > opts.tol) {
        return BallotViolation{ViolationKind::IllegalEntry, l, credit, b[l]};
      }
    }
    return std::nullopt;
  }

  CompensatedSum used;
  for (double x : b) used.add(std::fabs(x));
  const double actual = used.value();
  const bool ok = opts.allow_undervote ? actual <= credit + opts.tol
                                       : std::fabs(actual - credit) <= opts.tol;
  if (!ok) return BallotViolation{ViolationKind::CreditMismatch, 0, credit, actual};
  return std::nullopt;
}

namespace {

void require_arity(const BallotProfile& ballot, std::size_t m) {
  if (ballot.allocations.size() != m) {
    throw Error(ErrorCode::LengthMismatch,
                "ballot of voter '" + ballot.voter_id + "' has " +
                    std::to_string(ballot.allocations.size()) + " allocations, expected " +
                    std::to_string(m),
                ballot.voter_id);
  }
}

double signed_vote(const SchemeSpec& scheme, double b) {
  if (b == 0.0) return 0.0;
  const double v = scheme.vote_transform(std::fabs(b));
  return b < 0.0 ? -v : v;
}

}  // namespace

std::vector<double> score(const std::vector<BallotProfile>& ballots, std::size_t m) {
  std::vector<CompensatedSum> acc(m);
  for (const auto& ballot : ballots) {
    require_arity(ballot, m);
    for (std::size_t l = 0; l < m; ++l) acc[l].add(ballot.allocations[l]);
  }
  std::vector<double> out(m);
  for (std::size_t l = 0; l < m; ++l) out[l] = acc[l].value();
  return out;
}

std::vector<double> vscore(const SchemeSpec& scheme, const std::vector<BallotProfile>& ballots,
                           std::size_t m) {
  std::vector<CompensatedSum> acc(m);
  for (const auto& ballot : ballots) {
    require_arity(ballot, m);
    for (std::size_t l = 0; l < m; ++l) acc[l].add(signed_vote(scheme, ballot.allocations[l]));
  }
  std::vector<double> out(m);
  for (std::size_t l = 0; l < m; ++l) out[l] = acc[l].value();
  return out;
}

TallyResult tally(const SchemeSpec& scheme, const StakeDistribution& dist,
                  const std::vector<BallotProfile>& ballots, std::size_t m,
                  const ValidationOptions& opts) {
  TallyResult result;
  result.credit_used.reserve(ballots.size());
  std::vector<bool> voted(dist.size(), false);
  for (const auto& ballot : ballots) {
    require_arity(ballot, m);
    const std::size_t idx = dist.find(ballot.voter_id);
    if (idx == dist.size()) {
      throw Error(ErrorCode::UnknownVoter,
                  "ballot from voter '" + ballot.voter_id + "' who holds no stake",
                  ballot.voter_id);
    }
    if (voted[idx]) {
      throw Error(ErrorCode::DuplicateVoter,
                  "voter '" + ballot.voter_id + "' cast more than one ballot", ballot.voter_id);
    }
    voted[idx] = true;
    const double stake = dist[idx].stake;
    if (auto violation = validate_ballot(scheme, stake, ballot, m, opts)) {
      throw Error(ErrorCode::InvalidBallot,
                  "ballot of voter '" + ballot.voter_id + "' rejected: " + violation->describe(),
                  ballot.voter_id);
    }
    double used = 0.0;
    if (scheme.mode() == StakeMode::Unsplit) {
      used = voting_credit(scheme, stake);
    } else {
      CompensatedSum acc;
      for (double x : ballot.allocations) acc.add(std::fabs(x));
      used = acc.value();
    }
    result.credit_used.emplace_back(ballot.voter_id, used);
  }
  result.score = score(ballots, m);
  result.vscore = vscore(scheme, ballots, m);
  return result;
}

}  // namespace qvkit
