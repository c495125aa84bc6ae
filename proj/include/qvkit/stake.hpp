#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qvkit {

struct StakeEntry {
  std::string voter_id;
  double stake = 0.0;  // coins, strictly positive

  friend bool operator==(const StakeEntry&, const StakeEntry&) = default;
};

// Voter stakes sorted ascending by stake, ties broken by voter id. Only
// constructible through canonicalize(), so every instance is valid.
class StakeDistribution {
 public:
  StakeDistribution() = default;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<StakeEntry>& entries() const noexcept { return entries_; }
  const StakeEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::vector<double> stakes() const;
  double total() const noexcept { return total_; }

  // Index of `voter_id` in canonical order, or size() if absent.
  std::size_t find(const std::string& voter_id) const;

  friend bool operator==(const StakeDistribution& a, const StakeDistribution& b) {
    return a.entries_ == b.entries_;
  }

 private:
  friend StakeDistribution canonicalize(std::vector<StakeEntry> raw);
  explicit StakeDistribution(std::vector<StakeEntry> entries);

  std::vector<StakeEntry> entries_;
  double total_ = 0.0;
};

// Sorts and validates. Throws NonPositiveStake (non-finite or <= 0) or
// DuplicateVoter; the offending voter id is the error subject.
StakeDistribution canonicalize(std::vector<StakeEntry> raw);

// Relative stakes s_i / s in canonical order.
std::vector<double> normalize(const StakeDistribution& dist);

enum class DistributionKind { Constant, UniformRange, Pareto };

struct DistributionSpec {
  DistributionKind kind = DistributionKind::Constant;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double value = 1.0;  // constant
  double lo = 0.0;     // uniform-range, lo >= 0
  double hi = 1.0;
  double shape = 1.16;  // pareto
  double scale = 1.0;
};

// Deterministic synthetic population. Randomness comes from std::mt19937_64,
// whose output sequence is fixed by the standard; variates are derived from
// the raw 64-bit words by hand (u in (0,1] from the top 53 bits) instead of
// std::*_distribution, whose algorithms are implementation-defined.
//   uniform-range: lo + (hi - lo) * u
//   pareto:        scale * u^(-1/shape)
// Voter ids are "v" followed by the zero-padded draw index.
StakeDistribution generate(const DistributionSpec& spec);

}  // namespace qvkit
