#include "qvkit/stake.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "qvkit/error.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

StakeDistribution::StakeDistribution(std::vector<StakeEntry> entries)
    : entries_(std::move(entries)) {
  CompensatedSum acc;
  for (const auto& e : entries_) acc.add(e.stake);
  total_ = acc.value();
}

std::vector<double> StakeDistribution::stakes() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.stake);
  return out;
}

std::size_t StakeDistribution::find(const std::string& voter_id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].voter_id == voter_id) return i;
  }
  return entries_.size();
}

StakeDistribution canonicalize(std::vector<StakeEntry> raw) {
  std::unordered_set<std::string> seen;
  seen.reserve(raw.size());
  for (const auto& e : raw) {
    if (!std::isfinite(e.stake) || e.stake <= 0.0) {
      throw Error(ErrorCode::NonPositiveStake,
                  "stake of voter '" + e.voter_id + "' must be positive",
                  e.voter_id);
    }
    if (!seen.insert(e.voter_id).second) {
      throw Error(ErrorCode::DuplicateVoter,
                  "voter '" + e.voter_id + "' appears more than once",
                  e.voter_id);
    }
  }
  std::sort(raw.begin(), raw.end(), [](const StakeEntry& a, const StakeEntry& b) {
    if (a.stake != b.stake) return a.stake < b.stake;
    return a.voter_id < b.voter_id;
  });
  return StakeDistribution(std::move(raw));
}

std::vector<double> normalize(const StakeDistribution& dist) {
  std::vector<double> out;
  out.reserve(dist.size());
  const double total = dist.total();
  for (const auto& e : dist.entries()) out.push_back(e.stake / total);
  return out;
}

namespace {

// u in (0, 1] with 53 bits of resolution.
double unit_open_closed(std::mt19937_64& rng) {
  const std::uint64_t bits = rng() >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

}  // namespace

StakeDistribution generate(const DistributionSpec& spec) {
  check(spec.n >= 1, "n must be at least 1");
  switch (spec.kind) {
    case DistributionKind::Constant:
      check(std::isfinite(spec.value) && spec.value > 0.0,
            "constant value must be positive");
      break;
    case DistributionKind::UniformRange:
      check(std::isfinite(spec.lo) && std::isfinite(spec.hi) && spec.lo >= 0.0 &&
                spec.lo < spec.hi,
            "uniform range requires 0 <= lo < hi");
      break;
    case DistributionKind::Pareto:
      check(std::isfinite(spec.shape) && spec.shape > 0.0,
            "pareto shape must be positive");
      check(std::isfinite(spec.scale) && spec.scale > 0.0,
            "pareto scale must be positive");
      break;
  }

  const std::size_t width = std::to_string(spec.n - 1).size();
  std::mt19937_64 rng(spec.seed);
  std::vector<StakeEntry> raw;
  raw.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    double stake = spec.value;
    switch (spec.kind) {
      case DistributionKind::Constant:
        break;
      case DistributionKind::UniformRange:
        stake = spec.lo + (spec.hi - spec.lo) * unit_open_closed(rng);
        break;
      case DistributionKind::Pareto:
        stake = spec.scale * std::pow(unit_open_closed(rng), -1.0 / spec.shape);
        break;
    }
    std::string id = std::to_string(i);
    id.insert(0, width - id.size(), '0');
    raw.push_back({"v" + id, stake});
  }
  return canonicalize(std::move(raw));
}

}  // namespace qvkit
