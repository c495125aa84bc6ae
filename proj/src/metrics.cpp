#include "qvkit/metrics.hpp"

#include <cmath>
#include <string>

#include "qvkit/error.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::GammaOutOfRange,
                "gamma must lie in (0,1], got " + std::to_string(gamma));
  }
}

void require_counts(const StakeDistribution& dist, std::span<const long long> counts) {
  if (counts.size() != dist.size()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(dist.size()) +
                                               " vote counts, got " +
                                               std::to_string(counts.size()));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) {
      throw Error(ErrorCode::NonPositiveCount,
                  "vote count of voter '" + dist[i].voter_id + "' must be at least 1",
                  dist[i].voter_id);
    }
  }
}

// Shared preconditions of the credit-vector metrics.
double checked_total(std::span<const double> credits) {
  if (credits.empty()) {
    throw Error(ErrorCode::InvalidArgument, "credit vector is empty");
  }
  for (std::size_t i = 0; i < credits.size(); ++i) {
    if (!std::isfinite(credits[i]) || credits[i] < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "credit at index " + std::to_string(i) + " must be finite and nonnegative",
                  std::to_string(i));
    }
    if (i > 0 && credits[i] < credits[i - 1]) {
      throw Error(ErrorCode::Unsorted,
                  "credits must be sorted ascending (index " + std::to_string(i) + ")",
                  std::to_string(i));
    }
  }
  if (credits.back() <= 0.0) {
    throw Error(ErrorCode::AllZero, "at least one credit must be positive");
  }
  CompensatedSum total;
  for (double c : credits) total.add(c);
  return total.value();
}

std::vector<double> weighted_credits(const StakeDistribution& dist,
                                     std::span<const long long> counts, double gamma) {
  std::vector<double> out = gamma_credits(dist, gamma);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= static_cast<double>(counts[i]);
  return out;
}

std::vector<double> shares(std::vector<double> credits) {
  const double total = compensated_sum(credits);
  for (double& c : credits) c /= total;
  return credits;
}

}  // namespace

std::vector<double> gamma_credits(const StakeDistribution& dist, double gamma) {
  require_gamma(gamma);
  std::vector<double> out = dist.stakes();
  if (gamma != 1.0) {
    for (double& s : out) s = std::pow(s, gamma);
  }
  return out;
}

std::vector<double> rvr_split(const StakeDistribution& dist, double gamma) {
  return shares(gamma_credits(dist, gamma));
}

std::vector<double> rvr_unsplit(const StakeDistribution& dist, std::span<const long long> counts,
                                double gamma) {
  require_counts(dist, counts);
  return shares(weighted_credits(dist, counts, gamma));
}

std::vector<double> eta(const StakeDistribution& dist, double gamma) {
  require_gamma(gamma);
  // (s_i^γ / Σ s^γ) / (s_i / Σ s) rearranged as t · s_i^(γ−1), which keeps η
  // monotone in s_i under rounding.
  const double t = eta_threshold(dist, gamma);
  std::vector<double> out;
  out.reserve(dist.size());
  for (const auto& e : dist.entries()) {
    out.push_back(gamma == 1.0 ? 1.0 : t * std::pow(e.stake, gamma - 1.0));
  }
  return out;
}

std::vector<double> eta_unsplit(const StakeDistribution& dist, std::span<const long long> counts,
                                double gamma) {
  require_counts(dist, counts);
  require_gamma(gamma);
  // c_i cancels: η_i = (Σ c s / Σ c s^γ) · s_i^(γ−1).
  const double num = compensated_sum(weighted_credits(dist, counts, 1.0));
  const double den = compensated_sum(weighted_credits(dist, counts, gamma));
  std::vector<double> out;
  out.reserve(dist.size());
  for (const auto& e : dist.entries()) {
    out.push_back(gamma == 1.0 ? 1.0 : (num / den) * std::pow(e.stake, gamma - 1.0));
  }
  return out;
}

double eta_threshold(const StakeDistribution& dist, double gamma) {
  require_gamma(gamma);
  return dist.total() / compensated_sum(gamma_credits(dist, gamma));
}

double gini(std::span<const double> credits) {
  const double total = checked_total(credits);
  const std::size_t n = credits.size();
  if (credits.front() == credits.back()) return 0.0;
  // Σ (2i − n − 1)·c_i is the numerator of the rank formula with the
  // (n+1)·C term folded in.
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = 2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0;
    acc.add(weight * credits[i]);
  }
  return acc.value() / (static_cast<double>(n) * total);
}

double gini_from_lorenz(std::span<const double> credits) {
  const double total = checked_total(credits);
  const double n = static_cast<double>(credits.size());
  // Equal credits put the Lorenz polyline on the line of equality.
  if (credits.front() == credits.back()) return 0.0;
  CompensatedSum gap;  // area between equality line and Lorenz curve, share units
  CompensatedSum cumulative;
  double prev = 0.0;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    cumulative.add(credits[i] / total);
    const double cur = cumulative.value();
    const double x0 = static_cast<double>(i);
    const double equality = (x0 + (x0 + 1.0)) / (2.0 * n);
    gap.add(equality - 0.5 * (prev + cur));
    prev = cur;
  }
  // A + B is the triangle under the equality line: n · 1 / 2.
  return gap.value() / (0.5 * n);
}

std::vector<LorenzPoint> lorenz_points(std::span<const double> credits) {
  const double total = checked_total(credits);
  std::vector<LorenzPoint> out;
  out.reserve(credits.size());
  CompensatedSum cumulative;
  for (std::size_t i = 0; i < credits.size(); ++i) {
    cumulative.add(credits[i]);
    out.push_back({i + 1, cumulative.value() / total});
  }
  out.back().cumulative_share = 1.0;
  return out;
}

std::size_t nakamoto(std::span<const double> credits, double a) {
  if (!(a > 0.0 && a < 1.0)) {
    throw Error(ErrorCode::ThresholdOutOfRange,
                "nakamoto threshold must lie in (0,1), got " + std::to_string(a));
  }
  checked_total(credits);
  // Accumulate from the top in the same order for the total, so the k = n
  // partial sum equals the total bit for bit.
  CompensatedSum total_acc;
  for (auto it = credits.rbegin(); it != credits.rend(); ++it) total_acc.add(*it);
  const double target = a * total_acc.value();
  CompensatedSum top;
  std::size_t k = 0;
  for (auto it = credits.rbegin(); it != credits.rend(); ++it) {
    top.add(*it);
    ++k;
    if (top.value() >= target) return k;
  }
  return credits.size();
}

double nakamoto_normalized(std::span<const double> credits, double a) {
  return static_cast<double>(nakamoto(credits, a)) / static_cast<double>(credits.size());
}

DecentralizationReport report(const StakeDistribution& dist, double gamma,
                              std::span<const double> thresholds) {
  DecentralizationReport out;
  out.gamma = gamma;
  const std::vector<double> credits = gamma_credits(dist, gamma);
  out.rvr = shares(credits);
  out.eta = eta(dist, gamma);
  out.gini = gini(credits);
  for (double a : thresholds) {
    const std::size_t k = nakamoto(credits, a);
    out.nakamoto.push_back({a, k, static_cast<double>(k) / static_cast<double>(credits.size())});
  }
  out.lorenz = lorenz_points(credits);
  return out;
}

}  // namespace qvkit
