#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qvkit/stake.hpp"

namespace qvkit {

// Relative voting ratio with split stake: s_i^γ / Σ s_j^γ, γ in (0,1].
std::vector<double> rvr_split(const StakeDistribution& dist, double gamma);

// Unsplit stake, voter i backing c_i proposals: c_i s_i^γ / Σ c_j s_j^γ.
std::vector<double> rvr_unsplit(const StakeDistribution& dist, std::span<const long long> counts,
                                double gamma);

// rvr_split(γ) / rvr_split(1). γ = 1 is accepted and yields all ones.
std::vector<double> eta(const StakeDistribution& dist, double gamma);

// Unsplit analogue: rvr_unsplit(γ) / rvr_unsplit(1).
std::vector<double> eta_unsplit(const StakeDistribution& dist, std::span<const long long> counts,
                                double gamma);

// t = Σ s_j / Σ s_j^γ. Voter i gains (η_i > 1) iff s_i^(1-γ) < t; at the
// default γ = 0.5 this reads √s_i < t.
double eta_threshold(const StakeDistribution& dist, double gamma = 0.5);

// Gini coefficient of ascending nonnegative credits,
//   G = (2 Σ i·c_i − (n+1)·C) / (n·C),  i = 1..n, C = Σ c_i.
// Lies in [0, (n−1)/n]. Throws Unsorted, AllZero, InvalidArgument (negative or
// non-finite entry, empty input).
double gini(std::span<const double> credits);

// Independent geometric route: A / (A + B) with the area under the
// piecewise-linear Lorenz polyline through (0,0), (i, S_i) summed as trapezoids.
double gini_from_lorenz(std::span<const double> credits);

struct LorenzPoint {
  std::size_t index;  // 1-based voter rank
  double cumulative_share;
};

std::vector<LorenzPoint> lorenz_points(std::span<const double> credits);

// Minimum k such that the k largest credits reach a·total. a in (0,1).
std::size_t nakamoto(std::span<const double> credits, double a);

// nakamoto / n.
double nakamoto_normalized(std::span<const double> credits, double a);

struct NakamotoEntry {
  double threshold;
  std::size_t classical;
  double normalized;
};

struct DecentralizationReport {
  double gamma = 1.0;
  std::vector<double> rvr;
  std::vector<double> eta;
  double gini = 0.0;
  std::vector<NakamotoEntry> nakamoto;
  std::vector<LorenzPoint> lorenz;
};

// Credits s_i^γ in canonical order.
std::vector<double> gamma_credits(const StakeDistribution& dist, double gamma);

DecentralizationReport report(const StakeDistribution& dist, double gamma,
                              std::span<const double> thresholds);

}  // namespace qvkit
