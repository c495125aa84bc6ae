#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qvkit/stake.hpp"

namespace qvkit {

// Stake map s ↦ s^γ, γ in (0,1]. Voter ranking is preserved.
StakeDistribution apply_gamma(const StakeDistribution& dist, double gamma);

// Share of the k largest transformed stakes: Σ_top-k s^γ / Σ s^γ.
// k counts stakeholders from the top, 1 <= k <= n.
double top_share(const StakeDistribution& dist, std::size_t k, double gamma);

// d/dγ of top_share: (N'·D − N·D') / D² with N' = Σ_top s^γ ln s.
double top_share_derivative(const StakeDistribution& dist, std::size_t k, double gamma);

struct GammaSearchOptions {
  double tol = 1e-9;  // on the share value
  // Bisection keeps going until the bracket is this narrow as well, so the
  // returned γ does not depend on where inside the share tolerance the
  // search happened to land first.
  double gamma_tol = 1e-12;
  int max_iter = 200;
  double bracket_lo = 1e-9;
  double bracket_hi = 1.0;
  // Reject targets above the current share instead of returning γ = 1.
  bool strict_input = false;
};

struct GammaSearchResult {
  double gamma = 1.0;
  double achieved_share = 0.0;
  double target = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Bisection for γ with top_share(dist, k, γ) = alpha. top_share rises
// monotonically from k/n (γ → 0⁺) to the linear top-k share (γ = 1).
//   alpha >= linear share  -> γ = 1, converged (TargetAboveCurrent if strict
//                             and alpha is strictly above)
//   alpha <= k/n           -> TargetBelowFloor
// When max_iter runs out the best iterate is returned with converged = false.
GammaSearchResult gamma_search(const StakeDistribution& dist, std::size_t k, double alpha,
                               const GammaSearchOptions& opts = {});

struct PropertyCheck {
  int id;
  std::string name;
  bool passed;
  bool tie_degenerate;  // failed only because stakes are tied
  std::string detail;
};

struct TransformPropertyReport {
  double gamma;
  double alpha;
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
};

// Checks the six properties of the relative transformed impacts
// r_T,i = s_i^γ / Σ s^γ against the untransformed r_i = s_i / Σ s:
//   1 order preserved, 2 smallest gains and largest loses, 3 gains form a
//   prefix, 4 losses form a suffix, 5 Gini decreases and Nakamoto (a = 0.51)
//   does not decrease, 6 every r_T,i <= alpha (+1e-9).
TransformPropertyReport verify_transform_properties(const StakeDistribution& dist, double gamma,
                                                    double alpha);

}  // namespace qvkit
