#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qvkit {

enum class UtilityScheme { Qv1, Qv2 };

// One voter's allocation problem. a_r and b_r are in the same vote units as
// the allocation s_r: a_r is external mass voting the same way on proposal r,
// b_r all external mass on r.
struct UtilityProblem {
  std::vector<double> profits;           // π_r >= 0
  std::vector<double> aligned_external;  // a_r, 0 <= a_r <= b_r
  std::vector<double> total_external;    // b_r
  double own_stake = 1.0;                // s > 0
  UtilityScheme scheme = UtilityScheme::Qv2;

  std::size_t size() const noexcept { return profits.size(); }
};

// Throws LengthMismatch, AlignedExceedsTotal or InvalidArgument.
void validate(const UtilityProblem& problem);

// Budget the allocation must meet: Σ s_r² = s (qv1) or Σ s_r = √s (qv2).
double constraint_value(const UtilityProblem& problem, std::span<const double> allocation);
double constraint_target(const UtilityProblem& problem);

enum class SolveMethod { AnalyticLagrange, Oracle };
std::string_view to_string(SolveMethod method);
std::string_view to_string(UtilityScheme scheme);

struct AllocationSolution {
  std::vector<double> allocation;
  double multiplier = 0.0;  // λ in the stationarity form g_r = 2λ s_r (qv1) or g_r = 2λ (qv2)
  double utility = 0.0;
  double kkt_residual = 0.0;
  SolveMethod method = SolveMethod::AnalyticLagrange;
  // No proposal has π_r > 0 and a_r < b_r, so utility does not depend on the
  // allocation; the returned point puts all credit on proposal 0.
  bool degenerate = false;
};

// (s_r + a_r) / (s_r + b_r).
double success_probability(double s_r, double a_r, double b_r);

// Σ π_r (s_r + a_r)/(s_r + b_r). The budget constraint is not checked.
double utility(const UtilityProblem& problem, std::span<const double> allocation);

// ∂U/∂s_r = π_r (b_r − a_r) / (s_r + b_r)².
std::vector<double> utility_gradient(const UtilityProblem& problem,
                                     std::span<const double> allocation);

struct SolverOptions {
  double tol = 1e-10;  // KKT tolerance reported against
  int max_iter = 400;  // per bisection
};

// Sphere constraint Σ s_r² = s. For fixed λ each stationarity equation
// w_r/(s_r + b_r)² = 2λ s_r, w_r = π_r (b_r − a_r), has one nonnegative root;
// Σ s_r(λ)² falls monotonically in λ, so nested bisection pins λ.
AllocationSolution maximize_qv1(const UtilityProblem& problem, const SolverOptions& opts = {});

// Budget Σ s_r = √s. s_r(λ) = max(0, √(w_r / 2λ) − b_r); bisection on λ finds
// the active set, then λ is solved in closed form on that set.
AllocationSolution maximize_qv2(const UtilityProblem& problem, const SolverOptions& opts = {});

// Dispatches on problem.scheme.
AllocationSolution maximize(const UtilityProblem& problem, const SolverOptions& opts = {});

// Exhaustive grid over the feasible set (nonnegative sphere orthant for qv1 in
// angular coordinates, scaled simplex for qv2), then one finer grid around the
// best cell. m <= 4, resolution >= 100.
AllocationSolution brute_force_oracle(const UtilityProblem& problem, int resolution);

struct KktCertificate {
  // Max relative stationarity residual over coordinates (complementary
  // slackness for clamped ones) plus the relative constraint violation.
  double residual = 0.0;
  // Most positive diagonal entry of the Lagrangian Hessian over active
  // coordinates; negative when the second-order structure holds.
  double max_hessian_diagonal = 0.0;
  // Active border entries −2 s_r (qv1) or −2 (qv2) all negative.
  bool border_negative = true;
};

// Throws InfeasibleSolution for negative entries, wrong arity or a constraint
// violated by more than 1e-6 relative.
KktCertificate kkt_residual(const UtilityProblem& problem, const AllocationSolution& solution);

}  // namespace qvkit
