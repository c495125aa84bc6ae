#include "qvkit/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qvkit/error.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Weight of proposal r in the stationarity equations; zero when the
// proposal's outcome cannot be moved (π_r = 0 or a_r = b_r).
std::vector<double> marginal_weights(const UtilityProblem& p) {
  std::vector<double> w(p.size());
  for (std::size_t r = 0; r < p.size(); ++r) {
    w[r] = p.profits[r] * (p.total_external[r] - p.aligned_external[r]);
  }
  return w;
}

double utility_or_nan(const UtilityProblem& p, std::span<const double> x) {
  CompensatedSum acc;
  for (std::size_t r = 0; r < p.size(); ++r) {
    const double den = x[r] + p.total_external[r];
    if (den <= 0.0) return kNaN;
    acc.add(p.profits[r] * (x[r] + p.aligned_external[r]) / den);
  }
  return acc.value();
}

AllocationSolution degenerate_point(const UtilityProblem& p) {
  AllocationSolution sol;
  sol.allocation.assign(p.size(), 0.0);
  sol.allocation[0] = std::sqrt(p.own_stake);
  sol.multiplier = 0.0;
  sol.utility = utility(p, sol.allocation);
  sol.degenerate = true;
  sol.kkt_residual = kkt_residual(p, sol).residual;
  return sol;
}

// Least-squares λ for the stationarity form over coordinates with s_r > 0.
double fitted_multiplier(const UtilityProblem& p, std::span<const double> x) {
  const std::vector<double> g = utility_gradient(p, x);
  CompensatedSum num, den;
  for (std::size_t r = 0; r < p.size(); ++r) {
    if (x[r] <= 0.0) continue;
    if (p.scheme == UtilityScheme::Qv1) {
      num.add(g[r] * x[r]);
      den.add(2.0 * x[r] * x[r]);
    } else {
      num.add(g[r]);
      den.add(2.0);
    }
  }
  return den.value() > 0.0 ? num.value() / den.value() : 0.0;
}

void finish(const UtilityProblem& p, AllocationSolution& sol) {
  sol.utility = utility(p, sol.allocation);
  sol.kkt_residual = kkt_residual(p, sol).residual;
}

// Bisection on a monotone predicate over doubles until the bracket stops
// shrinking. `below(x)` is true on [lo, x*) and false on (x*, hi].
template <class Below>
double bisect(double lo, double hi, int max_iter, Below below) {
  for (int i = 0; i < max_iter; ++i) {
    // Geometric midpoint while the bracket spans orders of magnitude.
    const double mid = (lo > 0.0 && hi > 4.0 * lo) ? std::sqrt(lo) * std::sqrt(hi)
                                                   : lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (below(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

// Root of w/(s+b)² = 2λs on [0, w/(2λb²)].
double qv1_coordinate(double w, double b, double lambda, int max_iter) {
  if (w <= 0.0) return 0.0;
  const double hi = w / (2.0 * lambda * b * b);
  return bisect(0.0, hi, max_iter, [&](double s) {
    return w / ((s + b) * (s + b)) > 2.0 * lambda * s;
  });
}

double qv2_coordinate(double w, double b, double lambda) {
  if (w <= 0.0) return 0.0;
  return std::max(0.0, std::sqrt(w / (2.0 * lambda)) - b);
}

template <class Mass>
std::pair<double, double> bracket_multiplier(double target, Mass mass) {
  double lo = 1.0;
  double hi = 1.0;
  int guard = 0;
  while (mass(hi) > target && guard++ < 2100) hi *= 2.0;
  guard = 0;
  while (mass(lo) < target && guard++ < 2100) lo *= 0.5;
  if (!(mass(hi) <= target && mass(lo) >= target)) {
    throw Error(ErrorCode::NoConvergence, "could not bracket the Lagrange multiplier");
  }
  return {lo, hi};
}

}  // namespace

std::string_view to_string(SolveMethod method) {
  return method == SolveMethod::Oracle ? "oracle" : "analytic-lagrange";
}

std::string_view to_string(UtilityScheme scheme) {
  return scheme == UtilityScheme::Qv1 ? "qv1" : "qv2";
}

void validate(const UtilityProblem& p) {
  const std::size_t m = p.profits.size();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "problem has no proposals");
  if (p.aligned_external.size() != m || p.total_external.size() != m) {
    throw Error(ErrorCode::LengthMismatch, "profits, aligned and total must have equal length");
  }
  if (!std::isfinite(p.own_stake) || p.own_stake <= 0.0) {
    throw Error(ErrorCode::NonPositiveStake, "own stake must be positive");
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::string idx = std::to_string(r);
    if (!std::isfinite(p.profits[r]) || p.profits[r] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "profit " + idx + " must be finite and >= 0", idx);
    }
    if (!std::isfinite(p.aligned_external[r]) || !std::isfinite(p.total_external[r]) ||
        p.aligned_external[r] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "external mass " + idx + " must be finite and >= 0",
                  idx);
    }
    if (p.aligned_external[r] > p.total_external[r]) {
      throw Error(ErrorCode::AlignedExceedsTotal,
                  "aligned mass exceeds total mass on proposal " + idx, idx);
    }
  }
}

double constraint_target(const UtilityProblem& p) {
  return p.scheme == UtilityScheme::Qv1 ? p.own_stake : std::sqrt(p.own_stake);
}

double constraint_value(const UtilityProblem& p, std::span<const double> x) {
  CompensatedSum acc;
  for (double v : x) acc.add(p.scheme == UtilityScheme::Qv1 ? v * v : v);
  return acc.value();
}

double success_probability(double s_r, double a_r, double b_r) {
  if (!(s_r >= 0.0) || !(a_r >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "allocation and aligned mass must be nonnegative");
  }
  if (a_r > b_r) {
    throw Error(ErrorCode::AlignedExceedsTotal, "aligned mass exceeds total mass");
  }
  if (s_r + b_r <= 0.0) {
    throw Error(ErrorCode::DegenerateDenominator,
                "success probability undefined with no votes on the proposal");
  }
  return (s_r + a_r) / (s_r + b_r);
}

double utility(const UtilityProblem& p, std::span<const double> x) {
  if (x.size() != p.size()) {
    throw Error(ErrorCode::LengthMismatch, "allocation length differs from proposal count");
  }
  CompensatedSum acc;
  for (std::size_t r = 0; r < p.size(); ++r) {
    acc.add(p.profits[r] *
            success_probability(x[r], p.aligned_external[r], p.total_external[r]));
  }
  return acc.value();
}

std::vector<double> utility_gradient(const UtilityProblem& p, std::span<const double> x) {
  if (x.size() != p.size()) {
    throw Error(ErrorCode::LengthMismatch, "allocation length differs from proposal count");
  }
  std::vector<double> g(p.size());
  for (std::size_t r = 0; r < p.size(); ++r) {
    const double den = x[r] + p.total_external[r];
    const double w = p.profits[r] * (p.total_external[r] - p.aligned_external[r]);
    g[r] = w == 0.0 ? 0.0 : w / (den * den);
  }
  return g;
}

AllocationSolution maximize_qv1(const UtilityProblem& p, const SolverOptions& opts) {
  validate(p);
  if (p.scheme != UtilityScheme::Qv1) {
    throw Error(ErrorCode::InvalidArgument, "maximize_qv1 requires a qv1 problem");
  }
  const std::vector<double> w = marginal_weights(p);
  if (std::none_of(w.begin(), w.end(), [](double v) { return v > 0.0; })) {
    return degenerate_point(p);
  }

  const double target = p.own_stake;
  AllocationSolution sol;
  sol.allocation.assign(p.size(), 0.0);
  const auto& b = p.total_external;
  if (std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }) == 1) {
    // A single movable proposal takes the whole budget.
    const auto r = static_cast<std::size_t>(
        std::find_if(w.begin(), w.end(), [](double v) { return v > 0.0; }) - w.begin());
    sol.allocation[r] = std::sqrt(target);
  } else {
    auto mass = [&](double lambda) {
      CompensatedSum acc;
      for (std::size_t r = 0; r < p.size(); ++r) {
        const double s = qv1_coordinate(w[r], b[r], lambda, opts.max_iter);
        acc.add(s * s);
      }
      return acc.value();
    };
    const auto [lo, hi] = bracket_multiplier(target, mass);
    const double lambda =
        bisect(lo, hi, opts.max_iter, [&](double l) { return mass(l) > target; });
    for (std::size_t r = 0; r < p.size(); ++r) {
      sol.allocation[r] = qv1_coordinate(w[r], b[r], lambda, opts.max_iter);
    }
    const double scale = std::sqrt(target / constraint_value(p, sol.allocation));
    for (double& s : sol.allocation) s *= scale;
  }
  sol.multiplier = fitted_multiplier(p, sol.allocation);
  finish(p, sol);
  return sol;
}

AllocationSolution maximize_qv2(const UtilityProblem& p, const SolverOptions& opts) {
  validate(p);
  if (p.scheme != UtilityScheme::Qv2) {
    throw Error(ErrorCode::InvalidArgument, "maximize_qv2 requires a qv2 problem");
  }
  const std::vector<double> w = marginal_weights(p);
  if (std::none_of(w.begin(), w.end(), [](double v) { return v > 0.0; })) {
    return degenerate_point(p);
  }

  const double budget = std::sqrt(p.own_stake);
  const auto& b = p.total_external;
  auto mass = [&](double lambda) {
    CompensatedSum acc;
    for (std::size_t r = 0; r < p.size(); ++r) acc.add(qv2_coordinate(w[r], b[r], lambda));
    return acc.value();
  };
  const auto [lo, hi] = bracket_multiplier(budget, mass);
  double lambda = bisect(lo, hi, opts.max_iter, [&](double l) { return mass(l) > budget; });

  // On the active set Σ (√(w_r/2λ) − b_r) = budget solves exactly for λ.
  CompensatedSum root_w, b_sum;
  for (std::size_t r = 0; r < p.size(); ++r) {
    if (qv2_coordinate(w[r], b[r], lambda) > 0.0) {
      root_w.add(std::sqrt(w[r]));
      b_sum.add(b[r]);
    }
  }
  if (root_w.value() > 0.0) {
    const double inv = root_w.value() / (budget + b_sum.value());
    const double polished = 0.5 * inv * inv;
    if (std::fabs(mass(polished) - budget) <= std::fabs(mass(lambda) - budget)) {
      lambda = polished;
    }
  }

  AllocationSolution sol;
  sol.allocation.resize(p.size());
  for (std::size_t r = 0; r < p.size(); ++r) sol.allocation[r] = qv2_coordinate(w[r], b[r], lambda);
  // Absorb the last rounding residue into the largest coordinate.
  const double residue = budget - constraint_value(p, sol.allocation);
  auto largest = std::max_element(sol.allocation.begin(), sol.allocation.end());
  *largest = std::max(0.0, *largest + residue);
  sol.multiplier = lambda;
  finish(p, sol);
  return sol;
}

AllocationSolution maximize(const UtilityProblem& p, const SolverOptions& opts) {
  return p.scheme == UtilityScheme::Qv1 ? maximize_qv1(p, opts) : maximize_qv2(p, opts);
}

namespace {

struct GridBest {
  std::vector<double> point;
  std::vector<double> coords;  // grid coordinates of the best point
  double value = -std::numeric_limits<double>::infinity();
};

// Cartesian point on the nonnegative orthant of the sphere of radius ρ from
// m−1 hyperspherical angles.
void sphere_point(std::span<const double> angles, double radius, std::vector<double>& out) {
  const std::size_t m = angles.size() + 1;
  double carry = radius;
  for (std::size_t r = 0; r + 1 < m; ++r) {
    out[r] = carry * std::cos(angles[r]);
    carry *= std::sin(angles[r]);
  }
  out[m - 1] = carry;
  for (double& v : out) v = std::max(0.0, v);
}

// Visits every point of a (dims)-dimensional grid with `steps` intervals per
// axis over [lo_d, hi_d].
template <class Visit>
void for_each_grid_point(std::span<const double> lo, std::span<const double> hi, int steps,
                         Visit visit) {
  const std::size_t dims = lo.size();
  std::vector<int> idx(dims, 0);
  std::vector<double> coords(dims);
  while (true) {
    for (std::size_t d = 0; d < dims; ++d) {
      coords[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx[d]) / steps;
    }
    visit(coords);
    std::size_t d = 0;
    while (d < dims && ++idx[d] > steps) idx[d++] = 0;
    if (d == dims) break;
  }
}

GridBest search_grid(const UtilityProblem& p, std::span<const double> lo,
                     std::span<const double> hi, int steps) {
  const std::size_t m = p.size();
  const bool sphere = p.scheme == UtilityScheme::Qv1;
  // Sphere radius and simplex budget are both √s.
  const double budget = std::sqrt(p.own_stake);
  GridBest best;
  std::vector<double> x(m);
  for_each_grid_point(lo, hi, steps, [&](std::span<const double> c) {
    if (sphere) {
      sphere_point(c, budget, x);
    } else {
      double used = 0.0;
      for (std::size_t d = 0; d + 1 < m; ++d) {
        x[d] = c[d];
        used += c[d];
      }
      if (used > budget * (1.0 + 1e-15)) return;
      x[m - 1] = std::max(0.0, budget - used);
    }
    const double u = utility_or_nan(p, x);
    if (u > best.value) {
      best.value = u;
      best.point = x;
      best.coords.assign(c.begin(), c.end());
    }
  });
  return best;
}

}  // namespace

AllocationSolution brute_force_oracle(const UtilityProblem& p, int resolution) {
  validate(p);
  const std::size_t m = p.size();
  if (m > 4) {
    throw Error(ErrorCode::DimensionTooLarge, "oracle supports at most 4 proposals");
  }
  if (resolution < 100) {
    throw Error(ErrorCode::InvalidArgument, "oracle resolution must be at least 100");
  }
  AllocationSolution sol;
  sol.method = SolveMethod::Oracle;
  if (m == 1) {
    sol.allocation = {std::sqrt(p.own_stake)};
  } else {
    const std::size_t dims = m - 1;
    const double extent =
        p.scheme == UtilityScheme::Qv1 ? std::numbers::pi / 2.0 : std::sqrt(p.own_stake);
    std::vector<double> lo(dims, 0.0), hi(dims, extent);
    GridBest coarse = search_grid(p, lo, hi, resolution);
    if (coarse.point.empty()) {
      throw Error(ErrorCode::DegenerateDenominator, "utility undefined on the whole grid");
    }
    const double cell = extent / resolution;
    for (std::size_t d = 0; d < dims; ++d) {
      lo[d] = std::max(0.0, coarse.coords[d] - cell);
      hi[d] = std::min(extent, coarse.coords[d] + cell);
    }
    GridBest fine = search_grid(p, lo, hi, resolution);
    sol.allocation = fine.value >= coarse.value ? fine.point : coarse.point;
  }
  sol.multiplier = fitted_multiplier(p, sol.allocation);
  sol.utility = utility(p, sol.allocation);
  sol.kkt_residual = kkt_residual(p, sol).residual;
  return sol;
}

KktCertificate kkt_residual(const UtilityProblem& p, const AllocationSolution& sol) {
  const auto& x = sol.allocation;
  if (x.size() != p.size()) {
    throw Error(ErrorCode::InfeasibleSolution, "allocation length differs from proposal count");
  }
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (!(x[r] >= 0.0) || !std::isfinite(x[r])) {
      throw Error(ErrorCode::InfeasibleSolution,
                  "allocation entry " + std::to_string(r) + " is negative or not finite",
                  std::to_string(r));
    }
  }
  const double target = constraint_target(p);
  const double violation = std::fabs(constraint_value(p, x) - target) / std::max(1.0, target);
  if (violation > 1e-6) {
    throw Error(ErrorCode::InfeasibleSolution, "allocation violates the credit constraint");
  }

  KktCertificate cert;
  cert.max_hessian_diagonal = -std::numeric_limits<double>::infinity();
  const std::vector<double> g = utility_gradient(p, x);
  const double lambda = sol.multiplier;
  const bool qv1 = p.scheme == UtilityScheme::Qv1;
  double scale = 1.0;
  for (double v : g) scale = std::max(scale, std::fabs(v));

  double worst = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double pull = qv1 ? 2.0 * lambda * x[r] : 2.0 * lambda;
    if (x[r] > 0.0) {
      worst = std::max(worst, std::fabs(g[r] - pull));
      const double den = x[r] + p.total_external[r];
      const double w = p.profits[r] * (p.total_external[r] - p.aligned_external[r]);
      const double curvature = -2.0 * w / (den * den * den);
      const double diag = qv1 ? curvature - 2.0 * lambda : curvature;
      cert.max_hessian_diagonal = std::max(cert.max_hessian_diagonal, diag);
      const double border = qv1 ? -2.0 * x[r] : -2.0;
      cert.border_negative = cert.border_negative && border < 0.0;
    } else {
      // Clamped coordinate: the gain from moving off zero may not exceed the price.
      worst = std::max(worst, std::max(0.0, g[r] - pull));
    }
  }
  cert.residual = worst / scale + violation;
  return cert;
}

}  // namespace qvkit
