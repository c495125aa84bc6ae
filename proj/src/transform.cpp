#include "qvkit/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qvkit/error.hpp"
#include "qvkit/metrics.hpp"
#include "qvkit/summation.hpp"

namespace qvkit {

namespace {

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::GammaOutOfRange, "gamma must lie in (0,1]");
  }
}

void require_k(const StakeDistribution& dist, std::size_t k) {
  if (k < 1 || k > dist.size()) {
    throw Error(ErrorCode::KOutOfRange,
                "k must lie in [1, " + std::to_string(dist.size()) + "], got " + std::to_string(k));
  }
}

struct ShareParts {
  double top;     // Σ over the k largest of (s/s_max)^γ
  double bottom;  // Σ over the rest
  double top_log;     // Σ_top (s/s_max)^γ ln s
  double bottom_log;  // Σ_rest (s/s_max)^γ ln s
};

// Weights are scaled by s_max^γ so nothing overflows; the scale cancels in
// every ratio taken from them.
ShareParts share_parts(const StakeDistribution& dist, std::size_t k, double gamma) {
  const auto& e = dist.entries();
  const std::size_t n = e.size();
  const double log_max = std::log(e.back().stake);
  CompensatedSum top, bottom, top_log, bottom_log;
  for (std::size_t i = 0; i < n; ++i) {
    const double log_s = std::log(e[i].stake);
    const double w = std::exp(gamma * (log_s - log_max));
    if (i + k >= n) {
      top.add(w);
      top_log.add(w * log_s);
    } else {
      bottom.add(w);
      bottom_log.add(w * log_s);
    }
  }
  return {top.value(), bottom.value(), top_log.value(), bottom_log.value()};
}

double share_from(const ShareParts& p) { return p.top / (p.top + p.bottom); }

}  // namespace

StakeDistribution apply_gamma(const StakeDistribution& dist, double gamma) {
  require_gamma(gamma);
  std::vector<StakeEntry> out = dist.entries();
  if (gamma != 1.0) {
    for (auto& e : out) e.stake = std::pow(e.stake, gamma);
  }
  return canonicalize(std::move(out));
}

double top_share(const StakeDistribution& dist, std::size_t k, double gamma) {
  require_k(dist, k);
  require_gamma(gamma);
  return share_from(share_parts(dist, k, gamma));
}

double top_share_derivative(const StakeDistribution& dist, std::size_t k, double gamma) {
  require_k(dist, k);
  require_gamma(gamma);
  const ShareParts p = share_parts(dist, k, gamma);
  const double total = p.top + p.bottom;
  const double total_log = p.top_log + p.bottom_log;
  return (p.top_log * total - p.top * total_log) / (total * total);
}

GammaSearchResult gamma_search(const StakeDistribution& dist, std::size_t k, double alpha,
                               const GammaSearchOptions& opts) {
  require_k(dist, k);
  if (!std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
  }
  if (!(opts.tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  }
  if (!(opts.bracket_lo > 0.0 && opts.bracket_lo < opts.bracket_hi && opts.bracket_hi <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "bracket must satisfy 0 < lo < hi <= 1");
  }

  GammaSearchResult result;
  result.target = alpha;

  const double current = top_share(dist, k, 1.0);
  if (alpha >= current) {
    if (opts.strict_input && alpha > current) {
      std::ostringstream os;
      os.precision(12);
      os << "alpha " << alpha << " exceeds the current top-" << k << " share " << current;
      throw Error(ErrorCode::TargetAboveCurrent, os.str());
    }
    result.gamma = 1.0;
    result.achieved_share = current;
    result.converged = true;
    return result;
  }
  const double floor = static_cast<double>(k) / static_cast<double>(dist.size());
  if (alpha <= floor) {
    std::ostringstream os;
    os.precision(12);
    os << "alpha " << alpha << " is not above the reachable floor k/n = " << floor;
    throw Error(ErrorCode::TargetBelowFloor, os.str());
  }

  double lo = opts.bracket_lo;
  double hi = opts.bracket_hi;
  double best_gamma = hi;
  double best_share = top_share(dist, k, hi);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double share = top_share(dist, k, mid);
    result.iterations = it;
    const bool within = std::fabs(share - alpha) <= opts.tol;
    if (within || std::fabs(share - alpha) < std::fabs(best_share - alpha)) {
      best_gamma = mid;
      best_share = share;
    }
    if (share < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (within && (hi - lo <= opts.gamma_tol || share == alpha)) break;
  }
  result.converged = std::fabs(best_share - alpha) <= opts.tol;
  result.gamma = best_gamma;
  result.achieved_share = best_share;
  return result;
}

bool TransformPropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

TransformPropertyReport verify_transform_properties(const StakeDistribution& dist, double gamma,
                                                    double alpha) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::GammaOutOfRange, "gamma must lie in (0,1)");
  }
  const auto& e = dist.entries();
  const std::size_t n = e.size();
  bool has_ties = false;
  for (std::size_t i = 1; i < n; ++i) has_ties = has_ties || e[i].stake == e[i - 1].stake;

  const std::vector<double> base = rvr_split(dist, 1.0);
  const std::vector<double> moved = rvr_split(dist, gamma);

  TransformPropertyReport out{gamma, alpha, {}};
  auto record = [&](int id, std::string name, bool passed, std::string detail) {
    out.checks.push_back({id, std::move(name), passed, !passed && has_ties, std::move(detail)});
  };

  {
    bool ok = true;
    std::size_t bad = 0;
    for (std::size_t i = 1; i < n && ok; ++i) {
      if (e[i - 1].stake < e[i].stake && !(moved[i - 1] < moved[i])) {
        ok = false;
        bad = i;
      }
    }
    record(1, "order preserved", ok, ok ? "" : "ranks " + std::to_string(bad) + "," +
                                                   std::to_string(bad + 1) + " not strictly ordered");
  }
  {
    const bool smallest = moved.front() > base.front();
    const bool largest = moved.back() < base.back();
    const bool ok = n >= 2 && smallest && largest;
    std::string detail;
    if (!smallest) detail += "smallest voter does not gain; ";
    if (!largest) detail += "largest voter does not lose; ";
    record(2, "smallest gains, largest loses", ok, detail);
  }
  {
    bool ok = true;
    bool seen_non_gain = false;
    for (std::size_t i = 0; i < n; ++i) {
      const bool gain = moved[i] > base[i];
      if (gain && seen_non_gain) ok = false;
      seen_non_gain = seen_non_gain || !gain;
    }
    record(3, "gains form a prefix", ok, ok ? "" : "a gaining voter follows a non-gaining one");
  }
  {
    bool ok = true;
    bool seen_loss = false;
    for (std::size_t i = 0; i < n; ++i) {
      const bool loss = moved[i] < base[i];
      if (seen_loss && !loss) ok = false;
      seen_loss = seen_loss || loss;
    }
    record(4, "losses form a suffix", ok, ok ? "" : "a non-losing voter follows a losing one");
  }
  {
    const std::vector<double> lin = gamma_credits(dist, 1.0);
    const std::vector<double> tr = gamma_credits(dist, gamma);
    const double g_lin = gini(lin);
    const double g_tr = gini(tr);
    bool nak_ok = true;
    for (double a : {0.33, 0.51, 0.67, 0.9}) {
      nak_ok = nak_ok && nakamoto(tr, a) >= nakamoto(lin, a);
    }
    const bool gini_ok = g_tr < g_lin;
    std::ostringstream os;
    os.precision(12);
    os << "gini " << g_lin << " -> " << g_tr;
    if (!nak_ok) os << "; nakamoto decreased";
    record(5, "gini and nakamoto improve", gini_ok && nak_ok, os.str());
  }
  {
    const double peak = *std::max_element(moved.begin(), moved.end());
    std::ostringstream os;
    os.precision(12);
    os << "max transformed share " << peak << " vs alpha " << alpha;
    record(6, "max share capped by alpha", peak <= alpha + 1e-9, os.str());
  }
  return out;
}

}  // namespace qvkit
