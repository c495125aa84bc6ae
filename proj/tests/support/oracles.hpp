#pragma once

// Reference computations written independently of the library, used as test
// oracles. Each one takes a different route to the quantity than the code
// under test (pairwise sums instead of rank weights, long double instead of
// compensated double, direct search instead of closed forms).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// Mean absolute difference form: G = Σ_i Σ_j |x_i − x_j| / (2 n Σ x).
inline long double gini_pairwise(const std::vector<double>& x) {
  const std::size_t n = x.size();
  long double total = 0.0L;
  for (double v : x) total += v;
  long double diff = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) diff += std::fabs(static_cast<long double>(x[i]) - x[j]);
  }
  return diff / (2.0L * static_cast<long double>(n) * total);
}

// Smallest k such that the k largest entries reach a·total, found by sorting a
// copy in descending order.
inline std::size_t nakamoto_sorted(std::vector<double> x, double a) {
  std::sort(x.begin(), x.end(), std::greater<>());
  long double total = 0.0L;
  for (double v : x) total += v;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc += x[k];
    if (acc >= a * total) return k + 1;
  }
  return x.size();
}

inline std::vector<long double> shares(const std::vector<double>& x, double gamma) {
  std::vector<long double> out;
  long double total = 0.0L;
  for (double v : x) {
    out.push_back(std::pow(static_cast<long double>(v), static_cast<long double>(gamma)));
    total += out.back();
  }
  for (auto& v : out) v /= total;
  return out;
}

inline std::vector<long double> shares_weighted(const std::vector<double>& x,
                                                const std::vector<long long>& c, double gamma) {
  std::vector<long double> out;
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back(static_cast<long double>(c[i]) *
                  std::pow(static_cast<long double>(x[i]), static_cast<long double>(gamma)));
    total += out.back();
  }
  for (auto& v : out) v /= total;
  return out;
}

// Share held by the k largest of x^γ.
inline long double top_share(std::vector<double> x, std::size_t k, double gamma) {
  std::sort(x.begin(), x.end(), std::greater<>());
  long double top = 0.0L;
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double w = std::pow(static_cast<long double>(x[i]), static_cast<long double>(gamma));
    total += w;
    if (i < k) top += w;
  }
  return top / total;
}

// Utility Σ π (s + a)/(s + b) evaluated in long double.
inline long double utility(const std::vector<double>& pi, const std::vector<double>& a,
                           const std::vector<double>& b, const std::vector<double>& s) {
  long double u = 0.0L;
  for (std::size_t r = 0; r < pi.size(); ++r) {
    u += static_cast<long double>(pi[r]) * (s[r] + static_cast<long double>(a[r])) /
         (s[r] + static_cast<long double>(b[r]));
  }
  return u;
}

// 64-bit FNV-1a, used to pin generator output.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline bool relative_close(long double a, long double b, long double rel) {
  const long double scale = std::max<long double>(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= rel * std::max<long double>(scale, 1e-300L);
}

}  // namespace oracle
