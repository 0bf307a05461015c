#pragma once

// Brute-force reference computations. None of these call the library's counting,
// covering or wealth routines; they only share the plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "upsi/types.hpp"

namespace oracle {

using upsi::MarketSequence;

/// Every y in [m]^n, 1-based.
inline std::vector<std::vector<int>> all_sequences(int m, std::size_t n) {
  std::vector<std::vector<int>> out{{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& p : out)
      for (int j = 1; j <= m; ++j) {
        auto q = p;
        q.push_back(j);
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

/// Add-one rule as a product of sequential conditionals (k+1)/(t+m), restricted to the
/// positions whose state equals `state` when states are given.
inline double laplace_sequential(const std::vector<int>& y, int m, const std::vector<int>& w = {}) {
  std::map<int, std::vector<int>> counts;
  std::map<int, int> totals;
  double p = 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int s = w.empty() ? 1 : w[i];
    auto& c = counts[s];
    if (c.empty()) c.assign(static_cast<std::size_t>(m), 0);
    p *= (c[static_cast<std::size_t>(y[i] - 1)] + 1.0) / (totals[s] + m);
    ++c[static_cast<std::size_t>(y[i] - 1)];
    ++totals[s];
  }
  return p;
}

/// Labels 1{z >= a} + 1 on the points.
inline std::vector<int> threshold_labels(double a, const std::vector<double>& z) {
  std::vector<int> w;
  for (double v : z) w.push_back(v >= a ? 2 : 1);
  return w;
}

/// All distinct labelings of z by thresholds, found by sweeping a over every sample
/// value, midpoints, and values beyond both ends.
inline std::set<std::vector<int>> threshold_labelings(const std::vector<double>& z) {
  std::vector<double> cand{-1e300, 1e300};
  auto s = z;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    cand.push_back(s[i]);
    cand.push_back(s[i] - 1e-9);
    cand.push_back(s[i] + 1e-9);
    if (i + 1 < s.size()) cand.push_back((s[i] + s[i + 1]) / 2);
  }
  std::set<std::vector<int>> out;
  for (double a : cand) out.insert(threshold_labels(a, z));
  return out;
}

/// Representative threshold realizing the labeling {z >= a} on `prefix`, using the
/// convention "smallest prefix value at or above a"; beyond the maximum, the labeling
/// is all-below and points are above only if they exceed the prefix maximum.
struct Rep {
  double a;
  bool strict;  // state 2 iff z > a (only for the all-below labeling)
  int operator()(double z) const { return (strict ? z > a : z >= a) ? 2 : 1; }
};

inline Rep representative_for(double a, const std::vector<double>& prefix) {
  double best = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : prefix) {
    if (v >= a) best = std::min(best, v);
    mx = std::max(mx, v);
  }
  if (std::isfinite(best)) return {best, false};
  return {mx, true};
}

/// All distinct prefix labelings with their representatives (threshold class).
inline std::vector<Rep> threshold_representatives(const std::vector<double>& prefix) {
  auto s = prefix;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<Rep> reps;
  for (double v : s) reps.push_back({v, false});
  reps.push_back({s.empty() ? 0.0 : s.back(), true});
  if (s.empty()) reps = {{1.0, false}};
  return reps;
}

/// q*(y^n || z^n) for the threshold class straight from the definition: epoch 0 is
/// uniform; epoch j >= 1 covers days 2^{j-1}+1..2^j with an equal-weight mixture over
/// prefix labelings of the state-wise add-one rule on the epoch's days.
inline double qstar_threshold(const std::vector<int>& y, const std::vector<double>& z, int m) {
  const std::size_t n = y.size();
  if (n == 0) return 1.0;
  double p = 1.0 / m;
  for (std::size_t first = 1, len = 1; first < n; first += len, len *= 2) {
    const std::size_t last = std::min(first + len, n);
    const std::vector<double> prefix(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(first));
    const auto reps = threshold_representatives(prefix);
    double mix = 0.0;
    for (const auto& g : reps) {
      std::vector<int> ys(y.begin() + static_cast<std::ptrdiff_t>(first), y.begin() + static_cast<std::ptrdiff_t>(last));
      std::vector<int> ws;
      for (std::size_t i = first; i < last; ++i) ws.push_back(g(z[i]));
      mix += laplace_sequential(ys, m, ws);
    }
    p *= mix / static_cast<double>(reps.size());
  }
  return p;
}

/// sum_y q(y) prod_t x_{t, y_t}.
template <class Q>
double wealth_sum(const MarketSequence& x, Q&& q) {
  double total = 0.0;
  for (const auto& y : all_sequences(x.stocks(), x.days())) {
    double prod = q(y);
    for (std::size_t t = 0; t < y.size(); ++t) prod *= x.at(t, y[t]);
    total += prod;
  }
  return total;
}

/// Points of the m-simplex on a grid of the given step (m = 2 or 3).
inline std::vector<std::vector<double>> simplex_grid(int m, double step) {
  const int k = static_cast<int>(std::lround(1.0 / step));
  std::vector<std::vector<double>> pts;
  if (m == 2) {
    for (int i = 0; i <= k; ++i) pts.push_back({i * step, 1.0 - i * step});
  } else {
    for (int i = 0; i <= k; ++i)
      for (int j = 0; i + j <= k; ++j) pts.push_back({i * step, j * step, std::max(0.0, 1.0 - (i + j) * step)});
  }
  return pts;
}

/// max over the grid of sum_j k_j log theta_j (0 log 0 = 0).
inline double grid_max_loglik(const std::vector<int>& counts, const std::vector<std::vector<double>>& grid) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& th : grid) {
    double v = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) continue;
      v += th[j] > 0 ? counts[j] * std::log(th[j]) : -std::numeric_limits<double>::infinity();
    }
    best = std::max(best, v);
  }
  return best;
}

/// Grid-sup of the state-wise i.i.d. log-likelihood; states are independent, so per-state maxima add.
inline double grid_statewise_loglik(const std::vector<int>& y, const std::vector<int>& w, int m, int s_count,
                                    const std::vector<std::vector<double>>& grid) {
  double total = 0.0;
  for (int s = 1; s <= s_count; ++s) {
    std::vector<int> c(static_cast<std::size_t>(m), 0);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (w[i] == s) ++c[static_cast<std::size_t>(y[i] - 1)];
    total += grid_max_loglik(c, grid);
  }
  return total;
}

/// Best CRP log wealth on the days in `days` (all days when empty) over an m = 2 grid.
inline double grid_best_crp(const MarketSequence& x, const std::vector<std::size_t>& days, double step) {
  double best = -std::numeric_limits<double>::infinity();
  const int k = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= k; ++i) {
    const double th = i * step;
    double v = 0.0;
    for (std::size_t t : days) v += std::log(th * x.at(t, 1) + (1 - th) * x.at(t, 2));
    best = std::max(best, v);
  }
  return best;
}

inline std::vector<double> uniform_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = u(rng);
  return z;
}

inline MarketSequence random_market(std::mt19937_64& rng, std::size_t n, int m, double lo = 0.5, double hi = 1.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(n * static_cast<std::size_t>(m));
  for (auto& v : d) v = u(rng);
  return MarketSequence(static_cast<std::size_t>(m), std::move(d));
}

}  // namespace oracle
