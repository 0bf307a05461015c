#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/empirical.hpp"
#include "upsi/portfolio.hpp"
#include "upsi/prob.hpp"
#include "upsi/qstar.hpp"

namespace upsi {

/// y_i = argmin_y q*(y | y^{i-1}; z^i), lowest symbol on ties. Pushes q* toward its worst case.
inline std::vector<Symbol> greedy_adversarial_sequence(const SideInfoSample& z, const FunctionClass& cls, int m) {
  QStarPredictor pred(cls, m);
  std::vector<Symbol> y;
  y.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto p = pred.predict(z.point(i));
    const auto it = std::min_element(p.begin(), p.end());
    const Symbol s = static_cast<Symbol>(it - p.begin()) + 1;
    pred.observe(s);
    y.push_back(s);
  }
  return y;
}

struct ClassFit {
  double log_likelihood = kNegInf;
  std::size_t representative = 0;
};

/// sup over g in G and state-wise i.i.d. models of log p(y^n || g(z^n)), attained on the covering.
inline ClassFit class_max_log_likelihood(std::span<const Symbol> y, const EmpiricalCovering& cover, int m) {
  ClassFit best;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const double v = max_log_likelihood(statewise_counts(y, cover.label_matrix().row(k), m, cover.num_states()));
    if (v > best.log_likelihood) best = {v, k};
  }
  return best;
}

/// Realized right-hand side of the pathwise bound for a fixed g:
/// S (d + m) log2(n)^2 + 2.5 S m sum_j j d_H(g, g~_j on epoch j+1), where g~_j is the
/// representative of the epoch covering that agrees with g on the epoch prefix.
inline double pathwise_bound(const StateFunction& g, const SideInfoSample& z, const FunctionClass& cls, int m,
                             const std::vector<EpochSegment>& plan) {
  const double n = static_cast<double>(z.size());
  const double s = cls.num_states();
  const double lg = n > 1 ? std::log2(n) : 0.0;
  double hamming = 0.0;
  for (const auto& seg : plan) {
    if (seg.epoch < 2) continue;  // weight j = epoch - 1 vanishes for the first two epochs
    const auto k = seg.covering->match(g);
    if (!k) throw StateError("representative does not cover g on the epoch prefix");
    const auto d = epoch_hamming_count(g, seg.covering->representative(*k), z, seg.first, seg.last);
    hamming += static_cast<double>(seg.epoch - 1) * static_cast<double>(d);
  }
  return s * (cls.natarajan_dim() + m) * lg * lg + 2.5 * s * m * hamming;
}

inline double pathwise_bound(const StateFunction& g, const SideInfoSample& z, const FunctionClass& cls, int m) {
  return pathwise_bound(g, z, cls, m, plan_epochs(z, cls));
}

/// One realized instance of the regret sweep (all regrets in nats).
struct RegretInstance {
  double regret_prob = 0.0;  ///< max over candidate y^n of sup_g max-likelihood minus log q*
  double regret_port = 0.0;  ///< best class state-CRP log wealth minus log wealth of phi(q*)
  double bound = 0.0;        ///< max over representatives g of pathwise_bound
  double qstar_log_wealth = 0.0;
  double best_log_wealth = 0.0;
};

/// Candidate sequences: greedy-adversarial and the m constant sequences.
inline RegretInstance regret_instance(const MarketSequence& market, const SideInfoSample& z, const FunctionClass& cls,
                                      SolverOptions opts = {}) {
  if (z.size() != market.days()) throw InputError("side information length differs from the market horizon");
  const int m = market.stocks();
  RegretInstance r;
  const QStarAssignment q(m, z, cls);
  const auto cover = minimal_covering(cls, z);

  std::vector<std::vector<Symbol>> candidates{greedy_adversarial_sequence(z, cls, m)};
  for (Symbol j = 1; j <= m; ++j) candidates.emplace_back(z.size(), j);
  r.regret_prob = kNegInf;
  for (const auto& y : candidates)
    r.regret_prob = std::max(r.regret_prob, class_max_log_likelihood(y, cover, m).log_likelihood - q.log_prob(y));

  r.qstar_log_wealth = qstar_wealth_dp(market, z, cls);
  r.best_log_wealth = best_class_wealth(market, z, cls, opts);
  r.regret_port = r.best_log_wealth - r.qstar_log_wealth;

  r.bound = 0.0;
  for (const auto& g : cover.representatives()) r.bound = std::max(r.bound, pathwise_bound(g, z, cls, m, q.plan()));
  return r;
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation; NaN when either side is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  const auto rx = ranks(x), ry = ranks(y);
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / k;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / k;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace upsi
