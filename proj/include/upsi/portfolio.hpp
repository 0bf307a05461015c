#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/prob.hpp"
#include "upsi/qstar.hpp"
#include "upsi/types.hpp"

namespace upsi {

/// Enumeration over [m]^n is allowed up to this many sequences.
inline constexpr std::size_t kBruteForceLimit = std::size_t{1} << 24;

inline void require_brute_force(int m, std::size_t n) {
  if (count_sequences(m, n) > kBruteForceLimit)
    throw InfeasibleExactError("exact evaluation needs m^n = " + std::to_string(m) + "^" + std::to_string(n) +
                               " > 2^24 sequences; use the Monte Carlo estimators instead");
}

/// (theta_1, ..., theta_S): plays theta_{w_t} on day t.
struct StateCRP {
  std::vector<SimplexVector> thetas;

  int num_states() const { return static_cast<int>(thetas.size()); }
  const SimplexVector& operator[](State s) const { return thetas.at(static_cast<std::size_t>(s - 1)); }
};

/// Per-day log wealth factors and their running sum.
struct WealthTrajectory {
  std::vector<double> daily;
  std::vector<double> cumulative;

  double final_log_wealth() const { return cumulative.empty() ? 0.0 : cumulative.back(); }

  void push(double log_factor) {
    daily.push_back(log_factor);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + log_factor);
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline WealthTrajectory state_crp_trajectory(const StateCRP& crp, const MarketSequence& market,
                                             const StateSequence& states) {
  if (states.size() != market.days()) throw InputError("state sequence length differs from the market horizon");
  if (crp.num_states() < states.num_states) throw InputError("state-CRP has fewer portfolios than states");
  WealthTrajectory traj;
  for (std::size_t t = 0; t < market.days(); ++t) {
    const auto& theta = crp[states.states[t]];
    if (theta.size() != market.stocks()) throw InputError("portfolio dimension differs from the stock count");
    traj.push(std::log(dot(theta.weights(), market.row(t))));
  }
  return traj;
}

inline WealthTrajectory crp_trajectory(const SimplexVector& theta, const MarketSequence& market) {
  return state_crp_trajectory(StateCRP{{theta}}, market, StateSequence::constant(market.days()));
}

/// sum_t log(theta . x_t); -inf when some day's gain is zero.
inline double crp_wealth(const SimplexVector& theta, const MarketSequence& market) {
  if (theta.size() != market.stocks()) throw InputError("portfolio dimension differs from the stock count");
  double acc = 0.0;
  for (std::size_t t = 0; t < market.days(); ++t) acc += std::log(dot(theta.weights(), market.row(t)));
  return acc;
}

/// sum_t log(theta_{w_t} . x_t).
inline double state_crp_wealth(const StateCRP& crp, const MarketSequence& market, const StateSequence& states) {
  return state_crp_trajectory(crp, market, states).final_log_wealth();
}

/// log x(y^t) = sum_i log x_{i, y_i} over the first y.size() days.
inline double log_extremal_wealth(const MarketSequence& market, std::span<const Symbol> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += std::log(market.at(i, y[i]));
  return acc;
}

// ---------------------------------------------------------------------------
// Probability-induced portfolios by enumeration
// ---------------------------------------------------------------------------

/// phi(p)(. | x^{t-1}; w^t) for 1-based day t: weights proportional to
/// sum_{y^{t-1}} p(y^{t-1} j || w^t) x(y^{t-1}).
template <BatchAssignment A>
SimplexVector induced_portfolio_exact(const A& p, const MarketSequence& market, std::size_t t) {
  const int m = p.alphabet_size();
  if (m != market.stocks()) throw InputError("assignment alphabet differs from the stock count");
  if (t < 1 || t > market.days() + 1) throw InputError("day index out of range");
  require_brute_force(m, t);
  std::vector<LogSumAccumulator> num(static_cast<std::size_t>(m));
  std::vector<Symbol> ext(t);
  for_each_sequence(m, t - 1, [&](const std::vector<Symbol>& y) {
    const double lx = log_extremal_wealth(market, y);
    if (lx == kNegInf) return;
    std::copy(y.begin(), y.end(), ext.begin());
    for (Symbol j = 1; j <= m; ++j) {
      ext[t - 1] = j;
      num[static_cast<std::size_t>(j - 1)].add(p.log_prob(ext) + lx);
    }
  });
  std::vector<double> logs(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) logs[static_cast<std::size_t>(j)] = num[static_cast<std::size_t>(j)].value();
  const double norm = log_sum_exp(logs);
  if (norm == kNegInf) return SimplexVector::uniform(m);  // no surviving history: any portfolio is equivalent
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) w[static_cast<std::size_t>(j)] = std::exp(logs[static_cast<std::size_t>(j)] - norm);
  return SimplexVector::normalized(std::move(w));
}

/// log sum_{y^n} p(y^n || w^n) x(y^n): wealth of phi(p) in sum form.
template <BatchAssignment A>
double induced_wealth_exact(const A& p, const MarketSequence& market) {
  const int m = p.alphabet_size();
  if (m != market.stocks()) throw InputError("assignment alphabet differs from the stock count");
  require_brute_force(m, market.days());
  LogSumAccumulator acc;
  for_each_sequence(m, market.days(), [&](const std::vector<Symbol>& y) {
    const double lx = log_extremal_wealth(market, y);
    if (lx != kNegInf) acc.add(p.log_prob(y) + lx);
  });
  return acc.value();
}

/// Daily log gains of phi(p), computed from the induced portfolio of each day.
template <BatchAssignment A>
WealthTrajectory induced_trajectory_exact(const A& p, const MarketSequence& market) {
  require_brute_force(p.alphabet_size(), market.days());
  WealthTrajectory traj;
  for (std::size_t t = 1; t <= market.days(); ++t) {
    const auto a = induced_portfolio_exact(p, market, t);
    traj.push(std::log(dot(a.weights(), market.row(t - 1))));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Exact universal-portfolio wealth by count dynamic programming, O(n^m) work.
// sum_{y^n} q_L(y^n) x(y^n) = sum_k q_L(k) E(k), E(k) = sum of x(y^n) over
// sequences with symbol counts k.
// ---------------------------------------------------------------------------

inline double laplace_wealth_dp(const MarketSequence& market) {
  const std::size_t n = market.days();
  const int m = market.stocks();
  if (n == 0) return 0.0;
  if (m == 2) {
    // E[k] indexed by the count of symbol 1.
    std::vector<double> e(n + 1, 0.0), next(n + 1, 0.0);
    e[0] = 1.0;
    double log_scale = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = market.at(t, 1), b = market.at(t, 2);
      std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(t + 2), 0.0);
      double hi = 0.0;
      for (std::size_t k = 0; k <= t; ++k) {
        next[k + 1] += e[k] * a;
        next[k] += e[k] * b;
      }
      for (std::size_t k = 0; k <= t + 1; ++k) hi = std::max(hi, next[k]);
      if (hi == 0.0) return kNegInf;
      for (std::size_t k = 0; k <= t + 1; ++k) next[k] /= hi;
      log_scale += std::log(hi);
      std::swap(e, next);
    }
    LogSumAccumulator acc;
    for (std::size_t k = 0; k <= n; ++k) {
      if (e[k] == 0.0) continue;
      const std::int64_t c[2] = {static_cast<std::int64_t>(k), static_cast<std::int64_t>(n - k)};
      acc.add(std::log(e[k]) + LaplaceKernel::log_prob(c));
    }
    return acc.value() + log_scale;
  }
  std::map<std::vector<std::int64_t>, double> e{{std::vector<std::int64_t>(static_cast<std::size_t>(m), 0), 1.0}};
  double log_scale = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::map<std::vector<std::int64_t>, double> next;
    for (const auto& [k, v] : e) {
      for (int j = 0; j < m; ++j) {
        const double xj = market.row(t)[static_cast<std::size_t>(j)];
        if (xj == 0.0) continue;
        auto kk = k;
        ++kk[static_cast<std::size_t>(j)];
        next[kk] += v * xj;
      }
    }
    double hi = 0.0;
    for (const auto& [k, v] : next) hi = std::max(hi, v);
    if (hi == 0.0) return kNegInf;
    for (auto& [k, v] : next) v /= hi;
    log_scale += std::log(hi);
    e = std::move(next);
  }
  LogSumAccumulator acc;
  for (const auto& [k, v] : e) acc.add(std::log(v) + LaplaceKernel::log_prob(k));
  return acc.value() + log_scale;
}

/// Wealth of phi(q_{L;S}): product over states of the universal portfolio on each state's days.
inline double statewise_wealth_dp(const MarketSequence& market, const StateSequence& states) {
  if (states.size() != market.days()) throw InputError("state sequence length differs from the market horizon");
  std::vector<std::vector<std::size_t>> days(static_cast<std::size_t>(states.num_states));
  for (std::size_t t = 0; t < states.size(); ++t) days[static_cast<std::size_t>(states.states[t] - 1)].push_back(t);
  double acc = 0.0;
  for (const auto& d : days)
    if (!d.empty()) acc += laplace_wealth_dp(market.select(d));
  return acc;
}

/// Per-epoch contribution to the wealth of phi(q*_G).
struct EpochFactor {
  int epoch = 0;
  std::size_t ell = 1;
  double log_factor = 0.0;
};

/// Exact wealth of phi(q*_G) via the epoch factorization and count DP.
inline std::vector<EpochFactor> qstar_wealth_dp_epochs(const MarketSequence& market, const SideInfoSample& z,
                                                       const FunctionClass& cls) {
  if (z.size() != market.days()) throw InputError("side information length differs from the market horizon");
  std::vector<EpochFactor> out;
  for (const auto& seg : plan_epochs(z, cls)) {
    EpochFactor f{seg.epoch, seg.ell(), 0.0};
    const auto rows = market.slice(seg.first, seg.last);
    if (seg.epoch == 0) {
      double mean = 0.0;
      for (double v : rows.row(0)) mean += v;
      f.log_factor = std::log(mean / market.stocks());
    } else {
      std::vector<double> per_rep(seg.labels.rows);
      for (std::size_t k = 0; k < seg.labels.rows; ++k) {
        auto r = seg.labels.row(k);
        per_rep[k] = statewise_wealth_dp(rows, StateSequence({r.begin(), r.end()}, cls.num_states()));
      }
      f.log_factor = log_mean_exp(per_rep);
    }
    out.push_back(f);
  }
  return out;
}

inline double qstar_wealth_dp(const MarketSequence& market, const SideInfoSample& z, const FunctionClass& cls) {
  double acc = 0.0;
  for (const auto& f : qstar_wealth_dp_epochs(market, z, cls)) acc += f.log_factor;
  return acc;
}

// ---------------------------------------------------------------------------
// Hindsight-optimal (state-)CRP
// ---------------------------------------------------------------------------

struct SolverOptions {
  double tol = 1e-9;              ///< Frank-Wolfe duality gap, an upper bound on suboptimality
  std::size_t max_iterations = 100000;
};

struct CrpSolution {
  SimplexVector theta;
  double log_wealth = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
};

/// Maximizes sum_t log(theta . x_t) over the simplex by exponentiated-gradient ascent
/// with backtracking, started from `init` (uniform by default).
inline CrpSolution best_crp(const MarketSequence& market, SolverOptions opts = {},
                            std::optional<SimplexVector> init = std::nullopt) {
  const int m = market.stocks();
  const std::size_t n = market.days();
  if (n == 0) return {SimplexVector::uniform(m), 0.0, 0.0, 0};
  std::vector<double> theta = init ? std::vector<double>(init->weights().begin(), init->weights().end())
                                   : std::vector<double>(static_cast<std::size_t>(m), 1.0 / m);
  // Interior start keeps every day's gain positive.
  for (double& v : theta) v = std::max(v, 1e-12);
  {
    double s = 0.0;
    for (double v : theta) s += v;
    for (double& v : theta) v /= s;
  }
  auto objective = [&](const std::vector<double>& th) {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += std::log(dot(th, market.row(t)));
    return f;
  };
  std::vector<double> grad(static_cast<std::size_t>(m)), cand(static_cast<std::size_t>(m));
  double f = objective(theta);
  double eta = 1.0;
  double gap = 0.0;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = market.row(t);
      const double g = dot(theta, x);
      for (int i = 0; i < m; ++i) grad[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)] / g;
    }
    const double gmax = *std::max_element(grad.begin(), grad.end());
    gap = gmax - dot(theta, grad);
    if (gap <= opts.tol) break;
    bool improved = false;
    while (eta > 1e-30) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        cand[ii] = theta[ii] * std::exp(eta * (grad[ii] - gmax) / static_cast<double>(n));
        s += cand[ii];
      }
      for (double& v : cand) v /= s;
      const double fc = objective(cand);
      if (fc >= f) {
        improved = fc > f;
        theta.swap(cand);
        f = fc;
        eta *= 2.0;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
  }
  return {SimplexVector::normalized(theta), f, gap, it};
}

struct StateCrpSolution {
  StateCRP crp;
  double log_wealth = 0.0;
};

/// Hindsight-optimal state-CRP: one independent concave solve per state.
/// States that never occur get the uniform portfolio.
inline StateCrpSolution best_state_crp(const MarketSequence& market, const StateSequence& states,
                                       SolverOptions opts = {}, const StateCRP* warm_start = nullptr) {
  if (states.size() != market.days()) throw InputError("state sequence length differs from the market horizon");
  const int s_count = states.num_states;
  std::vector<std::vector<std::size_t>> days(static_cast<std::size_t>(s_count));
  for (std::size_t t = 0; t < states.size(); ++t) days[static_cast<std::size_t>(states.states[t] - 1)].push_back(t);
  StateCrpSolution out;
  for (int s = 0; s < s_count; ++s) {
    const auto& d = days[static_cast<std::size_t>(s)];
    if (d.empty()) {
      out.crp.thetas.push_back(SimplexVector::uniform(market.stocks()));
      continue;
    }
    std::optional<SimplexVector> init;
    if (warm_start != nullptr && s < warm_start->num_states()) init = warm_start->thetas[static_cast<std::size_t>(s)];
    auto sol = best_crp(market.select(d), opts, init);
    out.log_wealth += sol.log_wealth;
    out.crp.thetas.push_back(std::move(sol.theta));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regret
// ---------------------------------------------------------------------------

/// Best hindsight state-CRP wealth over the class: the supremum over G reduces to
/// the covering of z^n because wealth depends on g only through g(z^n).
inline double best_class_wealth(const MarketSequence& market, const SideInfoSample& side, const FunctionClass& cls,
                                SolverOptions opts = {}) {
  if (side.size() != market.days()) throw InputError("side information length differs from the market horizon");
  const auto cover = minimal_covering(cls, side);
  double best = kNegInf;
  std::optional<StateCRP> prev;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    auto r = cover.label_matrix().row(k);
    auto sol = best_state_crp(market, StateSequence({r.begin(), r.end()}, cls.num_states()), opts,
                              prev ? &*prev : nullptr);
    best = std::max(best, sol.log_wealth);
    prev = std::move(sol.crp);
  }
  return best;
}

/// Reg^port: best class wealth minus the candidate's log wealth (+inf for a ruined candidate).
inline double regret_port(double candidate_log_wealth, const MarketSequence& market, const SideInfoSample& side,
                          const FunctionClass& cls, SolverOptions opts = {}) {
  if (candidate_log_wealth == kNegInf) return std::numeric_limits<double>::infinity();
  return best_class_wealth(market, side, cls, opts) - candidate_log_wealth;
}

/// Reg^prob against state-wise i.i.d. models and the class, by enumeration over y^n:
/// max_g max_y [ max-likelihood log p(y || g(z)) - log q(y || z) ].
template <BatchAssignment A>
double regret_prob_exact(const A& q, const SideInfoSample& side, const FunctionClass& cls) {
  const int m = q.alphabet_size();
  const std::size_t n = side.size();
  require_brute_force(m, n);
  const auto cover = minimal_covering(cls, side);
  double worst = kNegInf;
  for_each_sequence(m, n, [&](const std::vector<Symbol>& y) {
    const double lq = q.log_prob(y);
    for (std::size_t k = 0; k < cover.size(); ++k) {
      const auto counts = statewise_counts(y, cover.label_matrix().row(k), m, cls.num_states());
      worst = std::max(worst, max_log_likelihood(counts) - lq);
    }
  });
  return worst;
}

struct DominationResult {
  double regret_port = 0.0;
  double regret_prob = 0.0;
  bool holds = false;
};

/// Reg^port(phi(q)) <= Reg^prob(q), both sides by enumeration.
template <BatchAssignment A>
DominationResult regret_prob_domination_check(const A& q, const MarketSequence& market, const SideInfoSample& side,
                                              const FunctionClass& cls, double slack = 1e-9) {
  DominationResult r;
  r.regret_port = regret_port(induced_wealth_exact(q, market), market, side, cls);
  r.regret_prob = regret_prob_exact(q, side, cls);
  r.holds = r.regret_port <= r.regret_prob + slack;
  return r;
}

/// (sum a_i)/(sum b_i) <= max_j a_j/b_j for nonnegative inputs, with 0/0 = 0.
inline bool ratio_of_sums_bounded(std::span<const double> a, std::span<const double> b, double rel_tol = 1e-12) {
  if (a.size() != b.size()) throw InputError("ratio inputs differ in length");
  double sa = 0.0, sb = 0.0, best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    double r = 0.0;
    if (b[i] > 0.0) r = a[i] / b[i];
    else if (a[i] > 0.0) r = std::numeric_limits<double>::infinity();
    best = std::max(best, r);
  }
  const double lhs = sb > 0.0 ? sa / sb : (sa > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return lhs <= best * (1.0 + rel_tol) || lhs <= best;
}

}  // namespace upsi
