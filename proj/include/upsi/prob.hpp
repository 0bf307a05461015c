#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "upsi/types.hpp"

namespace upsi {

/// Per-state symbol counts k_{sj} with state totals n_s.
/// Sufficient statistic for the state-wise Laplace assignment.
class CountTable {
 public:
  CountTable(int m, int num_states = 1)
      : m_(m), s_(num_states),
        k_(static_cast<std::size_t>(m) * static_cast<std::size_t>(num_states), 0),
        n_(static_cast<std::size_t>(num_states), 0) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
    if (num_states < 1) throw InputError("state count must be >= 1");
  }

  /// Single-state table from explicit counts.
  static CountTable from_counts(std::span<const std::int64_t> counts) {
    CountTable t(static_cast<int>(counts.size()), 1);
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] < 0) throw InputError("counts must be nonnegative");
      t.k_[j] = counts[j];
      t.n_[0] += counts[j];
    }
    return t;
  }

  static CountTable from_sequence(const SymbolSequence& y) {
    CountTable t(y.alphabet, 1);
    for (Symbol s : y.symbols) t.add(1, s);
    return t;
  }

  void add(State s, Symbol y) {
    check_state(s);
    if (y < 1 || y > m_) throw InputError("symbol outside [1, m]");
    ++k_[index(s, y)];
    ++n_[static_cast<std::size_t>(s - 1)];
  }

  int alphabet() const { return m_; }
  int states() const { return s_; }
  std::int64_t count(State s, Symbol y) const { return k_[index(s, y)]; }
  std::int64_t state_total(State s) const { return n_[static_cast<std::size_t>(s - 1)]; }
  std::span<const std::int64_t> row(State s) const {
    check_state(s);
    return {k_.data() + static_cast<std::size_t>(s - 1) * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
  }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto v : n_) t += v;
    return t;
  }

  void check_state(State s) const {
    if (s < 1 || s > s_) throw InputError("state " + std::to_string(s) + " outside [1, S]");
  }

 private:
  std::size_t index(State s, Symbol y) const {
    return static_cast<std::size_t>(s - 1) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(y - 1);
  }

  int m_;
  int s_;
  std::vector<std::int64_t> k_;
  std::vector<std::int64_t> n_;
};

/// Add-one (Laplace) kernel: uniform Dirichlet mixture of i.i.d. models.
/// A different kernel (e.g. KT) plugs in by providing the same two members.
struct LaplaceKernel {
  /// log q(y^n) for any sequence with the given counts:
  /// -log[ C(n+m-1, m-1) * n!/(k_1!...k_m!) ] = lgamma(m) + sum lgamma(k_j+1) - lgamma(n+m).
  static double log_prob(std::span<const std::int64_t> counts) {
    const double m = static_cast<double>(counts.size());
    double n = 0.0;
    double acc = std::lgamma(m);
    for (auto k : counts) {
      acc += std::lgamma(static_cast<double>(k) + 1.0);
      n += static_cast<double>(k);
    }
    return acc - std::lgamma(n + m);
  }

  /// (k_j + 1) / (n + m).
  static double conditional(std::int64_t k_next, std::int64_t n, int m) {
    return (static_cast<double>(k_next) + 1.0) / (static_cast<double>(n) + m);
  }
};

template <class K>
concept ProbabilityKernel = requires(std::span<const std::int64_t> c, std::int64_t a, int m) {
  { K::log_prob(c) } -> std::convertible_to<double>;
  { K::conditional(a, a, m) } -> std::convertible_to<double>;
};

/// log q_L for a single-state count table.
template <ProbabilityKernel K = LaplaceKernel>
double laplace_log_prob(const CountTable& counts) {
  if (counts.states() != 1) throw InputError("laplace_log_prob expects a single-state table");
  return K::log_prob(counts.row(1));
}

template <ProbabilityKernel K = LaplaceKernel>
double laplace_log_prob(const SymbolSequence& y) {
  return laplace_log_prob<K>(CountTable::from_sequence(y));
}

/// q_L(next | history) from the history's counts.
template <ProbabilityKernel K = LaplaceKernel>
double laplace_conditional(const CountTable& counts_so_far, Symbol next) {
  if (counts_so_far.states() != 1) throw InputError("laplace_conditional expects a single-state table");
  return K::conditional(counts_so_far.count(1, next), counts_so_far.state_total(1), counts_so_far.alphabet());
}

/// Conditional from row `state` of a state-wise table.
template <ProbabilityKernel K = LaplaceKernel>
double statewise_laplace_conditional(const CountTable& counts, State state, Symbol next) {
  counts.check_state(state);
  if (next < 1 || next > counts.alphabet()) throw InputError("symbol outside [1, m]");
  return K::conditional(counts.count(state, next), counts.state_total(state), counts.alphabet());
}

inline CountTable statewise_counts(std::span<const Symbol> y, std::span<const State> w, int m, int num_states) {
  if (y.size() != w.size()) throw InputError("symbol and state sequences differ in length");
  CountTable t(m, num_states);
  for (std::size_t i = 0; i < y.size(); ++i) t.add(w[i], y[i]);
  return t;
}

/// Sum over states of the kernel log-probability of each state's count row.
/// States that never occur contribute log 1 = 0.
template <ProbabilityKernel K = LaplaceKernel>
double statewise_log_prob(const CountTable& counts) {
  double acc = 0.0;
  for (State s = 1; s <= counts.states(); ++s)
    if (counts.state_total(s) > 0) acc += K::log_prob(counts.row(s));
  return acc;
}

/// log q_{L;S}(y^n || w^n) = sum_s log q_L(y^n(s; w^n)).
template <ProbabilityKernel K = LaplaceKernel>
double statewise_laplace_log_prob(const SymbolSequence& y, const StateSequence& w) {
  if (y.size() != w.size()) throw InputError("symbol and state sequences differ in length");
  return statewise_log_prob<K>(statewise_counts(y.symbols, w.states, y.alphabet, w.num_states));
}

/// sup over state-wise i.i.d. models of log p(y^n || w^n): the per-state maximum likelihood
/// sum_s sum_j k_sj log(k_sj / n_s).
inline double max_log_likelihood(const CountTable& counts) {
  double acc = 0.0;
  for (State s = 1; s <= counts.states(); ++s) {
    const double n = static_cast<double>(counts.state_total(s));
    for (auto k : counts.row(s))
      if (k > 0) acc += static_cast<double>(k) * std::log(static_cast<double>(k) / n);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Batch assignments: objects that carry their side information and evaluate
// log p(y^t || w^t) for any prefix length t up to their horizon.
// ---------------------------------------------------------------------------

template <class A>
concept BatchAssignment = requires(const A& a, std::span<const Symbol> y) {
  { a.alphabet_size() } -> std::convertible_to<int>;
  { a.log_prob(y) } -> std::convertible_to<double>;
};

/// q_L without side information.
class LaplaceAssignment {
 public:
  explicit LaplaceAssignment(int m) : m_(m) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
  }
  int alphabet_size() const { return m_; }
  double log_prob(std::span<const Symbol> y) const {
    CountTable t(m_, 1);
    for (Symbol s : y) t.add(1, s);
    return LaplaceKernel::log_prob(t.row(1));
  }

 private:
  int m_;
};

/// q_{L;S}( . || w^n) for a fixed state sequence.
class StatewiseLaplaceAssignment {
 public:
  StatewiseLaplaceAssignment(int m, StateSequence w) : m_(m), w_(std::move(w)) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
  }
  int alphabet_size() const { return m_; }
  std::size_t horizon() const { return w_.size(); }
  double log_prob(std::span<const Symbol> y) const {
    if (y.size() > w_.size()) throw InputError("prefix longer than the state sequence");
    CountTable t(m_, w_.num_states);
    for (std::size_t i = 0; i < y.size(); ++i) t.add(w_.states[i], y[i]);
    return statewise_log_prob(t);
  }

 private:
  int m_;
  StateSequence w_;
};

/// State-wise i.i.d. model p_{theta_{1:S}}; with S = 1 this is p_theta.
class IidAssignment {
 public:
  explicit IidAssignment(SimplexVector theta) : thetas_{std::move(theta)} {}
  IidAssignment(std::vector<SimplexVector> thetas, StateSequence w) : thetas_(std::move(thetas)), w_(std::move(w)) {
    if (static_cast<int>(thetas_.size()) != w_.num_states)
      throw InputError("one simplex vector per state required");
  }
  int alphabet_size() const { return thetas_.front().size(); }
  double log_prob(std::span<const Symbol> y) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const std::size_t s = w_.states.empty() ? 0 : static_cast<std::size_t>(w_.states.at(i) - 1);
      acc += std::log(thetas_[s].of(y[i]));
    }
    return acc;
  }

 private:
  std::vector<SimplexVector> thetas_;
  StateSequence w_;
};

}  // namespace upsi
