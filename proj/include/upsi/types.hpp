#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "upsi/error.hpp"

namespace upsi {

/// Symbols (stock indices) and states are 1-based at the API surface: y in [m], w in [S].
using Symbol = int;
using State = int;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// log-domain helpers
// ---------------------------------------------------------------------------

/// log(sum_i exp(v_i)) with max subtraction. Empty input gives -inf.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kNegInf) return kNegInf;
  if (hi == std::numeric_limits<double>::infinity()) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

/// log((1/n) sum_i exp(v_i)).
inline double log_mean_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

/// Streaming log-sum-exp accumulator.
class LogSumAccumulator {
 public:
  void add(double log_value) {
    if (log_value == kNegInf) return;
    if (log_value > max_) {
      sum_ = sum_ * std::exp(max_ - log_value) + 1.0;
      max_ = log_value;
    } else {
      sum_ += std::exp(log_value - max_);
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// Number of sequences m^n, saturating at max size_t.
inline std::size_t count_sequences(int m, std::size_t n) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(m))
      return std::numeric_limits<std::size_t>::max();
    total *= static_cast<std::size_t>(m);
  }
  return total;
}

/// Calls f(y) for every y in [m]^n in lexicographic order (y is 1-based, length n).
template <class F>
void for_each_sequence(int m, std::size_t n, F&& f) {
  std::vector<int> y(n, 1);
  for (;;) {
    f(static_cast<const std::vector<int>&>(y));
    std::size_t i = n;
    while (i > 0 && y[i - 1] == m) y[--i] = 1;
    if (i == 0) return;
    ++y[i - 1];
  }
}

// ---------------------------------------------------------------------------
// SimplexVector
// ---------------------------------------------------------------------------

/// A point of the probability simplex: nonnegative weights summing to one.
class SimplexVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  SimplexVector() = default;

  explicit SimplexVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw InputError("simplex vector must be nonempty");
    double sum = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0)) throw InputError("simplex weights must be nonnegative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kSumTolerance * static_cast<double>(w_.size()) &&
        std::abs(sum - 1.0) > kSumTolerance)
      throw InputError("simplex weights must sum to 1 (got " + std::to_string(sum) + ")");
  }

  /// Normalizes arbitrary nonnegative weights (at least one positive).
  static SimplexVector normalized(std::vector<double> weights) {
    double sum = 0.0;
    for (double x : weights) {
      if (!(x >= 0.0)) throw InputError("weights must be nonnegative");
      sum += x;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) throw InputError("weights must have positive finite sum");
    for (double& x : weights) x /= sum;
    return SimplexVector(std::move(weights));
  }

  static SimplexVector uniform(int m) {
    if (m < 1) throw InputError("simplex dimension must be >= 1");
    return SimplexVector(std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
  }

  /// Vertex e_j, j 1-based.
  static SimplexVector vertex(int m, Symbol j) {
    if (j < 1 || j > m) throw InputError("vertex index out of range");
    std::vector<double> w(static_cast<std::size_t>(m), 0.0);
    w[static_cast<std::size_t>(j - 1)] = 1.0;
    return SimplexVector(std::move(w));
  }

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> weights() const { return w_; }

  /// Weight of symbol j (1-based).
  double of(Symbol j) const { return w_.at(static_cast<std::size_t>(j - 1)); }

 private:
  std::vector<double> w_;
};

// ---------------------------------------------------------------------------
// MarketSequence
// ---------------------------------------------------------------------------

/// n x m matrix of nonnegative price relatives, rows indexed by day (0-based).
class MarketSequence {
 public:
  MarketSequence() = default;

  MarketSequence(std::size_t m, std::vector<double> row_major) : m_(m), data_(std::move(row_major)) {
    if (m_ < 1) throw InputError("market must have at least one stock");
    if (data_.size() % m_ != 0) throw InputError("market data size is not a multiple of m");
    for (std::size_t t = 0; t < days(); ++t) {
      bool positive = false;
      for (double v : row(t)) {
        if (!(v >= 0.0) || !std::isfinite(v))
          throw InputError("price relatives must be finite and nonnegative (day " + std::to_string(t + 1) + ")");
        positive = positive || v > 0.0;
      }
      if (!positive) throw InputError("day " + std::to_string(t + 1) + " has no positive price relative");
    }
  }

  static MarketSequence from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InputError("market must have at least one row");
    const std::size_t m = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * m);
    for (const auto& r : rows) {
      if (r.size() != m) throw InputError("ragged market rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return MarketSequence(m, std::move(flat));
  }

  /// All-ones market of n days.
  static MarketSequence ones(std::size_t n, std::size_t m) {
    return MarketSequence(m, std::vector<double>(n * m, 1.0));
  }

  std::size_t days() const { return m_ == 0 ? 0 : data_.size() / m_; }
  int stocks() const { return static_cast<int>(m_); }
  std::span<const double> row(std::size_t t) const { return {data_.data() + t * m_, m_}; }
  double at(std::size_t t, Symbol j) const { return data_[t * m_ + static_cast<std::size_t>(j - 1)]; }
  std::span<const double> data() const { return data_; }

  /// Days [first, last) as a new market.
  MarketSequence slice(std::size_t first, std::size_t last) const {
    if (first > last || last > days()) throw InputError("market slice out of range");
    return MarketSequence(m_, std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(first * m_),
                                                  data_.begin() + static_cast<std::ptrdiff_t>(last * m_)));
  }

  /// Rows at the given day indices.
  MarketSequence select(std::span<const std::size_t> idx) const {
    std::vector<double> out;
    out.reserve(idx.size() * m_);
    for (std::size_t t : idx) {
      auto r = row(t);
      out.insert(out.end(), r.begin(), r.end());
    }
    MarketSequence result;
    result.m_ = m_;
    result.data_ = std::move(out);
    return result;
  }

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Symbol and state sequences
// ---------------------------------------------------------------------------

/// y^n in [m]^n.
struct SymbolSequence {
  std::vector<Symbol> symbols;
  int alphabet = 2;

  SymbolSequence() = default;
  SymbolSequence(std::vector<Symbol> ys, int m) : symbols(std::move(ys)), alphabet(m) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
    for (Symbol y : symbols)
      if (y < 1 || y > m) throw InputError("symbol " + std::to_string(y) + " outside [1, m]");
  }
  std::size_t size() const { return symbols.size(); }
};

/// w^n in [S]^n.
struct StateSequence {
  std::vector<State> states;
  int num_states = 1;

  StateSequence() = default;
  StateSequence(std::vector<State> ws, int s) : states(std::move(ws)), num_states(s) {
    if (s < 1) throw InputError("state count must be >= 1");
    for (State w : states)
      if (w < 1 || w > s) throw InputError("state " + std::to_string(w) + " outside [1, S]");
  }

  static StateSequence constant(std::size_t n) { return StateSequence(std::vector<State>(n, 1), 1); }
  std::size_t size() const { return states.size(); }
};

}  // namespace upsi
