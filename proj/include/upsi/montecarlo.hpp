#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/qstar.hpp"
#include "upsi/types.hpp"

namespace upsi {

// ---------------------------------------------------------------------------
// Random streams. Every (seed, epoch, representative, state) tuple gets its own
// generator, so estimates do not depend on evaluation order.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c + 0x85157af5ULL));
  return Rng(h);
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace detail {

/// Uniform point of the simplex written into out[0..m): spacings of sorted uniforms.
inline void fill_uniform_simplex(int m, Rng& rng, double* out, std::vector<double>& scratch) {
  if (m == 2) {
    const double u = uniform01(rng);
    out[0] = u;
    out[1] = 1.0 - u;
    return;
  }
  scratch.resize(static_cast<std::size_t>(m - 1));
  for (auto& v : scratch) v = uniform01(rng);
  std::sort(scratch.begin(), scratch.end());
  double prev = 0.0;
  for (int i = 0; i < m - 1; ++i) {
    out[i] = scratch[static_cast<std::size_t>(i)] - prev;
    prev = scratch[static_cast<std::size_t>(i)];
  }
  out[m - 1] = 1.0 - prev;
}

}  // namespace detail

/// Exact draw from the uniform density on the simplex (Dirichlet(1, ..., 1)).
inline SimplexVector sample_uniform_simplex(int m, Rng& rng) {
  if (m < 2) throw InputError("simplex dimension must be >= 2");
  std::vector<double> w(static_cast<std::size_t>(m)), scratch;
  detail::fill_uniform_simplex(m, rng, w.data(), scratch);
  return SimplexVector::normalized(std::move(w));
}

struct McConfig {
  std::size_t samples = 10000;  ///< N per covering representative (and per epoch)
  std::uint64_t seed = 0;
  bool epoch_mode = true;  ///< false: a single covering of the whole z^n (non-causal mixture)
};

/// log of a sample-mean wealth with its delta-method standard error.
struct LogMeanEstimate {
  double log_wealth = 0.0;
  double stderr_log = 0.0;
  std::size_t degenerate = 0;  ///< draws whose wealth was zero (or underflowed)
};

struct EpochEstimate {
  int epoch = 0;
  std::size_t ell = 1;
  double log_factor = 0.0;
  double stderr_log = 0.0;
};

struct McResult {
  double log_wealth = 0.0;
  double stderr_log = 0.0;
  std::size_t degenerate = 0;
  std::vector<EpochEstimate> per_epoch;
};

namespace detail {

/// Buy-and-hold over N sampled CRPs on the given days: log of the mean final wealth.
/// Wealths are kept in the linear domain with a shared scale that is folded into a
/// log offset whenever the worst-case drift could leave the double range.
inline LogMeanEstimate mc_buy_and_hold(const MarketSequence& market, std::span<const std::size_t> days,
                                       std::size_t samples, Rng& rng) {
  if (samples == 0) throw InputError("Monte Carlo sample count must be >= 1");
  LogMeanEstimate est;
  if (days.empty()) return est;
  const int m = market.stocks();
  const std::size_t mm = static_cast<std::size_t>(m);
  // For m = 2 only the first weight is stored, contiguously.
  std::vector<double> theta(m == 2 ? samples : samples * mm), scratch;
  if (m == 2) {
    double pair[2];
    for (std::size_t i = 0; i < samples; ++i) {
      fill_uniform_simplex(2, rng, pair, scratch);
      theta[i] = pair[0];
    }
  } else {
    for (std::size_t i = 0; i < samples; ++i) fill_uniform_simplex(m, rng, theta.data() + i * mm, scratch);
  }
  std::vector<double> w(samples, 1.0);
  double log_scale = 0.0;
  double drift = 0.0;  // bound on |log| growth since the last fold
  constexpr double kFold = 500.0;
  auto fold = [&] {
    const double hi = *std::max_element(w.begin(), w.end());
    if (hi > 0.0) {
      const double inv = 1.0 / hi;
      for (double& v : w) v *= inv;
      log_scale += std::log(hi);
    }
    drift = 0.0;
  };
  for (std::size_t t : days) {
    const auto x = market.row(t);
    double lo = x[0], hi = x[0];
    for (double v : x) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double step = std::max(std::abs(std::log(hi)), lo > 0.0 ? std::abs(std::log(lo)) : 745.0);
    if (drift + step > kFold) fold();
    drift += step;
    if (m == 2) {
      const double a = x[0], b = x[1];
      const double d = a - b;
      double* wp = w.data();
      const double* th = theta.data();
      for (std::size_t i = 0; i < samples; ++i) wp[i] *= b + d * th[i];
    } else {
      for (std::size_t i = 0; i < samples; ++i) {
        const double* th = theta.data() + i * mm;
        double g = 0.0;
        for (std::size_t j = 0; j < mm; ++j) g += th[j] * x[j];
        w[i] *= g;
      }
    }
  }
  double mean = 0.0;
  for (double v : w) {
    mean += v;
    if (v == 0.0) ++est.degenerate;
  }
  mean /= static_cast<double>(samples);
  if (mean == 0.0) {
    est.log_wealth = kNegInf;
    est.stderr_log = std::numeric_limits<double>::infinity();
    return est;
  }
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  var = samples > 1 ? var / static_cast<double>(samples - 1) : 0.0;
  est.log_wealth = std::log(mean) + log_scale;
  est.stderr_log = samples > 1 ? std::sqrt(var / static_cast<double>(samples)) / mean
                               : std::numeric_limits<double>::infinity();
  return est;
}

/// Product over states of the per-state buy-and-hold estimates; stream (seed, epoch, rep, state).
inline LogMeanEstimate mc_statewise(const MarketSequence& market, std::span<const State> states, int num_states,
                                    std::size_t first_day, const McConfig& cfg, std::uint64_t epoch,
                                    std::uint64_t rep) {
  std::vector<std::vector<std::size_t>> days(static_cast<std::size_t>(num_states));
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] < 1 || states[i] > num_states) throw InputError("state outside [1, S]");
    days[static_cast<std::size_t>(states[i] - 1)].push_back(first_day + i);
  }
  LogMeanEstimate total;
  double var = 0.0;
  for (int s = 0; s < num_states; ++s) {
    if (days[static_cast<std::size_t>(s)].empty()) continue;
    auto rng = make_stream(cfg.seed, epoch, rep, static_cast<std::uint64_t>(s) + 1);
    const auto e = mc_buy_and_hold(market, days[static_cast<std::size_t>(s)], cfg.samples, rng);
    total.log_wealth += e.log_wealth;
    total.degenerate += e.degenerate;
    var += e.stderr_log * e.stderr_log;
  }
  total.stderr_log = std::sqrt(var);
  return total;
}

/// Uniform average of per-representative wealths, in log domain, with propagated error.
inline std::pair<double, double> average_wealths(std::span<const LogMeanEstimate> reps) {
  std::vector<double> lw(reps.size());
  for (std::size_t k = 0; k < reps.size(); ++k) lw[k] = reps[k].log_wealth;
  const double log_avg = log_mean_exp(lw);
  if (log_avg == kNegInf) return {kNegInf, std::numeric_limits<double>::infinity()};
  const double hi = *std::max_element(lw.begin(), lw.end());
  double sum = 0.0, var = 0.0;
  for (const auto& r : reps) {
    const double wk = std::exp(r.log_wealth - hi);
    sum += wk;
    var += wk * wk * r.stderr_log * r.stderr_log;
  }
  return {log_avg, std::sqrt(var) / sum};
}

}  // namespace detail

/// Wealth of Cover's universal portfolio phi(q_L) as the mean CRP wealth under the uniform prior.
inline McResult mc_wealth_up(const MarketSequence& market, const McConfig& cfg) {
  std::vector<std::size_t> days(market.days());
  for (std::size_t t = 0; t < days.size(); ++t) days[t] = t;
  auto rng = make_stream(cfg.seed, 0, 0, 1);
  const auto e = detail::mc_buy_and_hold(market, days, cfg.samples, rng);
  return {e.log_wealth, e.stderr_log, e.degenerate, {{0, 1, e.log_wealth, e.stderr_log}}};
}

/// Wealth of phi(q_{L;S}): independent uniform-prior estimates on each state's days.
inline McResult mc_wealth_statewise(const MarketSequence& market, const StateSequence& states, const McConfig& cfg) {
  if (states.size() != market.days()) throw InputError("state sequence length differs from the market horizon");
  const auto e = detail::mc_statewise(market, states.states, states.num_states, 0, cfg, 0, 0);
  return {e.log_wealth, e.stderr_log, e.degenerate, {{0, 1, e.log_wealth, e.stderr_log}}};
}

/// Wealth of phi(q*_G): per epoch, a covering from the prefix, N fresh state-wise CRPs per
/// representative run buy-and-hold over the epoch, the l_j wealths are averaged, and the
/// epoch factors multiply. Epoch 0 (day 1) plays the uniform portfolio exactly.
inline McResult mc_wealth_qstar(const MarketSequence& market, const SideInfoSample& side, const FunctionClass& cls,
                                const McConfig& cfg) {
  if (side.size() != market.days()) throw InputError("side information length differs from the market horizon");
  McResult out;
  double var = 0.0;
  auto add_epoch = [&](int epoch, std::size_t first, const LabelMatrix& labels) {
    std::vector<LogMeanEstimate> reps(labels.rows);
    for (std::size_t k = 0; k < labels.rows; ++k) {
      reps[k] = detail::mc_statewise(market, labels.row(k), cls.num_states(), first, cfg,
                                     static_cast<std::uint64_t>(epoch) + 1, k);
      out.degenerate += reps[k].degenerate;
    }
    const auto [lf, se] = detail::average_wealths(reps);
    out.per_epoch.push_back({epoch, labels.rows, lf, se});
    out.log_wealth += lf;
    var += se * se;
  };
  if (!cfg.epoch_mode) {
    if (market.days() > 0) {
      const auto cover = minimal_covering(cls, side);
      add_epoch(0, 0, cover.label_matrix());
    }
  } else {
    for (const auto& seg : plan_epochs(side, cls)) {
      if (seg.epoch == 0) {
        double mean = 0.0;
        for (double v : market.row(0)) mean += v;
        const double lf = std::log(mean / market.stocks());
        out.per_epoch.push_back({0, 1, lf, 0.0});
        out.log_wealth += lf;
        continue;
      }
      add_epoch(seg.epoch, seg.first, seg.labels);
    }
  }
  out.stderr_log = std::sqrt(var);
  return out;
}

/// Heuristic N = Omega(1/eps^m) for the naive estimator at accuracy eps.
inline double naive_sample_requirement(int m, double eps) { return std::pow(1.0 / eps, m); }

}  // namespace upsi
