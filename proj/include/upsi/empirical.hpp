#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/montecarlo.hpp"

namespace upsi {

/// P(g1(Z) != g2(Z)) under the stationary marginal of Z.
///
/// `pairwise` handles arbitrary state functions. For 1D threshold classes the
/// left-continuous CDF F(a) = P(Z < a) is enough, since
/// P(1{Z >= a1} != 1{Z >= a2}) = |F(a1) - F(a2)|.
struct DisagreementOracle {
  std::function<double(const StateFunction&, const StateFunction&)> pairwise;
  std::function<double(double)> threshold_cdf;

  bool empty() const { return !pairwise && !threshold_cdf; }

  double operator()(const StateFunction& g1, const StateFunction& g2) const {
    if (pairwise) return pairwise(g1, g2);
    if (threshold_cdf) {
      const auto* t1 = std::get_if<StateFunction::Threshold>(&g1.params());
      const auto* t2 = std::get_if<StateFunction::Threshold>(&g2.params());
      if (t1 == nullptr || t2 == nullptr) throw InputError("threshold oracle applied to a non-threshold function");
      return std::abs(threshold_cdf(t1->a) - threshold_cdf(t2->a));
    }
    throw InputError("no disagreement oracle supplied");
  }
};

/// Oracle from a left-continuous marginal CDF F(a) = P(Z < a).
inline DisagreementOracle threshold_oracle(std::function<double(double)> cdf_left) {
  DisagreementOracle o;
  o.threshold_cdf = std::move(cdf_left);
  return o;
}

inline DisagreementOracle uniform01_oracle() {
  return threshold_oracle([](double a) { return std::clamp(a, 0.0, 1.0); });
}

inline DisagreementOracle point_mass_oracle(double c) {
  return threshold_oracle([c](double a) { return a > c ? 1.0 : 0.0; });
}

/// Stationary AR(1) marginal N(0, sigma^2 / (1 - phi^2)), optionally rounded to a grid.
inline DisagreementOracle ar1_oracle(double phi, double sigma, double grid) {
  const double sd = sigma / std::sqrt(1.0 - phi * phi);
  return threshold_oracle([=](double a) {
    auto normal_cdf = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
    if (grid <= 0.0) return normal_cdf(a / sd);
    // V = grid * round(Z / grid) < a  <=>  Z < grid * (ceil(a / grid) - 1/2)
    return normal_cdf(grid * (std::ceil(a / grid) - 0.5) / sd);
  });
}

/// d_H(g(segment), g~(segment)): points where the two functions disagree.
inline std::size_t epoch_hamming(const StateFunction& g, const StateFunction& g_match, const SideInfoSample& segment) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < segment.size(); ++i)
    if (g(segment.point(i)) != g_match(segment.point(i))) ++d;
  return d;
}

/// Same count over points [first, last) of a longer sample.
inline std::size_t epoch_hamming_count(const StateFunction& g, const StateFunction& g_match, const SideInfoSample& z,
                                       std::size_t first, std::size_t last) {
  if (first > last || last > z.size()) throw InputError("segment out of range");
  std::size_t d = 0;
  for (std::size_t i = first; i < last; ++i)
    if (g(z.point(i)) != g_match(z.point(i))) ++d;
  return d;
}

/// rho_{GxG}(z^n) = max over representative pairs of |#disagreements - n P(disagree)|.
inline double rho_gxg(const FunctionClass& cls, const SideInfoSample& sample, const DisagreementOracle& oracle) {
  if (oracle.empty()) throw InputError("rho requires a disagreement oracle");
  const std::size_t n = sample.size();
  if (n == 0) return 0.0;
  const auto cover = minimal_covering(cls, sample);
  const double nn = static_cast<double>(n);

  const auto* thr = std::get_if<FunctionClass::Threshold1D>(&cls.family());
  if (thr != nullptr && oracle.threshold_cdf && !oracle.pairwise) {
    // Representatives are thresholds a_1 < ... < a_l. For a_k < a_l the disagreement
    // count is #{a_k <= z < a_l} = c_l - c_k with c_k = #{z < a_k}, so the centered term
    // is D_l - D_k with D_k = c_k - n F(a_k) and the maximum is max D - min D.
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = sample.point(i)[thr->coordinate];
    std::sort(z.begin(), z.end());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& g : cover.representatives()) {
      const double a = std::get<StateFunction::Threshold>(g.params()).a;
      const double below = static_cast<double>(std::lower_bound(z.begin(), z.end(), a) - z.begin());
      const double d = below - nn * oracle.threshold_cdf(a);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return hi - lo;
  }

  const auto& labels = cover.label_matrix();
  double best = 0.0;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    for (std::size_t l = k + 1; l < cover.size(); ++l) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) count += labels.at(k, i) != labels.at(l, i);
      const double p = oracle(cover.representative(k), cover.representative(l));
      best = std::max(best, std::abs(static_cast<double>(count) - nn * p));
    }
  }
  return best;
}

/// Side-information process: horizon and seed to a sample path.
using SideProcess = std::function<SideInfoSample(std::size_t n, std::uint64_t seed)>;

inline SideProcess iid_uniform_process() {
  return [](std::size_t n, std::uint64_t seed) {
    auto rng = make_stream(seed, 0x5eed);
    std::vector<double> z(n);
    for (auto& v : z) v = uniform01(rng);
    return SideInfoSample::scalar(std::move(z));
  };
}

inline SideProcess constant_process(double c) {
  return [c](std::size_t n, std::uint64_t) { return SideInfoSample::scalar(std::vector<double>(n, c)); };
}

struct RhoRow {
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_rho = 0.0;
  double stderr_rho = 0.0;
};

struct RhoReport {
  std::vector<RhoRow> rows;
  std::optional<double> fitted_exponent;  ///< slope of log mean_rho on log n; absent if < 2 positive rows
};

/// Least-squares slope of log y on log x over the points with y > 0.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::nullopt;
  const double k = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

/// Mean rho over `trials` independent paths at each horizon; trial t of horizon n uses
/// seed splitmix(seed ^ n) + t.
inline RhoReport rho_growth_report(const SideProcess& process, const FunctionClass& cls,
                                   const DisagreementOracle& oracle, const std::vector<std::size_t>& horizons,
                                   std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be >= 1");
  RhoReport rep;
  std::vector<double> xs, ys;
  for (std::size_t n : horizons) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double r = rho_gxg(cls, process(n, splitmix64(seed ^ n) + t), oracle);
      sum += r;
      sq += r * r;
    }
    const double tr = static_cast<double>(trials);
    const double mean = sum / tr;
    const double var = trials > 1 ? std::max(0.0, (sq - tr * mean * mean) / (tr - 1.0)) : 0.0;
    rep.rows.push_back({n, trials, mean, std::sqrt(var / tr)});
    xs.push_back(static_cast<double>(n));
    ys.push_back(mean);
  }
  rep.fitted_exponent = loglog_slope(xs, ys);
  return rep;
}

}  // namespace upsi
