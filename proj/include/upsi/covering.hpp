#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "upsi/types.hpp"

namespace upsi {

/// z^n: n points of a fixed dimension D, stored row-major.
class SideInfoSample {
 public:
  SideInfoSample() = default;
  SideInfoSample(std::size_t dim, std::vector<double> row_major) : dim_(dim), data_(std::move(row_major)) {
    if (dim_ == 0) throw InputError("side information dimension must be >= 1");
    if (data_.size() % dim_ != 0) throw InputError("side information size is not a multiple of its dimension");
    for (double v : data_)
      if (!std::isfinite(v)) throw InputError("side information must be finite");
  }

  static SideInfoSample scalar(std::vector<double> values) { return SideInfoSample(1, std::move(values)); }

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const { return data_; }

  /// Points [first, last).
  SideInfoSample slice(std::size_t first, std::size_t last) const {
    if (first > last || last > size()) throw InputError("side information slice out of range");
    SideInfoSample out;
    out.dim_ = dim_;
    out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                     data_.begin() + static_cast<std::ptrdiff_t>(last * dim_));
    return out;
  }

  SideInfoSample prefix(std::size_t n) const { return slice(0, n); }

  void push_back(std::span<const double> p) {
    if (data_.empty()) dim_ = p.size();
    if (dim_ == 0) throw InputError("side information dimension must be >= 1");
    if (p.size() != dim_) throw InputError("point dimension mismatch");
    data_.insert(data_.end(), p.begin(), p.end());
  }

 private:
  std::size_t dim_ = 1;
  std::vector<double> data_;
};

/// g: Z -> [S]. Threshold convention is 1{z >= a}: state 1 = below, state 2 = at-or-above.
class StateFunction {
 public:
  struct Threshold {
    std::size_t coordinate = 0;
    double a = 1.0;
  };
  /// (1{z_1 >= a_1}, ..., 1{z_D >= a_D}) encoded as 1 + sum_i bit_i * 2^i.
  struct ProductThreshold {
    std::vector<double> a;
  };
  /// 1 + #{cuts <= z_c}; cuts sorted ascending.
  struct Bins {
    std::size_t coordinate = 0;
    std::vector<double> cuts;
  };
  struct Constant {};

  using Params = std::variant<Threshold, ProductThreshold, Bins, Constant>;

  StateFunction() : p_(Constant{}) {}
  StateFunction(Params p) : p_(std::move(p)) {
    if (auto* b = std::get_if<Bins>(&p_)) {
      if (!std::is_sorted(b->cuts.begin(), b->cuts.end())) throw InputError("bin cuts must be sorted");
    }
    if (auto* pt = std::get_if<ProductThreshold>(&p_)) {
      if (pt->a.empty() || pt->a.size() > 16) throw InputError("product threshold needs 1..16 coordinates");
    }
  }

  static StateFunction threshold(double a, std::size_t coordinate = 0) { return StateFunction(Threshold{coordinate, a}); }
  static StateFunction product_threshold(std::vector<double> a) { return StateFunction(ProductThreshold{std::move(a)}); }
  static StateFunction bins(std::vector<double> cuts, std::size_t coordinate = 0) {
    return StateFunction(Bins{coordinate, std::move(cuts)});
  }
  static StateFunction constant() { return StateFunction(Constant{}); }

  int num_states() const {
    return std::visit(
        [](const auto& p) -> int {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Threshold>) return 2;
          else if constexpr (std::is_same_v<T, ProductThreshold>) return 1 << p.a.size();
          else if constexpr (std::is_same_v<T, Bins>) return static_cast<int>(p.cuts.size()) + 1;
          else return 1;
        },
        p_);
  }

  /// Smallest point dimension the function can be applied to.
  std::size_t min_dim() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Threshold> || std::is_same_v<T, Bins>) return p.coordinate + 1;
          else if constexpr (std::is_same_v<T, ProductThreshold>) return p.a.size();
          else return 0;
        },
        p_);
  }

  State operator()(std::span<const double> z) const {
    if (z.size() < min_dim()) throw InputError("point dimension too small for state function");
    return std::visit(
        [&](const auto& p) -> State {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Threshold>) {
            return z[p.coordinate] >= p.a ? 2 : 1;
          } else if constexpr (std::is_same_v<T, ProductThreshold>) {
            State s = 1;
            for (std::size_t i = 0; i < p.a.size(); ++i)
              if (z[i] >= p.a[i]) s += State{1} << i;
            return s;
          } else if constexpr (std::is_same_v<T, Bins>) {
            auto it = std::upper_bound(p.cuts.begin(), p.cuts.end(), z[p.coordinate]);
            return 1 + static_cast<State>(it - p.cuts.begin());
          } else {
            return 1;
          }
        },
        p_);
  }

  /// Labels of every sample point.
  std::vector<State> apply(const SideInfoSample& sample) const {
    std::vector<State> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) out[i] = (*this)(sample.point(i));
    return out;
  }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

/// Enumerable family G of state functions with a declared Natarajan dimension.
class FunctionClass {
 public:
  struct Threshold1D {
    std::size_t coordinate = 0;
  };
  struct ProductThreshold {
    std::size_t dim = 2;
  };
  struct FiniteSet {
    std::vector<StateFunction> members;
  };
  using Family = std::variant<Threshold1D, ProductThreshold, FiniteSet>;

  static FunctionClass threshold1d(std::size_t coordinate = 0) { return FunctionClass(Threshold1D{coordinate}, 2, 1); }

  /// S = 2^D; declared dimension max(D, ceil(D log2 D)).
  static FunctionClass product_threshold(std::size_t dim) {
    if (dim < 1 || dim > 16) throw InputError("product threshold dimension must be in [1, 16]");
    const double dd = static_cast<double>(dim);
    const int d = std::max(static_cast<int>(dim), static_cast<int>(std::ceil(dd * std::log2(dd))));
    return FunctionClass(ProductThreshold{dim}, 1 << dim, d);
  }

  /// Explicit finite class. Without a declared dimension, floor(log2 |G|) is used
  /// (the Natarajan dimension of a finite class never exceeds it).
  static FunctionClass finite(std::vector<StateFunction> members, std::optional<int> natarajan_dim = {}) {
    if (members.empty()) throw InputError("finite class must have at least one member");
    const int s = members.front().num_states();
    for (const auto& g : members)
      if (g.num_states() != s) throw InputError("all members of a finite class must share the state count");
    const int d = natarajan_dim.value_or(static_cast<int>(std::floor(std::log2(static_cast<double>(members.size())))));
    if (d < 0) throw InputError("Natarajan dimension must be >= 0");
    return FunctionClass(FiniteSet{std::move(members)}, s, d);
  }

  int num_states() const { return s_; }
  int natarajan_dim() const { return d_; }
  const Family& family() const { return family_; }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Threshold1D>) return "threshold1d";
          else if constexpr (std::is_same_v<T, ProductThreshold>) return "product-threshold";
          else return "finite";
        },
        family_);
  }

 private:
  FunctionClass(Family f, int s, int d) : family_(std::move(f)), s_(s), d_(d) {}

  Family family_;
  int s_;
  int d_;
};

/// Row-major l x n matrix of states.
struct LabelMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<State> data;

  std::span<const State> row(std::size_t k) const { return {data.data() + k * cols, cols}; }
  State at(std::size_t k, std::size_t i) const { return data[k * cols + i]; }
};

/// A minimal set of representatives realizing every labeling of the sample by the class.
class EmpiricalCovering {
 public:
  EmpiricalCovering(std::vector<StateFunction> reps, SideInfoSample sample, LabelMatrix labels, int num_states)
      : reps_(std::move(reps)), sample_(std::move(sample)), labels_(std::move(labels)), s_(num_states) {
    for (std::size_t k = 0; k < labels_.rows; ++k) {
      auto r = labels_.row(k);
      index_.emplace(std::vector<State>(r.begin(), r.end()), k);
    }
  }

  std::size_t size() const { return reps_.size(); }
  int num_states() const { return s_; }
  const std::vector<StateFunction>& representatives() const { return reps_; }
  const StateFunction& representative(std::size_t k) const { return reps_.at(k); }
  const SideInfoSample& sample() const { return sample_; }
  const LabelMatrix& label_matrix() const { return labels_; }

  /// Index of the representative whose labeling of the sample equals `labels`.
  std::optional<std::size_t> find(std::span<const State> labels) const {
    auto it = index_.find(std::vector<State>(labels.begin(), labels.end()));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Representative agreeing with g on the covering's sample.
  std::optional<std::size_t> match(const StateFunction& g) const { return find(g.apply(sample_)); }

 private:
  std::vector<StateFunction> reps_;
  SideInfoSample sample_;
  LabelMatrix labels_;
  int s_;
  std::map<std::vector<State>, std::size_t> index_;
};

namespace detail {

/// Distinct values of one coordinate, ascending.
inline std::vector<double> distinct_coordinate(const SideInfoSample& sample, std::size_t c) {
  std::vector<double> v(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) v[i] = sample.point(i)[c];
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Thresholds realizing every labeling 1{z >= a} of the values: each distinct value
/// (smallest value achieving its labeling) plus a sentinel just above the maximum
/// for the all-below labeling.
inline std::vector<double> threshold_candidates(const std::vector<double>& distinct) {
  if (distinct.empty()) return {1.0};
  std::vector<double> a = distinct;
  a.push_back(std::nextafter(distinct.back(), std::numeric_limits<double>::infinity()));
  return a;
}

inline void check_natarajan(std::size_t ell, std::size_t n, int s, int d) {
  if (n == 0) return;
  const double log_bound = d * std::log(static_cast<double>(s) * s * static_cast<double>(n));
  if (std::log(static_cast<double>(ell)) > log_bound + 1e-9)
    throw InputError("covering size " + std::to_string(ell) + " exceeds (S^2 n)^d; declared Natarajan dimension " +
                     std::to_string(d) + " is too small");
}

}  // namespace detail

inline LabelMatrix labelings(std::span<const StateFunction> reps, const SideInfoSample& points) {
  LabelMatrix out;
  out.rows = reps.size();
  out.cols = points.size();
  out.data.resize(out.rows * out.cols);
  for (std::size_t k = 0; k < reps.size(); ++k)
    for (std::size_t i = 0; i < points.size(); ++i) out.data[k * out.cols + i] = reps[k](points.point(i));
  return out;
}

/// Entry (k, i) = g~_k(z_i) for fresh points.
inline LabelMatrix labelings(const EmpiricalCovering& covering, const SideInfoSample& new_points) {
  if (!new_points.empty() && !covering.sample().empty() && new_points.dim() != covering.sample().dim())
    throw InputError("side information dimension mismatch");
  return labelings(std::span<const StateFunction>(covering.representatives()), new_points);
}

/// Minimal empirical covering of `cls` with respect to `sample`.
inline EmpiricalCovering minimal_covering(const FunctionClass& cls, const SideInfoSample& sample) {
  std::vector<StateFunction> reps;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, FunctionClass::Threshold1D>) {
          if (!sample.empty() && f.coordinate >= sample.dim())
            throw InputError("threshold coordinate outside the side information dimension");
          auto values = sample.empty() ? std::vector<double>{} : detail::distinct_coordinate(sample, f.coordinate);
          for (double a : detail::threshold_candidates(values)) reps.push_back(StateFunction::threshold(a, f.coordinate));
        } else if constexpr (std::is_same_v<T, FunctionClass::ProductThreshold>) {
          if (!sample.empty() && sample.dim() != f.dim)
            throw InputError("product threshold dimension differs from the side information dimension");
          std::vector<std::vector<double>> cand(f.dim);
          double total = 1.0;
          for (std::size_t c = 0; c < f.dim; ++c) {
            cand[c] = detail::threshold_candidates(sample.empty() ? std::vector<double>{}
                                                                  : detail::distinct_coordinate(sample, c));
            total *= static_cast<double>(cand[c].size());
          }
          if (total > 5e6) throw InputError("product threshold covering too large (" + std::to_string(total) + " rows)");
          // Distinct per-coordinate labelings give distinct joint rows, so the product is already minimal.
          std::vector<std::size_t> idx(f.dim, 0);
          for (;;) {
            std::vector<double> a(f.dim);
            for (std::size_t c = 0; c < f.dim; ++c) a[c] = cand[c][idx[c]];
            reps.push_back(StateFunction::product_threshold(std::move(a)));
            std::size_t c = 0;
            while (c < f.dim && ++idx[c] == cand[c].size()) idx[c++] = 0;
            if (c == f.dim) break;
          }
        } else {
          std::map<std::vector<State>, bool> seen;
          for (const auto& g : f.members) {
            if (!sample.empty() && g.min_dim() > sample.dim())
              throw InputError("finite-class member needs more side information coordinates");
            if (seen.emplace(g.apply(sample), true).second) reps.push_back(g);
          }
        }
      },
      cls.family());
  auto labels = labelings(std::span<const StateFunction>(reps), sample);
  detail::check_natarajan(reps.size(), sample.size(), cls.num_states(), cls.natarajan_dim());
  return EmpiricalCovering(std::move(reps), sample, std::move(labels), cls.num_states());
}

}  // namespace upsi
