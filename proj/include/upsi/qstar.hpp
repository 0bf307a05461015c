#pragma once

#include <bit>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/prob.hpp"

namespace upsi {

// ---------------------------------------------------------------------------
// Epoch schedule. Steps are 1-based: step 1 is epoch 0 (uniform prediction);
// epoch j >= 1 covers steps 2^{j-1}+1 .. 2^j and builds its covering from z^{2^{j-1}}.
// A horizon that is not a power of two truncates the final epoch.
// ---------------------------------------------------------------------------

struct EpochSchedule {
  static int epoch_of(std::size_t step) {
    if (step == 0) throw InputError("steps are 1-based");
    if (step == 1) return 0;
    return static_cast<int>(std::bit_width(step - 1));
  }
  /// Length of the prefix the epoch's covering is built from (= first step - 1).
  static std::size_t prefix_length(int epoch) { return epoch == 0 ? 0 : std::size_t{1} << (epoch - 1); }
  static std::size_t first_step(int epoch) { return epoch == 0 ? 1 : prefix_length(epoch) + 1; }
  static std::size_t last_step(int epoch) { return epoch == 0 ? 1 : std::size_t{1} << epoch; }
  static int num_epochs(std::size_t n) { return n == 0 ? 0 : epoch_of(n) + 1; }
};

/// One epoch of a fixed side-information path: covering from the prefix and the
/// representatives' labels over the epoch's (possibly truncated) segment.
struct EpochSegment {
  int epoch = 0;
  std::size_t first = 0;  ///< 0-based day index, inclusive
  std::size_t last = 0;   ///< 0-based day index, exclusive
  std::optional<EmpiricalCovering> covering;  ///< absent for epoch 0
  LabelMatrix labels;                          ///< l x (last - first)

  std::size_t length() const { return last - first; }
  std::size_t ell() const { return covering ? covering->size() : 1; }
};

inline std::vector<EpochSegment> plan_epochs(const SideInfoSample& z, const FunctionClass& cls) {
  std::vector<EpochSegment> plan;
  const std::size_t n = z.size();
  for (int j = 0; j < EpochSchedule::num_epochs(n); ++j) {
    EpochSegment seg;
    seg.epoch = j;
    seg.first = EpochSchedule::first_step(j) - 1;
    seg.last = std::min(EpochSchedule::last_step(j), n);
    if (j > 0) {
      seg.covering = minimal_covering(cls, z.prefix(EpochSchedule::prefix_length(j)));
      seg.labels = labelings(*seg.covering, z.slice(seg.first, seg.last));
    } else {
      seg.labels = LabelMatrix{1, 1, {1}};
    }
    plan.push_back(std::move(seg));
  }
  return plan;
}

/// Per-epoch mixture state: covering from the epoch prefix, one state-wise count
/// table and accumulated log-probability per representative.
class CoveringMixtureState {
 public:
  CoveringMixtureState(int epoch, EmpiricalCovering covering, int m)
      : epoch_(epoch), covering_(std::move(covering)), m_(m),
        counts_(covering_.size(), CountTable(m, covering_.num_states())),
        log_probs_(covering_.size(), 0.0) {}

  int epoch() const { return epoch_; }
  const EmpiricalCovering& covering() const { return covering_; }
  std::size_t ell() const { return covering_.size(); }
  /// 1-based step the next prediction is for.
  std::size_t next_step() const { return EpochSchedule::first_step(epoch_) + taken_; }
  bool exhausted() const { return next_step() > EpochSchedule::last_step(epoch_); }
  std::span<const double> representative_log_probs() const { return log_probs_; }
  const CountTable& counts(std::size_t k) const { return counts_.at(k); }

  /// log (1/l) sum_k q_{L;S}(segment so far || g~_k(segment)).
  double log_prob() const { return log_mean_exp(log_probs_); }

  /// Mixture predictive distribution over [m] given the next point z.
  std::vector<double> conditional(std::span<const double> z) const {
    if (exhausted()) throw StateError("epoch " + std::to_string(epoch_) + " is exhausted; roll the covering first");
    const double norm = log_sum_exp(log_probs_);
    std::vector<double> p(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      const double weight = std::exp(log_probs_[k] - norm);
      const State s = covering_.representative(k)(z);
      for (Symbol y = 1; y <= m_; ++y) p[static_cast<std::size_t>(y - 1)] += weight * statewise_laplace_conditional(counts_[k], s, y);
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return p;
  }

  void update(std::span<const double> z, Symbol y) {
    if (exhausted()) throw StateError("epoch " + std::to_string(epoch_) + " is exhausted; roll the covering first");
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      const State s = covering_.representative(k)(z);
      log_probs_[k] += std::log(statewise_laplace_conditional(counts_[k], s, y));
      counts_[k].add(s, y);
    }
    ++taken_;
  }

 private:
  int epoch_;
  EmpiricalCovering covering_;
  int m_;
  std::vector<CountTable> counts_;
  std::vector<double> log_probs_;
  std::size_t taken_ = 0;
};

/// Fresh mixture state for the epoch starting right after `prefix_z`.
/// The prefix length must be 2^{j-1} for some epoch j >= 1.
inline CoveringMixtureState roll_epoch(const SideInfoSample& prefix_z, const FunctionClass& cls, int m) {
  const std::size_t len = prefix_z.size();
  if (len == 0 || !std::has_single_bit(len))
    throw StateError("roll_epoch called mid-epoch: prefix length " + std::to_string(len) + " is not a power of two");
  const int epoch = static_cast<int>(std::bit_width(len));
  return CoveringMixtureState(epoch, minimal_covering(cls, prefix_z), m);
}

/// q*(. | y^{i-1}; z^i) at 1-based step i = z_history.size().
/// `state` must be the mixture for the epoch containing i (ignored at i = 1).
inline std::vector<double> qstar_conditional(std::span<const Symbol> y_history, const SideInfoSample& z_history,
                                             const CoveringMixtureState* state, int m) {
  const std::size_t i = z_history.size();
  if (i == 0) throw InputError("side information must include the current point");
  if (y_history.size() + 1 != i) throw InputError("history must hold i-1 symbols and i side-information points");
  if (i == 1) return std::vector<double>(static_cast<std::size_t>(m), 1.0 / m);
  if (state == nullptr) throw StateError("no mixture state for step " + std::to_string(i));
  if (state->epoch() != EpochSchedule::epoch_of(i) || state->next_step() != i)
    throw StateError("mixture state does not correspond to step " + std::to_string(i));
  return state->conditional(z_history.point(i - 1));
}

/// Sequential q*_G predictor for one stream. Rolls its covering at every epoch start.
class QStarPredictor {
 public:
  QStarPredictor(FunctionClass cls, int m) : cls_(std::move(cls)), m_(m) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
  }

  /// 1-based step of the next prediction.
  std::size_t step() const { return ys_.size() + 1; }
  double log_prob() const { return log_prob_; }
  const CoveringMixtureState* mixture() const { return state_ ? &*state_ : nullptr; }

  /// Predictive distribution for the next symbol given its side information.
  std::vector<double> predict(std::span<const double> z) {
    if (pending_) throw StateError("predict called twice without observe");
    zs_.push_back(z);
    pending_ = true;
    const std::size_t i = zs_.size();
    if (i > 1 && EpochSchedule::first_step(EpochSchedule::epoch_of(i)) == i)
      state_ = roll_epoch(zs_.prefix(i - 1), cls_, m_);
    return qstar_conditional(ys_, zs_, mixture(), m_);
  }

  void observe(Symbol y) {
    if (!pending_) throw StateError("observe called before predict");
    if (y < 1 || y > m_) throw InputError("symbol outside [1, m]");
    const std::size_t i = zs_.size();
    if (i == 1) {
      log_prob_ += -std::log(static_cast<double>(m_));
    } else {
      const double before = state_->log_prob();
      state_->update(zs_.point(i - 1), y);
      log_prob_ += state_->log_prob() - before;
    }
    ys_.push_back(y);
    pending_ = false;
  }

 private:
  FunctionClass cls_;
  int m_;
  SideInfoSample zs_;
  std::vector<Symbol> ys_;
  std::optional<CoveringMixtureState> state_;
  double log_prob_ = 0.0;
  bool pending_ = false;
};

/// Batch log q*_G over prefixes of a fixed side-information path (epoch plan cached).
class QStarAssignment {
 public:
  QStarAssignment(int m, const SideInfoSample& z, const FunctionClass& cls)
      : m_(m), s_(cls.num_states()), plan_(plan_epochs(z, cls)), horizon_(z.size()) {
    if (m < 2) throw InputError("alphabet size must be >= 2");
  }

  int alphabet_size() const { return m_; }
  std::size_t horizon() const { return horizon_; }
  const std::vector<EpochSegment>& plan() const { return plan_; }

  double log_prob(std::span<const Symbol> y) const {
    if (y.size() > horizon_) throw InputError("prefix longer than the side information");
    double acc = 0.0;
    std::vector<double> rep_lp;
    for (const auto& seg : plan_) {
      if (seg.first >= y.size()) break;
      const std::size_t last = std::min(seg.last, y.size());
      if (seg.epoch == 0) {
        acc -= std::log(static_cast<double>(m_));
        continue;
      }
      rep_lp.assign(seg.labels.rows, 0.0);
      for (std::size_t k = 0; k < seg.labels.rows; ++k) {
        CountTable t(m_, s_);
        for (std::size_t i = seg.first; i < last; ++i) t.add(seg.labels.at(k, i - seg.first), y[i]);
        rep_lp[k] = statewise_log_prob(t);
      }
      acc += log_mean_exp(rep_lp);
    }
    return acc;
  }

 private:
  int m_;
  int s_;
  std::vector<EpochSegment> plan_;
  std::size_t horizon_;
};

/// log q*_G(y^n || z^n).
inline double qstar_log_prob(const SymbolSequence& y, const SideInfoSample& z, const FunctionClass& cls) {
  if (y.size() != z.size()) throw InputError("symbol and side information sequences differ in length");
  if (y.size() == 0) return 0.0;
  return QStarAssignment(y.alphabet, z, cls).log_prob(y.symbols);
}

}  // namespace upsi
