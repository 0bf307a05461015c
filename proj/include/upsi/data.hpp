#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "upsi/covering.hpp"
#include "upsi/montecarlo.hpp"
#include "upsi/types.hpp"

namespace upsi {

// ---------------------------------------------------------------------------
// Price tables
// ---------------------------------------------------------------------------

/// Date-ordered adjusted prices; prices[t][i] is ticker i on dates[t].
struct PriceTable {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  std::vector<std::vector<double>> prices;

  std::size_t rows() const { return prices.size(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// YYYY-MM-DD with a real calendar day.
inline bool valid_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int y = std::stoi(s.substr(0, 4)), mo = std::stoi(s.substr(5, 2)), d = std::stoi(s.substr(8, 2));
  if (mo < 1 || mo > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return d <= kDays[mo - 1] + (mo == 2 && leap ? 1 : 0);
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Reads `date,TICKER1,TICKER2,...` CSV. Blank lines and `#` comment lines are skipped;
/// errors cite the line.
inline PriceTable ingest_csv(std::istream& in, const std::string& source = "<stream>") {
  PriceTable table;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw InputError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty() || line[0] == '#') continue;
    auto cells = detail::split_csv_line(line);
    if (!header) {
      if (cells.size() < 2) fail("header needs a date column and at least one ticker");
      if (cells[0] != "date") fail("first header column must be 'date'");
      table.tickers.assign(cells.begin() + 1, cells.end());
      for (const auto& t : table.tickers)
        if (t.empty()) fail("empty ticker name");
      header = true;
      continue;
    }
    if (cells.size() != table.tickers.size() + 1)
      fail("expected " + std::to_string(table.tickers.size() + 1) + " fields, got " + std::to_string(cells.size()));
    if (!detail::valid_date(cells[0])) fail("unparsable date '" + cells[0] + "'");
    if (!table.dates.empty() && !(table.dates.back() < cells[0]))
      fail("date " + cells[0] + " is not after " + table.dates.back());
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto v = detail::parse_double(cells[i]);
      if (!v) fail("unparsable price '" + cells[i] + "'");
      if (!(*v > 0.0) || !std::isfinite(*v)) fail("price must be positive, got '" + cells[i] + "'");
      row.push_back(*v);
    }
    table.dates.push_back(cells[0]);
    table.prices.push_back(std::move(row));
  }
  if (!header) throw InputError(source + ": empty CSV");
  return table;
}

inline PriceTable ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ingest_csv(in, path);
}

/// x_{t,i} = price_{t,i} / price_{t-1,i}; n = rows - 1.
inline MarketSequence to_price_relatives(const PriceTable& table) {
  if (table.rows() < 2) throw InputError("price table needs at least 2 rows");
  const std::size_t m = table.tickers.size();
  std::vector<double> flat;
  flat.reserve((table.rows() - 1) * m);
  for (std::size_t t = 1; t < table.rows(); ++t)
    for (std::size_t i = 0; i < m; ++i) flat.push_back(table.prices[t][i] / table.prices[t - 1][i]);
  return MarketSequence(m, std::move(flat));
}

/// Inverse of to_price_relatives: unit prices on 2000-01-01, then one calendar day per row.
inline PriceTable prices_from_relatives(const MarketSequence& market, std::vector<std::string> tickers) {
  const auto m = static_cast<std::size_t>(market.stocks());
  if (tickers.size() != m) throw InputError("ticker count differs from the market width");
  PriceTable table;
  table.tickers = std::move(tickers);
  std::vector<double> p(m, 1.0);
  int y = 2000, mo = 1, d = 1;
  auto date = [&] {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, mo, d);
    return std::string(buf);
  };
  auto advance = [&] {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (++d > kDays[mo - 1] + (mo == 2 && leap ? 1 : 0)) {
      d = 1;
      if (++mo > 12) {
        mo = 1;
        ++y;
      }
    }
  };
  table.dates.push_back(date());
  table.prices.push_back(p);
  for (std::size_t t = 0; t < market.days(); ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      p[i] *= market.row(t)[i];
      if (!(p[i] > 0.0)) throw InputError("zero price relative cannot be written as a price table");
    }
    advance();
    table.dates.push_back(date());
    table.prices.push_back(p);
  }
  return table;
}

inline void write_price_csv(std::ostream& out, const PriceTable& table) {
  out << "date";
  for (const auto& t : table.tickers) out << ',' << t;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << table.dates[r];
    for (double v : table.prices[r]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic processes
// ---------------------------------------------------------------------------

/// Discrete i.i.d. market: x_t = support[k] with probability probs[k].
struct IidDiscrete {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;
};

/// x_{t,j} = exp(mu_j + sigma_j * N(0,1)), independent across j and t.
struct IidLognormal {
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// k-th order Markov market on [lo, hi]^m. With probability ball_weight the next row is
/// uniform on the sup-norm ball of `radius` around the previous row; otherwise it is uniform
/// on the same ball around a mean-reverting drift target
/// center + reversion * (mean of the last k rows - center). Points leaving [lo, hi] are
/// reflected back, so the kernel density is bounded below on the ball around the last row.
struct MarkovMarket {
  int m = 2;
  int order = 1;
  double ball_weight = 0.3;
  double radius = 0.05;
  double center = 1.0;
  double reversion = 0.5;
  double lo = 0.8;
  double hi = 1.25;
  std::size_t burn_in = 1000;
};

/// Latent AR(1) V_t = phi V_{t-1} + sigma e_t, rounded to `grid` when grid > 0 (the side
/// information). Stock 1 has log-relative signal * sign(V_t) + vol e, the others vol e.
struct ArMixing {
  int m = 2;
  double phi = 0.5;
  double sigma = 1.0;
  double signal = 0.02;
  double vol = 0.02;
  double grid = 0.0;
  std::size_t burn_in = 1000;
};

/// Two stocks driven by i.i.d. fair coins c_t. Stock 1 returns favored (or disfavored when
/// c_t = 0) times up/down depending on c_{t+1}; stock 2 returns the opposite of the first
/// factor. The previous day's first relative therefore reveals today's coin.
struct RegimeSwitching {
  double up = 1.2;
  double down = 0.8;
  double favored = 1.05;
  double disfavored = 0.95;
  double p = 0.5;
};

using ProcessModel = std::variant<IidDiscrete, IidLognormal, MarkovMarket, ArMixing, RegimeSwitching>;

struct ProcessSpec {
  ProcessModel model;
  std::uint64_t seed = 0;
};

struct GeneratedData {
  MarketSequence market;
  std::optional<SideInfoSample> side;  ///< native side information when the process has one
};

namespace detail {

inline void validate(const IidDiscrete& p) {
  if (p.support.empty() || p.support.size() != p.probs.size())
    throw InputError("iid_discrete needs matching nonempty support and probs");
  double total = 0.0;
  for (double v : p.probs) {
    if (!(v >= 0.0)) throw InputError("iid_discrete probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("iid_discrete probabilities must sum to 1");
  MarketSequence::from_rows(p.support);  // validates the atoms
}

inline void validate(const IidLognormal& p) {
  if (p.mu.empty() || p.mu.size() != p.sigma.size()) throw InputError("iid_lognormal needs matching mu and sigma");
  for (double s : p.sigma)
    if (!(s >= 0.0)) throw InputError("iid_lognormal sigma must be nonnegative");
}

inline void validate(const MarkovMarket& p) {
  if (p.m < 1 || p.order < 1) throw InputError("markov needs m >= 1 and order >= 1");
  if (!(p.ball_weight > 0.0 && p.ball_weight <= 1.0)) throw InputError("markov ball_weight must be in (0, 1]");
  if (!(p.lo > 0.0 && p.lo < p.hi)) throw InputError("markov needs 0 < lo < hi");
  if (!(p.radius > 0.0 && p.radius <= (p.hi - p.lo) / 2)) throw InputError("markov radius must be in (0, (hi-lo)/2]");
  if (!(p.center >= p.lo && p.center <= p.hi)) throw InputError("markov center must lie in [lo, hi]");
  if (!(p.reversion >= 0.0 && p.reversion < 1.0)) throw InputError("markov reversion must be in [0, 1)");
}

inline void validate(const ArMixing& p) {
  if (p.m < 1) throw InputError("ar_mixing needs m >= 1");
  if (!(p.phi > -1.0 && p.phi < 1.0)) throw InputError("AR coefficient must lie in (-1, 1)");
  if (!(p.sigma > 0.0) || !(p.vol >= 0.0) || !(p.grid >= 0.0)) throw InputError("ar_mixing scales must be positive");
}

inline void validate(const RegimeSwitching& p) {
  if (!(p.up > 0 && p.down > 0 && p.favored > 0 && p.disfavored > 0)) throw InputError("regime factors must be positive");
  if (!(p.p >= 0.0 && p.p <= 1.0)) throw InputError("regime probability must be in [0, 1]");
}

inline double reflect(double v, double lo, double hi) {
  const double w = hi - lo;
  double u = std::fmod(v - lo, 2 * w);
  if (u < 0) u += 2 * w;
  return lo + (u <= w ? u : 2 * w - u);
}

}  // namespace detail

inline void validate(const ProcessSpec& spec) {
  std::visit([](const auto& p) { detail::validate(p); }, spec.model);
}

/// Seed-deterministic sample path of n days.
inline GeneratedData generate(const ProcessSpec& spec, std::size_t n) {
  if (n < 1) throw InputError("horizon must be >= 1");
  validate(spec);
  Rng rng = make_stream(spec.seed, 0x6e6);
  std::normal_distribution<double> normal(0.0, 1.0);

  return std::visit(
      [&](const auto& p) -> GeneratedData {
        using T = std::decay_t<decltype(p)>;
        std::vector<double> flat;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          std::discrete_distribution<std::size_t> pick(p.probs.begin(), p.probs.end());
          for (std::size_t t = 0; t < n; ++t) {
            const auto& row = p.support[pick(rng)];
            flat.insert(flat.end(), row.begin(), row.end());
          }
          return {MarketSequence(p.support.front().size(), std::move(flat)), std::nullopt};
        } else if constexpr (std::is_same_v<T, IidLognormal>) {
          for (std::size_t t = 0; t < n; ++t)
            for (std::size_t j = 0; j < p.mu.size(); ++j) flat.push_back(std::exp(p.mu[j] + p.sigma[j] * normal(rng)));
          return {MarketSequence(p.mu.size(), std::move(flat)), std::nullopt};
        } else if constexpr (std::is_same_v<T, MarkovMarket>) {
          const auto m = static_cast<std::size_t>(p.m);
          const auto k = static_cast<std::size_t>(p.order);
          std::vector<std::vector<double>> hist(k, std::vector<double>(m, p.center));
          std::size_t head = 0;  // hist[head] is the most recent row
          std::vector<double> next(m);
          for (std::size_t t = 0; t < p.burn_in + n; ++t) {
            const bool ball = uniform01(rng) < p.ball_weight;
            for (std::size_t j = 0; j < m; ++j) {
              double base = hist[head][j];
              if (!ball) {
                double mean = 0.0;
                for (const auto& r : hist) mean += r[j];
                mean /= static_cast<double>(k);
                base = p.center + p.reversion * (mean - p.center);
              }
              next[j] = detail::reflect(base + p.radius * (2.0 * uniform01(rng) - 1.0), p.lo, p.hi);
            }
            head = (head + k - 1) % k;
            hist[head] = next;
            if (t >= p.burn_in) flat.insert(flat.end(), next.begin(), next.end());
          }
          return {MarketSequence(m, std::move(flat)), std::nullopt};
        } else if constexpr (std::is_same_v<T, ArMixing>) {
          double v = 0.0;
          for (std::size_t t = 0; t < p.burn_in; ++t) v = p.phi * v + p.sigma * normal(rng);
          std::vector<double> z;
          z.reserve(n);
          for (std::size_t t = 0; t < n; ++t) {
            v = p.phi * v + p.sigma * normal(rng);
            const double obs = p.grid > 0.0 ? p.grid * std::round(v / p.grid) : v;
            z.push_back(obs);
            const double drift = obs >= 0.0 ? p.signal : -p.signal;
            for (int j = 0; j < p.m; ++j) flat.push_back(std::exp((j == 0 ? drift : 0.0) + p.vol * normal(rng)));
          }
          return {MarketSequence(static_cast<std::size_t>(p.m), std::move(flat)), SideInfoSample::scalar(std::move(z))};
        } else {
          std::vector<int> coin(n + 1);
          for (auto& c : coin) c = uniform01(rng) < p.p ? 1 : 0;
          for (std::size_t t = 0; t < n; ++t) {
            const double lead = coin[t] ? p.favored : p.disfavored;
            flat.push_back(lead * (coin[t + 1] ? p.up : p.down));
            flat.push_back(coin[t] ? p.disfavored : p.favored);
          }
          return {MarketSequence(2, std::move(flat)), std::nullopt};
        }
      },
      spec.model);
}

// ---------------------------------------------------------------------------
// Side information
// ---------------------------------------------------------------------------

struct SideInfoMode {
  enum class Kind { PrevFirst, History };
  Kind kind = Kind::PrevFirst;
  std::size_t k = 1;         ///< history length for History
  double padding = 1.0;      ///< pseudo-history value before day 1

  static SideInfoMode prev_first(double pad = 1.0) { return {Kind::PrevFirst, 1, pad}; }
  static SideInfoMode history(std::size_t k, double pad = 1.0) {
    if (k < 1) throw InputError("history length must be >= 1");
    return {Kind::History, k, pad};
  }
};

/// z_t from x^{t-1} only. PrevFirst: z_t = x_{t-1,1}. History(k): rows t-k..t-1 concatenated
/// (oldest first), D = m k. Days before the first are padded.
inline SideInfoSample extract_side_info(const MarketSequence& market, const SideInfoMode& mode) {
  const std::size_t n = market.days();
  const auto m = static_cast<std::size_t>(market.stocks());
  if (mode.kind == SideInfoMode::Kind::PrevFirst) {
    std::vector<double> z(n);
    for (std::size_t t = 0; t < n; ++t) z[t] = t == 0 ? mode.padding : market.row(t - 1)[0];
    return SideInfoSample::scalar(std::move(z));
  }
  if (mode.k < 1) throw InputError("history length must be >= 1");
  const std::size_t dim = m * mode.k;
  std::vector<double> z;
  z.reserve(n * dim);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t back = mode.k; back >= 1; --back) {
      if (t >= back) {
        const auto r = market.row(t - back);
        z.insert(z.end(), r.begin(), r.end());
      } else {
        z.insert(z.end(), m, mode.padding);
      }
    }
  }
  return SideInfoSample(dim, std::move(z));
}

}  // namespace upsi
