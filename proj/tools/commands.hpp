#pragma once

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "upsi/upsi.hpp"

namespace upsi::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a subcommand reads from the command line.
struct Options {
  std::string subcommand;
  std::vector<std::string> argv;  ///< arguments after the program name, for replay
  std::string input;
  std::string class_spec = "threshold1d";
  std::string side = "prev-first";
  std::string process;
  std::string values;
  std::string method = "auto";
  std::string out;
  std::string side_out;
  std::string format = "json";
  std::vector<std::size_t> horizons;
  std::size_t horizon = 256;
  std::size_t samples = 10000;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  bool single_covering = false;
};

/// A rendered result: JSON document or CSV table, both carrying the manifest.
struct Report {
  Json manifest;
  Json body;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

inline std::string iso_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      t = static_cast<std::time_t>(std::stoll(sde));
    } catch (const std::exception&) {
      throw InputError("SOURCE_DATE_EPOCH is not an integer");
    }
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json make_manifest(const Options& o, Json config) {
  return {{"subcommand", o.subcommand}, {"config", std::move(config)}, {"argv", o.argv},
          {"version", kVersion},        {"timestamp", iso_timestamp()}};
}

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline Json parse_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return Json::parse(arg);
    } catch (const Json::parse_error& e) {
      throw InputError(std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

inline std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& cell : detail::split_csv_line(s)) {
    const auto v = detail::parse_double(cell);
    if (!v) throw InputError("cannot parse value '" + cell + "'");
    out.push_back(*v);
  }
  return out;
}

/// Side information from CSV: header row, then one row of D numbers per day.
inline SideInfoSample read_side_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  SideInfoSample z;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<double> p;
    for (const auto& c : detail::split_csv_line(line)) {
      const auto v = detail::parse_double(c);
      if (!v) throw InputError(path + ":" + std::to_string(lineno) + ": cannot parse '" + c + "'");
      p.push_back(*v);
    }
    try {
      z.push_back(p);
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return z;
}

inline void write_side_csv(std::ostream& out, const SideInfoSample& z) {
  for (std::size_t c = 0; c < z.dim(); ++c) out << (c ? "," : "") << "z" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto p = z.point(i);
    for (std::size_t c = 0; c < p.size(); ++c) out << (c ? "," : "") << fmt(p[c]);
    out << '\n';
  }
}

/// prev-first | history:<k> | file:<path> | native | auto (native when the process has it,
/// prev-first otherwise).
inline SideInfoSample side_info(const std::string& mode, const MarketSequence& market,
                                const std::optional<SideInfoSample>& native = std::nullopt) {
  if (mode == "prev-first") return extract_side_info(market, SideInfoMode::prev_first());
  if (mode.rfind("history:", 0) == 0) {
    const auto k = detail::parse_double(mode.substr(8));
    if (!k || *k < 1 || *k != std::floor(*k)) throw InputError("history length must be a positive integer");
    return extract_side_info(market, SideInfoMode::history(static_cast<std::size_t>(*k)));
  }
  if (mode.rfind("file:", 0) == 0) {
    auto z = read_side_csv(mode.substr(5));
    if (z.size() != market.days())
      throw InputError("side information file has " + std::to_string(z.size()) + " rows, market has " +
                       std::to_string(market.days()) + " days");
    return z;
  }
  if (mode == "auto") return native ? *native : extract_side_info(market, SideInfoMode::prev_first());
  if (mode == "native") {
    if (!native) throw InputError("process has no native side information; use prev-first or history:<k>");
    return *native;
  }
  throw InputError("unknown side mode '" + mode + "'");
}

inline MarketSequence load_market(const std::string& path) {
  if (path.empty()) throw InputError("--input is required");
  return to_price_relatives(ingest_csv(path));
}

inline void warn_dimension(int m) {
  if (m > 5)
    std::cerr << "warning: m = " << m << " stocks; Monte Carlo error grows like N^(-1/m) per state, "
              << "so N = 1e4 may be far too small\n";
}

inline bool exact_feasible(int m, std::size_t n) {
  return count_sequences(m, n) <= kBruteForceLimit;
}

/// auto: exact when m^n fits the enumeration limit; exact: fail (exit 3) otherwise; mc: always sample.
inline bool use_exact(const std::string& method, int m, std::size_t n) {
  if (method == "mc") return false;
  if (method == "exact") {
    require_brute_force(m, n);
    return true;
  }
  if (method == "auto") return exact_feasible(m, n);
  throw InputError("unknown method '" + method + "' (auto, exact or mc)");
}

inline Json growth(double log_wealth) {
  return {{"log_wealth", num(log_wealth)}, {"growth_factor", num(std::exp(log_wealth))}};
}

inline Json theta_json(const SimplexVector& v) { return Json(std::vector<double>(v.weights().begin(), v.weights().end())); }

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

inline Report cmd_backtest(const Options& o) {
  const auto market = load_market(o.input);
  const int m = market.stocks();
  const std::size_t n = market.days();
  warn_dimension(m);
  const auto z = side_info(o.side, market);
  const auto cls = parse_class_spec(o.class_spec, z.dim());
  const bool exact = use_exact(o.method, m, n);
  McConfig mc{o.samples, o.seed, !o.single_covering};

  Report r;
  r.manifest = make_manifest(o, {{"input", o.input},
                                 {"class", o.class_spec},
                                 {"side", o.side},
                                 {"samples", o.samples},
                                 {"seed", o.seed},
                                 {"method", o.method},
                                 {"single_covering", o.single_covering}});
  Json& b = r.body;
  b["n"] = n;
  b["m"] = m;
  b["class"] = to_json(cls);

  const double uniform = crp_wealth(SimplexVector::uniform(m), market);
  b["uniform_crp"] = growth(uniform);

  const auto best = best_crp(market);
  b["best_crp"] = growth(best.log_wealth);
  b["best_crp"]["theta"] = theta_json(best.theta);

  const auto cover = minimal_covering(cls, z);
  Json reps = Json::array();
  double best_state = kNegInf;
  std::optional<StateCRP> prev;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    auto row = cover.label_matrix().row(k);
    auto sol = best_state_crp(market, StateSequence({row.begin(), row.end()}, cls.num_states()), {},
                              prev ? &*prev : nullptr);
    Json thetas = Json::array();
    for (const auto& t : sol.crp.thetas) thetas.push_back(theta_json(t));
    Json e = growth(sol.log_wealth);
    e["representative"] = to_json(cover.representative(k));
    e["thetas"] = thetas;
    reps.push_back(std::move(e));
    best_state = std::max(best_state, sol.log_wealth);
    prev = std::move(sol.crp);
  }
  b["best_state_crp"] = growth(best_state);
  b["best_state_crp"]["ell"] = cover.size();
  b["best_state_crp"]["per_representative"] = reps;

  Json up, qs;
  if (exact) {
    up = growth(laplace_wealth_dp(market));
    up["method"] = "exact";
    up["stderr"] = 0.0;
    double lq = 0.0;
    Json epochs = Json::array();
    if (o.single_covering) {
      std::vector<double> per(cover.size());
      for (std::size_t k = 0; k < cover.size(); ++k) {
        auto row = cover.label_matrix().row(k);
        per[k] = statewise_wealth_dp(market, StateSequence({row.begin(), row.end()}, cls.num_states()));
      }
      lq = log_mean_exp(per);
      epochs.push_back({{"j", 0}, {"ell", cover.size()}, {"log_factor", num(lq)}});
    } else {
      for (const auto& f : qstar_wealth_dp_epochs(market, z, cls)) {
        lq += f.log_factor;
        epochs.push_back({{"j", f.epoch}, {"ell", f.ell}, {"log_factor", num(f.log_factor)}});
      }
    }
    qs = growth(lq);
    qs["method"] = "exact";
    qs["stderr"] = 0.0;
    qs["per_epoch"] = epochs;
  } else {
    up = to_json(mc_wealth_up(market, mc));
    up["method"] = "monte_carlo";
    qs = to_json(mc_wealth_qstar(market, z, cls, mc));
    qs["method"] = "monte_carlo";
  }
  b["universal"] = up;
  b["qstar"] = qs;

  r.csv_header = {"strategy", "log_wealth", "growth_factor", "stderr", "method"};
  auto add = [&](const std::string& name, const Json& j, const std::string& method) {
    const double lw = j["log_wealth"].is_null() ? kNegInf : j["log_wealth"].get<double>();
    const double se = j.contains("stderr") && !j["stderr"].is_null() ? j["stderr"].get<double>() : 0.0;
    r.csv_rows.push_back({name, fmt(lw), fmt(std::exp(lw)), fmt(se), method});
  };
  add("uniform_crp", b["uniform_crp"], "exact");
  add("best_crp", b["best_crp"], "solver");
  add("best_state_crp", b["best_state_crp"], "solver");
  for (std::size_t k = 0; k < reps.size(); ++k) add("state_crp[" + std::to_string(k) + "]", reps[k], "solver");
  add("universal", up, up["method"]);
  add("qstar", qs, qs["method"]);
  return r;
}

inline Report cmd_simulate(const Options& o) {
  const auto market = load_market(o.input);
  warn_dimension(market.stocks());
  const auto z = side_info(o.side, market);
  const auto cls = parse_class_spec(o.class_spec, z.dim());
  McConfig mc{o.samples, o.seed, !o.single_covering};
  Report r;
  r.manifest = make_manifest(o, {{"input", o.input},
                                 {"class", o.class_spec},
                                 {"side", o.side},
                                 {"samples", o.samples},
                                 {"seed", o.seed},
                                 {"single_covering", o.single_covering}});
  const auto up = mc_wealth_up(market, mc);
  const auto qs = mc_wealth_qstar(market, z, cls, mc);
  r.body = {{"n", market.days()}, {"m", market.stocks()}, {"universal", to_json(up)}, {"qstar", to_json(qs)}};
  r.csv_header = {"estimator", "epoch", "ell", "log_factor", "stderr"};
  for (const auto& [name, res] : {std::pair{"universal", &up}, std::pair{"qstar", &qs}}) {
    for (const auto& e : res->per_epoch)
      r.csv_rows.push_back({name, std::to_string(e.epoch), std::to_string(e.ell), fmt(e.log_factor), fmt(e.stderr_log)});
    r.csv_rows.push_back({name, "total", "", fmt(res->log_wealth), fmt(res->stderr_log)});
  }
  return r;
}

inline Report cmd_cover(const Options& o) {
  SideInfoSample z;
  if (!o.values.empty()) {
    z = SideInfoSample::scalar(parse_values(o.values));
  } else {
    z = side_info(o.side, load_market(o.input));
  }
  const auto cls = parse_class_spec(o.class_spec, z.dim());
  const auto cover = minimal_covering(cls, z);
  Report r;
  r.manifest = make_manifest(o, {{"input", o.input}, {"values", o.values}, {"class", o.class_spec}, {"side", o.side}});
  const double log_bound = cls.natarajan_dim() * std::log(static_cast<double>(cls.num_states()) * cls.num_states() *
                                                          static_cast<double>(std::max<std::size_t>(z.size(), 1)));
  r.body = {{"class", to_json(cls)}, {"covering", to_json(cover)},
            {"natarajan_bound_holds", std::log(static_cast<double>(cover.size())) <= log_bound + 1e-12}};
  r.csv_header = {"k", "representative"};
  for (std::size_t k = 0; k < cover.size(); ++k)
    r.csv_rows.push_back({std::to_string(k), to_json(cover.representative(k)).dump()});
  return r;
}

/// Side-only processes for rho: iid_uniform, constant {value}, or ar_mixing.
inline std::pair<SideProcess, DisagreementOracle> side_process_from_json(const Json& j) {
  const auto type = detail::field<std::string>(j, "type", "iid_uniform");
  if (type == "iid_uniform") return {iid_uniform_process(), uniform01_oracle()};
  if (type == "constant") {
    const double c = detail::field<double>(j, "value", 1.0);
    return {constant_process(c), point_mass_oracle(c)};
  }
  if (type == "ar_mixing") {
    const auto spec = process_spec_from_json(j);
    const auto& ar = std::get<ArMixing>(spec.model);
    SideProcess proc = [spec](std::size_t n, std::uint64_t seed) {
      auto s = spec;
      s.seed = seed;
      return *generate(s, n).side;
    };
    return {proc, ar1_oracle(ar.phi, ar.sigma, ar.grid)};
  }
  throw InputError("rho needs a side process with a known marginal (iid_uniform, constant or ar_mixing), got '" +
                   type + "'");
}

inline std::vector<std::size_t> default_horizons(int lo, int hi) {
  std::vector<std::size_t> h;
  for (int k = lo; k <= hi; ++k) h.push_back(std::size_t{1} << k);
  return h;
}

inline Report cmd_rho(const Options& o) {
  const Json pj = o.process.empty() ? Json{{"type", "iid_uniform"}} : parse_json_arg(o.process);
  const auto [proc, oracle] = side_process_from_json(pj);
  const auto cls = parse_class_spec(o.class_spec, 1);
  const auto horizons = o.horizons.empty() ? default_horizons(6, 12) : o.horizons;
  const auto rep = rho_growth_report(proc, cls, oracle, horizons, o.trials, o.seed);
  Report r;
  r.manifest = make_manifest(o, {{"process", pj}, {"class", o.class_spec}, {"horizons", horizons},
                                 {"trials", o.trials}, {"seed", o.seed}});
  r.body = to_json(rep);
  r.csv_header = {"n", "trials", "mean_rho", "stderr", "fitted_exponent"};
  const std::string expo = rep.fitted_exponent ? fmt(*rep.fitted_exponent) : "";
  for (const auto& row : rep.rows)
    r.csv_rows.push_back({std::to_string(row.n), std::to_string(row.trials), fmt(row.mean_rho), fmt(row.stderr_rho), expo});
  return r;
}

inline Report cmd_regret_sweep(const Options& o) {
  if (o.process.empty()) throw InputError("--process is required");
  const Json pj = parse_json_arg(o.process);
  const auto base = process_spec_from_json(pj);
  const auto horizons = o.horizons.empty() ? default_horizons(4, 10) : o.horizons;
  if (o.trials < 1) throw InputError("trials must be >= 1");
  Report r;
  r.manifest = make_manifest(o, {{"process", pj}, {"class", o.class_spec}, {"side", o.side},
                                 {"horizons", horizons}, {"trials", o.trials}, {"seed", o.seed}});
  Json rows = Json::array();
  std::vector<double> ns, per_n;
  bool all_bounded = true;
  r.csv_header = {"n", "trials", "regret_prob", "regret_port", "bound", "regret_prob_per_n", "regret_port_per_n"};
  for (std::size_t n : horizons) {
    if (n < 1) throw InputError("horizons must be >= 1");
    double rp = 0, rq = 0, bd = 0;
    for (std::size_t t = 0; t < o.trials; ++t) {
      auto spec = base;
      spec.seed = splitmix64(o.seed ^ n) + t;
      const auto data = generate(spec, n);
      const auto z = side_info(o.side, data.market, data.side);
      const auto cls = parse_class_spec(o.class_spec, z.dim());
      const auto inst = regret_instance(data.market, z, cls);
      rp += inst.regret_prob;
      rq += inst.regret_port;
      bd += inst.bound;
      all_bounded = all_bounded && inst.regret_prob <= inst.bound && inst.regret_port <= inst.bound;
    }
    const double k = static_cast<double>(o.trials), nn = static_cast<double>(n);
    rp /= k;
    rq /= k;
    bd /= k;
    rows.push_back({{"n", n},
                    {"trials", o.trials},
                    {"regret_prob", num(rp)},
                    {"regret_port", num(rq)},
                    {"bound", num(bd)},
                    {"regret_prob_per_n", num(rp / nn)},
                    {"regret_port_per_n", num(rq / nn)}});
    r.csv_rows.push_back({std::to_string(n), std::to_string(o.trials), fmt(rp), fmt(rq), fmt(bd), fmt(rp / nn), fmt(rq / nn)});
    ns.push_back(nn);
    per_n.push_back(rq / nn);
  }
  r.body = {{"units", "nats"},
            {"rows", rows},
            {"spearman_regret_port_per_n_vs_n", num(spearman(ns, per_n))},
            {"bound_holds_every_trial", all_bounded}};
  return r;
}

/// Writes a synthetic price CSV (and optionally the native side information).
inline Report cmd_generate(const Options& o) {
  if (o.process.empty()) throw InputError("--process is required");
  const Json pj = parse_json_arg(o.process);
  auto spec = process_spec_from_json(pj);
  if (!pj.contains("seed")) spec.seed = o.seed;
  const auto data = generate(spec, o.horizon);
  std::vector<std::string> tickers;
  for (int j = 1; j <= data.market.stocks(); ++j) tickers.push_back("S" + std::to_string(j));
  Report r;
  r.manifest = make_manifest(o, {{"process", to_json(spec)}, {"horizon", o.horizon}});
  const auto table = prices_from_relatives(data.market, tickers);
  r.csv_header = {"date"};
  r.csv_header.insert(r.csv_header.end(), tickers.begin(), tickers.end());
  for (std::size_t t = 0; t < table.rows(); ++t) {
    std::vector<std::string> row{table.dates[t]};
    char buf[32];
    for (double v : table.prices[t]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      row.emplace_back(buf);
    }
    r.csv_rows.push_back(std::move(row));
  }
  if (!o.side_out.empty()) {
    if (!data.side) throw InputError("process has no native side information for --side-out");
    std::ostringstream s;
    write_side_csv(s, *data.side);
    std::ofstream f(o.side_out);
    if (!f) throw InputError("cannot write " + o.side_out);
    f << s.str();
  }
  r.body = {{"n", data.market.days()}, {"m", data.market.stocks()}, {"has_side_information", data.side.has_value()}};
  return r;
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

inline std::string render(const Report& r, const std::string& format) {
  if (format == "json") {
    Json j = {{"manifest", r.manifest}};
    for (auto it = r.body.begin(); it != r.body.end(); ++it) j[it.key()] = it.value();
    return j.dump(2) + "\n";
  }
  if (format == "csv") {
    std::ostringstream s;
    s << "# manifest: " << r.manifest.dump() << '\n';
    for (std::size_t c = 0; c < r.csv_header.size(); ++c) s << (c ? "," : "") << r.csv_header[c];
    s << '\n';
    for (const auto& row : r.csv_rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        const bool quote = row[c].find_first_of(",\"") != std::string::npos;
        if (c) s << ',';
        if (quote) {
          s << '"';
          for (char ch : row[c]) s << (ch == '"' ? "\"\"" : std::string(1, ch));
          s << '"';
        } else {
          s << row[c];
        }
      }
      s << '\n';
    }
    return s.str();
  }
  throw InputError("unknown format '" + format + "' (json or csv)");
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_atomically(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw InputError("cannot write " + tmp.string());
    f << text;
    if (!f) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

/// argv recorded in an output's manifest (JSON, or CSV with a `# manifest:` line).
inline std::vector<std::string> manifest_argv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string first;
  std::getline(in, first);
  Json doc;
  try {
    if (first.rfind("# manifest: ", 0) == 0) {
      doc = Json::parse(first.substr(12));
    } else {
      std::stringstream rest;
      rest << first << '\n' << in.rdbuf();
      doc = Json::parse(rest.str()).at("manifest");
    }
    return doc.at("argv").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw InputError(path + ": no readable manifest (" + e.what() + ")");
  }
}

}  // namespace upsi::cli
