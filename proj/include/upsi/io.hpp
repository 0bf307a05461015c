#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "upsi/covering.hpp"
#include "upsi/data.hpp"
#include "upsi/empirical.hpp"
#include "upsi/montecarlo.hpp"

namespace upsi {

using Json = nlohmann::ordered_json;

/// Non-finite doubles become null.
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

namespace detail {

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(std::string("bad value for '") + key + "'");
  }
}

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing '") + key + "'");
  return field<T>(j, key, T{});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// State functions and classes
// ---------------------------------------------------------------------------

inline Json to_json(const StateFunction& g) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, StateFunction::Threshold>)
          return {{"kind", "threshold"}, {"coordinate", p.coordinate}, {"a", num(p.a)}};
        else if constexpr (std::is_same_v<T, StateFunction::ProductThreshold>) {
          Json a = Json::array();
          for (double v : p.a) a.push_back(num(v));
          return {{"kind", "product_threshold"}, {"a", a}};
        } else if constexpr (std::is_same_v<T, StateFunction::Bins>)
          return {{"kind", "bins"}, {"coordinate", p.coordinate}, {"cuts", p.cuts}};
        else
          return {{"kind", "constant"}};
      },
      g.params());
}

inline StateFunction state_function_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("state function must be a JSON object");
  const auto kind = detail::required<std::string>(j, "kind");
  if (kind == "threshold")
    return StateFunction::threshold(detail::required<double>(j, "a"), detail::field<std::size_t>(j, "coordinate", 0));
  if (kind == "product_threshold") return StateFunction::product_threshold(detail::required<std::vector<double>>(j, "a"));
  if (kind == "bins")
    return StateFunction::bins(detail::required<std::vector<double>>(j, "cuts"),
                               detail::field<std::size_t>(j, "coordinate", 0));
  if (kind == "constant") return StateFunction::constant();
  throw InputError("unknown state function kind '" + kind + "'");
}

/// `threshold1d`, `product-threshold` (dimension taken from the side information), or
/// `finite:<file>` with {"functions": [...], "natarajan_dim": d}.
inline FunctionClass parse_class_spec(const std::string& spec, std::size_t side_dim = 1) {
  if (spec == "threshold1d") return FunctionClass::threshold1d();
  if (spec == "product-threshold") {
    // the joint covering can reach (n+1)^D rows before deduplication
    if (side_dim > 4) throw InputError("product-threshold supports side information of dimension <= 4");
    return FunctionClass::product_threshold(side_dim);
  }
  if (spec.rfind("finite:", 0) == 0) {
    const Json j = read_json_file(spec.substr(7));
    if (!j.contains("functions") || !j["functions"].is_array()) throw InputError("finite class file needs 'functions'");
    std::vector<StateFunction> members;
    for (const auto& f : j["functions"]) members.push_back(state_function_from_json(f));
    std::optional<int> d;
    if (j.contains("natarajan_dim")) d = detail::required<int>(j, "natarajan_dim");
    return FunctionClass::finite(std::move(members), d);
  }
  throw InputError("unknown class '" + spec + "' (expected threshold1d, product-threshold or finite:<file>)");
}

inline Json to_json(const FunctionClass& cls) {
  Json j = {{"family", cls.name()}, {"num_states", cls.num_states()}, {"natarajan_dim", cls.natarajan_dim()}};
  if (const auto* t = std::get_if<FunctionClass::Threshold1D>(&cls.family())) j["coordinate"] = t->coordinate;
  if (const auto* p = std::get_if<FunctionClass::ProductThreshold>(&cls.family())) j["dim"] = p->dim;
  if (const auto* f = std::get_if<FunctionClass::FiniteSet>(&cls.family())) j["size"] = f->members.size();
  return j;
}

inline Json to_json(const EmpiricalCovering& cover) {
  Json reps = Json::array();
  for (const auto& g : cover.representatives()) reps.push_back(to_json(g));
  return {{"ell", cover.size()}, {"n", cover.sample().size()}, {"representatives", reps}};
}

// ---------------------------------------------------------------------------
// Process specs
// ---------------------------------------------------------------------------

inline ProcessSpec process_spec_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("process spec must be a JSON object");
  ProcessSpec spec;
  spec.seed = detail::field<std::uint64_t>(j, "seed", 0);
  const auto type = detail::required<std::string>(j, "type");
  if (type == "iid_discrete") {
    spec.model = IidDiscrete{detail::required<std::vector<std::vector<double>>>(j, "support"),
                             detail::required<std::vector<double>>(j, "probs")};
  } else if (type == "iid_lognormal") {
    spec.model = IidLognormal{detail::required<std::vector<double>>(j, "mu"),
                              detail::required<std::vector<double>>(j, "sigma")};
  } else if (type == "markov") {
    MarkovMarket p;
    p.m = detail::field(j, "m", p.m);
    p.order = detail::field(j, "order", p.order);
    p.ball_weight = detail::field(j, "ball_weight", p.ball_weight);
    p.radius = detail::field(j, "radius", p.radius);
    p.center = detail::field(j, "center", p.center);
    p.reversion = detail::field(j, "reversion", p.reversion);
    p.lo = detail::field(j, "lo", p.lo);
    p.hi = detail::field(j, "hi", p.hi);
    p.burn_in = detail::field(j, "burn_in", p.burn_in);
    spec.model = p;
  } else if (type == "ar_mixing") {
    ArMixing p;
    p.m = detail::field(j, "m", p.m);
    p.phi = detail::field(j, "phi", p.phi);
    p.sigma = detail::field(j, "sigma", p.sigma);
    p.signal = detail::field(j, "signal", p.signal);
    p.vol = detail::field(j, "vol", p.vol);
    p.grid = detail::field(j, "grid", p.grid);
    p.burn_in = detail::field(j, "burn_in", p.burn_in);
    spec.model = p;
  } else if (type == "regime") {
    RegimeSwitching p;
    p.up = detail::field(j, "up", p.up);
    p.down = detail::field(j, "down", p.down);
    p.favored = detail::field(j, "favored", p.favored);
    p.disfavored = detail::field(j, "disfavored", p.disfavored);
    p.p = detail::field(j, "p", p.p);
    spec.model = p;
  } else {
    throw InputError("unknown process type '" + type + "'");
  }
  validate(spec);
  return spec;
}

inline Json to_json(const ProcessSpec& spec) {
  Json j = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IidDiscrete>)
          return {{"type", "iid_discrete"}, {"support", p.support}, {"probs", p.probs}};
        else if constexpr (std::is_same_v<T, IidLognormal>)
          return {{"type", "iid_lognormal"}, {"mu", p.mu}, {"sigma", p.sigma}};
        else if constexpr (std::is_same_v<T, MarkovMarket>)
          return {{"type", "markov"},         {"m", p.m},           {"order", p.order},         {"ball_weight", p.ball_weight},
                  {"radius", p.radius},       {"center", p.center}, {"reversion", p.reversion}, {"lo", p.lo},
                  {"hi", p.hi},               {"burn_in", p.burn_in}};
        else if constexpr (std::is_same_v<T, ArMixing>)
          return {{"type", "ar_mixing"}, {"m", p.m},         {"phi", p.phi},   {"sigma", p.sigma},
                  {"signal", p.signal},  {"vol", p.vol},     {"grid", p.grid}, {"burn_in", p.burn_in}};
        else
          return {{"type", "regime"},         {"up", p.up},   {"down", p.down}, {"favored", p.favored},
                  {"disfavored", p.disfavored}, {"p", p.p}};
      },
      spec.model);
  j["seed"] = spec.seed;
  return j;
}

/// Disagreement oracle implied by a process's stationary side-information marginal, when known.
inline std::optional<DisagreementOracle> oracle_for(const ProcessSpec& spec) {
  if (const auto* ar = std::get_if<ArMixing>(&spec.model)) return ar1_oracle(ar->phi, ar->sigma, ar->grid);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline Json to_json(const McResult& r) {
  Json epochs = Json::array();
  for (const auto& e : r.per_epoch)
    epochs.push_back({{"j", e.epoch}, {"ell", e.ell}, {"log_factor", num(e.log_factor)}, {"stderr", num(e.stderr_log)}});
  return {{"log_wealth", num(r.log_wealth)},
          {"growth_factor", num(std::exp(r.log_wealth))},
          {"stderr", num(r.stderr_log)},
          {"degenerate_draws", r.degenerate},
          {"per_epoch", epochs}};
}

inline Json to_json(const RhoReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n}, {"trials", row.trials}, {"mean_rho", num(row.mean_rho)}, {"stderr", num(row.stderr_rho)}});
  return {{"rows", rows}, {"fitted_exponent", r.fitted_exponent ? num(*r.fitted_exponent) : Json(nullptr)}};
}

}  // namespace upsi
