#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using upsi::cli::Options;

int run(const std::vector<std::string>& args, int depth = 0) {
  CLI::App app{"Universal portfolios with side information"};
  app.require_subcommand(1);
  Options o;
  o.argv = args;
  std::string replay_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (stdout when omitted)");
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_market = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Price CSV: date,TICKER1,...");
    sub->add_option("--class", o.class_spec, "threshold1d | product-threshold | finite:<file>");
    sub->add_option("--side", o.side, "prev-first | history:<k> | file:<path>");
  };

  auto* backtest = app.add_subcommand("backtest", "Wealth report for a price series");
  add_market(backtest);
  add_common(backtest);
  backtest->add_option("--samples", o.samples, "Monte Carlo draws per representative")->check(CLI::PositiveNumber);
  backtest->add_option("--seed", o.seed);
  backtest->add_option("--method", o.method, "auto | exact | mc")->check(CLI::IsMember({"auto", "exact", "mc"}));
  backtest->add_flag("--single-covering", o.single_covering, "Mix over one covering of the whole path");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo wealth estimates with standard errors");
  add_market(simulate);
  add_common(simulate);
  simulate->add_option("--samples", o.samples)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed);
  simulate->add_flag("--single-covering", o.single_covering);

  auto* cover = app.add_subcommand("cover", "Empirical covering of a side-information sample");
  add_market(cover);
  add_common(cover);
  cover->add_option("--values", o.values, "Comma-separated scalar sample instead of --input");

  auto* rho = app.add_subcommand("rho", "Growth of the centered disagreement supremum");
  add_common(rho);
  rho->add_option("--process", o.process, "JSON file or inline JSON: iid_uniform, constant, ar_mixing");
  rho->add_option("--class", o.class_spec);
  rho->add_option("--horizons", o.horizons)->delimiter(',');
  rho->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  rho->add_option("--seed", o.seed);

  auto* sweep = app.add_subcommand("regret-sweep", "Realized regrets and the pathwise bound across horizons");
  add_common(sweep);
  sweep->add_option("--process", o.process, "JSON file or inline JSON process spec")->required();
  sweep->add_option("--class", o.class_spec);
  sweep->add_option("--side", o.side, "auto | prev-first | history:<k> | native");
  sweep->add_option("--horizons", o.horizons)->delimiter(',');
  sweep->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", o.seed);

  auto* gen = app.add_subcommand("generate", "Synthetic price CSV from a process spec");
  gen->add_option("--process", o.process, "JSON file or inline JSON process spec")->required();
  gen->add_option("--horizon", o.horizon, "Number of price relatives")->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "Used when the spec has no seed");
  gen->add_option("--out", o.out);
  gen->add_option("--side-out", o.side_out, "Also write native side information here");

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in an output's manifest");
  replay->add_option("manifest", replay_path, "Output file written by a previous run")->required();
  replay->add_option("--out", o.out, "Output file (stdout when omitted)");

  app.set_version_flag("--version", upsi::cli::kVersion);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      if (depth > 0) throw upsi::InputError("a replayed manifest cannot itself be a replay");
      auto recorded = upsi::cli::manifest_argv(replay_path);
      // The recorded --out is dropped; the replay writes where it is told to.
      std::vector<std::string> next;
      for (std::size_t i = 0; i < recorded.size(); ++i) {
        if (recorded[i] == "--out") {
          ++i;
          continue;
        }
        if (recorded[i].rfind("--out=", 0) == 0) continue;
        next.push_back(recorded[i]);
      }
      if (!o.out.empty()) {
        next.push_back("--out");
        next.push_back(o.out);
      }
      return run(next, depth + 1);
    }

    // The recorded argv omits --out so a replay does not overwrite the original.
    for (std::size_t i = 0; i < o.argv.size(); ++i) {
      if (o.argv[i] == "--out") {
        o.argv.erase(o.argv.begin() + static_cast<std::ptrdiff_t>(i), o.argv.begin() + static_cast<std::ptrdiff_t>(i + 2));
        break;
      }
    }

    upsi::cli::Report report;
    std::string format = o.format;
    if (backtest->parsed()) {
      o.subcommand = "backtest";
      report = upsi::cli::cmd_backtest(o);
    } else if (simulate->parsed()) {
      o.subcommand = "simulate";
      report = upsi::cli::cmd_simulate(o);
    } else if (cover->parsed()) {
      o.subcommand = "cover";
      report = upsi::cli::cmd_cover(o);
    } else if (rho->parsed()) {
      o.subcommand = "rho";
      report = upsi::cli::cmd_rho(o);
    } else if (sweep->parsed()) {
      o.subcommand = "regret-sweep";
      if (!sweep->count("--side")) o.side = "auto";
      report = upsi::cli::cmd_regret_sweep(o);
    } else if (gen->parsed()) {
      o.subcommand = "generate";
      report = upsi::cli::cmd_generate(o);
      format = "csv";
    }
    const std::string text = upsi::cli::render(report, format);
    if (o.out.empty()) {
      std::cout << text;
    } else {
      upsi::cli::write_atomically(o.out, text);
    }
    return 0;
  } catch (const upsi::InfeasibleExactError& e) {
    std::cerr << "error: " << e.what() << "\nhint: rerun with --method mc for a Monte Carlo estimate\n";
    return 3;
  } catch (const upsi::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
