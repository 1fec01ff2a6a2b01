// Command-line front end: simulation, pricing, training, model hedging and
// declarative experiments. Results go to stdout as JSON; failures go to
// stderr as {"error": {...}} with a nonzero exit code.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "roughhedge/error.hpp"
#include "roughhedge/experiment.hpp"
#include "roughhedge/hurst.hpp"
#include "roughhedge/modelhedge.hpp"
#include "roughhedge/path_io.hpp"
#include "roughhedge/simulation.hpp"
#include "roughhedge/stats.hpp"
#include "roughhedge/train.hpp"

using namespace roughhedge;
using nlohmann::json;

namespace {

// Market flags shared by the single-run subcommands. Flags override the
// optional YAML file.
struct MarketFlags {
  std::string config;
  std::optional<std::string> model;
  std::optional<double> hurst, nu, rho, xi0, s0, steps_per_day;
  std::optional<int> days;
  std::optional<std::uint64_t> seed;
  bool antithetic = false;
  std::optional<std::string> fv_scheme;

  void add(CLI::App* app) {
    app->add_option("--config", config, "YAML file with a market section");
    app->add_option("--model", model, "rbergomi, heston or blackscholes");
    app->add_option("--hurst", hurst, "Hurst exponent H");
    app->add_option("--nu", nu, "vol of vol");
    app->add_option("--rho", rho, "spot/vol correlation");
    app->add_option("--xi0", xi0, "initial forward variance");
    app->add_option("--s0", s0, "initial stock price");
    app->add_option("--steps-per-day", steps_per_day, "rebalancing steps per day");
    app->add_option("--days", days, "trading days to maturity");
    app->add_option("--seed", seed, "random seed");
    app->add_flag("--antithetic", antithetic, "antithetic path pairs");
    app->add_option("--fv-scheme", fv_scheme, "exact or euler");
  }

  MarketConfig build() const {
    MarketConfig cfg = config.empty() ? MarketConfig{} : load_market_config(config);
    if (model) cfg.model = parse_model_kind(*model);
    if (hurst) cfg.hurst = *hurst;
    if (nu) cfg.nu = *nu;
    if (rho) cfg.rho = *rho;
    if (xi0) cfg.xi0 = *xi0;
    if (s0) cfg.s0 = *s0;
    if (steps_per_day) cfg.steps_per_day = *steps_per_day;
    if (days) {
      cfg.trading_days = *days;
      cfg.maturity = *days / kDaysPerYear;
    }
    if (seed) cfg.seed = *seed;
    if (antithetic) cfg.antithetic = true;
    if (fv_scheme) {
      if (*fv_scheme == "exact") {
        cfg.fv_scheme = ForwardVarianceScheme::Exact;
      } else if (*fv_scheme == "euler") {
        cfg.fv_scheme = ForwardVarianceScheme::Euler;
      } else {
        fail(ErrorKind::InvalidArgument, "--fv-scheme must be exact or euler");
      }
    }
    cfg.validate();
    return cfg;
  }
};

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<int> parse_lags(const std::string& spec) {
  if (spec.empty()) return default_hurst_lags();
  std::vector<int> lags;
  const auto dots = spec.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(spec.substr(0, dots));
      const int hi = std::stoi(spec.substr(dots + 2));
      for (auto l = lo; l <= hi; ++l) lags.push_back(l);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) lags.push_back(std::stoi(item));
    }
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidArgument, "bad --lags '" + spec + "' (use 1..20 or 1,2,4)");
  }
  return lags;
}

json estimate_json(const HurstEstimate& e) {
  return {{"h_hat", e.h_hat},
          {"stderr", e.std_error},
          {"r_squared", e.r_squared},
          {"lags", e.lags}};
}

PathSet make_paths(const MarketConfig& cfg, std::size_t n, std::uint64_t seed,
                   const Payoff& payoff) {
  MarketConfig m = cfg;
  m.seed = seed;
  auto ps = simulate(m, n);
  attach_payoff(ps, payoff);
  return ps;
}

int run(int argc, char** argv) {
  CLI::App app{"Deep and model hedging under rough volatility"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // simulate
  MarketFlags sim_flags;
  std::size_t sim_paths = 1000;
  std::string sim_out, sim_csv, sampler = "auto";
  int ou_terms = 40;
  auto* sim = app.add_subcommand("simulate", "simulate a path batch");
  sim_flags.add(sim);
  sim->add_option("--paths", sim_paths, "number of paths");
  sim->add_option("--out", sim_out, "binary path cache to write");
  sim->add_option("--csv", sim_csv, "CSV export (path_id,step,t,S,V,FV)");
  sim->add_option("--sampler", sampler, "auto, hybrid, exact or ou");
  sim->add_option("--ou-terms", ou_terms, "OU factors for --sampler ou");

  // estimate-hurst
  std::string hurst_input, hurst_field = "logV", lags_spec, synthetic;
  std::size_t hurst_path = 0, synth_steps = 10000;
  double q = 2.0, synth_h = 0.1;
  auto* est = app.add_subcommand("estimate-hurst", "estimate the Hurst exponent");
  est->add_option("--input", hurst_input, "path cache from `simulate --out`");
  est->add_option("--field", hurst_field, "logV, V, S or FV");
  est->add_option("--path", hurst_path, "path index in the cache");
  est->add_option("--lags", lags_spec, "lag set, e.g. 1..20");
  est->add_option("-q", q, "moment order");
  est->add_option("--synthetic", synthetic, "hybrid, ou or brownian: estimate on a fresh path");
  est->add_option("--steps", synth_steps, "length of the synthetic path");
  est->add_option("--hurst", synth_h, "target H of the synthetic path");

  // price
  MarketFlags price_flags;
  std::size_t price_paths = 100000;
  double strike = 100.0;
  auto* price = app.add_subcommand("price", "Monte-Carlo call price");
  price_flags.add(price);
  price->add_option("--paths", price_paths, "number of paths");
  price->add_option("--strike", strike, "call strike");

  // train
  MarketFlags train_flags;
  std::size_t train_paths = 10000, val_paths = 2000, test_paths = 10000, premium_paths = 100000;
  std::string arch_name = "frnn", train_out = "train_out";
  TrainConfig tc;
  double train_strike = 100.0;
  auto* tr = app.add_subcommand("train", "train a deep hedge and evaluate it");
  train_flags.add(tr);
  tr->add_option("--arch", arch_name, "semi or frnn");
  tr->add_option("--paths", train_paths, "training paths");
  tr->add_option("--val-paths", val_paths, "validation paths");
  tr->add_option("--test-paths", test_paths, "test paths");
  tr->add_option("--price-paths", premium_paths, "paths for the premium");
  tr->add_option("--epochs", tc.epochs, "epochs");
  tr->add_option("--batch", tc.batch_size, "batch size");
  tr->add_option("--lr", tc.learning_rate, "Adam learning rate");
  tr->add_option("--init-seed", tc.seed, "initialization seed");
  tr->add_option("--strike", train_strike, "call strike");
  tr->add_option("--out", train_out, "output directory");

  // model-hedge
  MarketFlags mh_flags;
  ModelHedgeConfig mc;
  mc.outer_paths = 100;
  std::size_t mh_price_paths = 100000;
  double mh_strike = 100.0;
  std::string mh_out = "model_hedge_out";
  auto* mh = app.add_subcommand("model-hedge", "nested Monte-Carlo model hedge");
  mh_flags.add(mh);
  mh->add_option("--paths", mc.outer_paths, "outer paths");
  mh->add_option("--inner", mc.inner_paths, "inner paths per (path, step)");
  mh->add_option("--stock-eps", mc.stock_eps, "stock bump as a fraction of S0");
  mh->add_option("--bump-eps", mc.bump_eps, "relative forward-variance bump");
  mh->add_option("--price-paths", mh_price_paths, "paths for the premium");
  mh->add_option("--strike", mh_strike, "call strike");
  mh->add_option("--out", mh_out, "output directory");

  // experiment
  auto* exp = app.add_subcommand("experiment", "declarative experiments");
  exp->require_subcommand(1);
  std::string spec_file, exp_out;
  bool full_scale = false;
  std::optional<int> exp_epochs;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> exp_paths;
  auto* exp_run = exp->add_subcommand("run", "run an experiment spec");
  exp_run->add_option("spec", spec_file, "YAML experiment spec")->required();
  exp_run->add_option("--out", exp_out, "override the output directory");
  exp_run->add_option("--epochs", exp_epochs, "override epochs");
  exp_run->add_option("--seed", exp_seed, "override the market seed");
  exp_run->add_option("--paths", exp_paths, "override train and test path counts");
  exp_run->add_flag("--full-scale", full_scale, "full path counts and epochs (hours)");
  std::vector<std::string> manifests;
  std::string report_out;
  auto* exp_report = exp->add_subcommand("report", "compare experiment manifests");
  exp_report->add_option("manifests", manifests, "manifest.json files")->required();
  exp_report->add_option("--out", report_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }

  if (*sim) {
    const auto cfg = sim_flags.build();
    PathSet ps;
    if (sampler == "auto") {
      ps = simulate(cfg, sim_paths);
    } else if (sampler == "hybrid") {
      ps = simulate_rbergomi(cfg, sim_paths);
    } else if (sampler == "exact") {
      ps = simulate_volterra_exact(cfg, sim_paths);
    } else if (sampler == "ou") {
      ps = simulate_ou_approx(cfg, OUApproxConfig::geometric(cfg.hurst, ou_terms), sim_paths);
    } else {
      fail(ErrorKind::InvalidArgument, "--sampler must be auto, hybrid, exact or ou");
    }
    if (!sim_out.empty()) write_paths(ps, sim_out);
    if (!sim_csv.empty()) write_paths_csv(ps, sim_csv);
    std::vector<double> st(ps.n_paths);
    for (std::size_t p = 0; p < ps.n_paths; ++p) st[p] = ps.s(p, ps.n_steps);
    const auto m = stats::mean_estimate(st);
    print({{"n_paths", ps.n_paths},
           {"n_steps", ps.n_steps},
           {"source", to_string(ps.source)},
           {"market", to_json(cfg)},
           {"mean_terminal_spot", m.mean},
           {"mean_terminal_spot_stderr", m.std_error},
           {"out", sim_out},
           {"csv", sim_csv}});
    return 0;
  }

  if (*est) {
    const auto lags = parse_lags(lags_spec);
    std::vector<double> series;
    if (!synthetic.empty()) {
      const double dt = 1.0 / kDaysPerYear;
      if (synthetic == "hybrid") {
        series = hybrid_volterra_path(synth_h, synth_steps, dt, 1);
      } else if (synthetic == "ou") {
        series = ou_fbm_path(OUApproxConfig::geometric(synth_h, 40), synth_steps, dt, 1);
      } else if (synthetic == "brownian") {
        series = hybrid_volterra_path(0.5, synth_steps, dt, 1);
      } else {
        fail(ErrorKind::InvalidArgument, "--synthetic must be hybrid, ou or brownian");
      }
    } else {
      require(!hurst_input.empty(), ErrorKind::InvalidArgument,
              "give --input <path cache> or --synthetic");
      const auto ps = read_paths(hurst_input);
      require(hurst_path < ps.n_paths, ErrorKind::InvalidArgument, "--path out of range");
      std::span<const double> row;
      bool take_log = false;
      if (hurst_field == "logV" || hurst_field == "V") {
        row = ps.variance_path(hurst_path);
        take_log = hurst_field == "logV";
      } else if (hurst_field == "S") {
        row = ps.stock_path(hurst_path);
      } else if (hurst_field == "FV") {
        row = ps.fv_path(hurst_path);
      } else {
        fail(ErrorKind::InvalidArgument, "--field must be logV, V, S or FV");
      }
      for (double v : row) series.push_back(take_log ? std::log(v) : v);
    }
    print(estimate_json(estimate_hurst(series, q, lags)));
    return 0;
  }

  if (*price) {
    const auto cfg = price_flags.build();
    const auto ps = simulate(cfg, price_paths);
    const auto est_price = mc_price(ps, Payoff{Payoff::Kind::VanillaCall, strike});
    print({{"p0", est_price.price},
           {"stderr", est_price.std_error},
           {"n_paths", price_paths},
           {"market", to_json(cfg)}});
    return 0;
  }

  if (*tr) {
    const auto cfg = train_flags.build();
    const Payoff payoff{Payoff::Kind::VanillaCall, train_strike};
    const auto seeds = role_seeds(cfg.seed);
    const auto p0 = mc_price(make_paths(cfg, premium_paths, seeds.price, payoff), payoff);
    const auto train_set = make_paths(cfg, train_paths, seeds.train, payoff);
    const auto val_set = make_paths(cfg, val_paths, seeds.val, payoff);
    const auto test_set = make_paths(cfg, test_paths, seeds.test, payoff);
    auto policy = make_policy(parse_architecture(arch_name), cfg);
    const auto result = train(policy, train_set, val_set, p0.price, tc);
    const auto report = pnl(test_set, policy_forward(policy, test_set), p0.price);
    std::filesystem::create_directories(train_out);
    write_report(report, train_out, arch_name);
    write_loss_curve_csv(result, std::filesystem::path(train_out) / (arch_name + "_curve.csv"));
    save_policy(policy, std::filesystem::path(train_out) / (arch_name + ".policy"));
    auto j = to_json(report);
    j["p0"] = p0.price;
    j["best_epoch"] = result.best_epoch;
    j["best_val_loss"] = result.best_val_loss;
    j["out"] = train_out;
    print(j);
    return 0;
  }

  if (*mh) {
    const auto cfg = mh_flags.build();
    const Payoff payoff{Payoff::Kind::VanillaCall, mh_strike};
    const auto seeds = role_seeds(cfg.seed);
    const auto p0 = mc_price(make_paths(cfg, mh_price_paths, seeds.price, payoff), payoff);
    const auto outer = make_paths(cfg, mc.outer_paths, seeds.test, payoff);
    const auto res = model_hedge_run(outer, payoff, cfg, mc, p0.price);
    write_report(res.report, mh_out, "model_hedge");
    write_hedge_weights_csv(outer, res, std::filesystem::path(mh_out) / "model_hedge_weights.csv");
    if (res.band_violations > 0) {
      std::cerr << "warning: " << res.band_violations
                << " stock deltas outside [-0.1, 1.1]\n";
    }
    auto j = to_json(res.report);
    j["p0"] = p0.price;
    j["band_violations"] = res.band_violations;
    j["out"] = mh_out;
    print(j);
    return 0;
  }

  if (*exp_run) {
    auto spec = load_experiment_spec(spec_file);
    if (full_scale) spec.apply_full_scale();
    if (!exp_out.empty()) spec.outputs = exp_out;
    if (exp_epochs) spec.train.epochs = *exp_epochs;
    if (exp_seed) spec.market.seed = *exp_seed;
    if (exp_paths) spec.paths.train = spec.paths.test = *exp_paths;
    const auto manifest = run_experiment(spec);
    json summary;
    summary["name"] = manifest["name"];
    summary["outputs"] = spec.outputs.string();
    summary["failed_points"] = manifest["failed_points"];
    summary["wall_seconds"] = manifest["wall_seconds"];
    for (const auto& pt : manifest["points"]) {
      json row{{"value", pt["value"]}, {"status", pt["status"]}};
      if (pt.contains("results")) {
        for (const auto& [method, res] : pt["results"].items()) {
          row[method] = res["quadratic_loss"];
        }
      }
      if (pt.contains("error")) row["error"] = pt["error"];
      summary["points"].push_back(row);
    }
    print(summary);
    return manifest["failed_points"].get<std::size_t>() == 0 ? 0 : 3;
  }

  if (*exp_report) {
    std::vector<json> loaded;
    for (const auto& f : manifests) {
      std::ifstream is(f);
      require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + f);
      try {
        loaded.push_back(json::parse(is));
      } catch (const json::exception& e) {
        fail(ErrorKind::Io, f + ": " + e.what());
      }
    }
    const auto table = compare_report(loaded);
    if (report_out.empty()) {
      std::cout << table;
    } else {
      std::ofstream os(report_out);
      require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + report_out);
      os << table;
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
}
