// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roughhedge/experiment.hpp"
#include "roughhedge/hurst.hpp"
#include "roughhedge/modelhedge.hpp"
#include "roughhedge/network.hpp"
#include "roughhedge/simulation.hpp"
#include "roughhedge/stats.hpp"
#include "roughhedge/train.hpp"

using namespace roughhedge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Options {
  fs::path workdir = "acceptance_out";
  fs::path spec_dir = RH_SPEC_DIR;
  std::string unit_tests;
  bool full_scale = false;
};

// Loss and P&L statistics of one method at every sweep point of a manifest.
struct SweepResult {
  std::vector<double> values;
  std::vector<double> loss;
  std::vector<double> q01;
  std::vector<double> p0;
  bool ok = true;
  std::string error;
};

SweepResult collect(const nlohmann::json& manifest, const std::string& method) {
  SweepResult r;
  for (const auto& pt : manifest.at("points")) {
    if (pt.at("status") != "ok" || !pt.contains("results") ||
        !pt["results"].contains(method)) {
      r.ok = false;
      r.error = pt.contains("error") ? pt["error"].dump() : "missing result for " + method;
      continue;
    }
    const auto& res = pt["results"][method];
    r.values.push_back(pt.at("value").get<double>());
    r.loss.push_back(res.at("quadratic_loss").get<double>());
    r.q01.push_back(res.at("quantiles").at("q01").get<double>());
    r.p0.push_back(pt.at("p0").get<double>());
  }
  return r;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + fmt(v[i], 3);
  return s;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool within_band(const std::vector<double>& got, const std::vector<double>& ref, double rel) {
  if (got.size() != ref.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (std::abs(got[i] - ref[i]) > rel * ref[i]) return false;
  return true;
}

// Experiment runs shared by several criteria.
class Runs {
 public:
  explicit Runs(const Options& opt) : opt_(opt) {}

  const nlohmann::json& compare() { return get(compare_, "method_comparison"); }
  const nlohmann::json& frequency() { return get(frequency_, "frequency_sweep"); }

 private:
  const nlohmann::json& get(nlohmann::json& slot, const std::string& name) {
    if (slot.is_null()) {
      auto spec = load_experiment_spec(opt_.spec_dir / (name + ".yaml"));
      if (opt_.full_scale) spec.apply_full_scale();
      spec.outputs = opt_.workdir / name;
      const auto t0 = clock_type::now();
      slot = run_experiment(spec);
      std::cerr << "  (" << name << " finished in " << fmt(seconds_since(t0), 3) << " s)\n";
    }
    return slot;
  }

  const Options& opt_;
  nlohmann::json compare_, frequency_;
};

Outcome c1_price() {
  MarketConfig cfg;
  const auto t0 = clock_type::now();
  const auto ps = simulate(cfg, 100000);
  const auto e = mc_price(ps, Payoff{});
  const double secs = seconds_since(t0);
  const bool pass = std::abs(e.price - 2.39) <= 0.05 && secs < 60.0;
  return {pass, "p0 = " + fmt(e.price) + " +- " + fmt(e.std_error, 2) + " (target 2.39 +- 0.05), " +
                    fmt(secs, 3) + " s (limit 60 s)"};
}

Outcome c2_samplers() {
  bool pass = true;
  std::string detail;
  for (double h : {0.1, 0.3, 0.5}) {
    MarketConfig cfg;
    cfg.hurst = h;
    const std::size_t n = 10000;
    const auto a = simulate_rbergomi(cfg, n);
    MarketConfig ce = cfg;
    ce.seed = cfg.seed + 1;
    const auto b = simulate_volterra_exact(ce, n);
    std::vector<double> la(n), lb(n), sa(n), sb(n);
    for (std::size_t p = 0; p < n; ++p) {
      la[p] = std::log(a.v(p, a.n_steps));
      lb[p] = std::log(b.v(p, b.n_steps));
      sa[p] = std::log(a.s(p, a.n_steps));
      sb[p] = std::log(b.s(p, b.n_steps));
    }
    const double pv = stats::ks_two_sample(la, lb).p_value;
    const double ps = stats::ks_two_sample(sa, sb).p_value;
    pass = pass && pv > 0.01 && ps > 0.01;
    detail += "H=" + fmt(h, 2) + " p(logV)=" + fmt(pv, 3) + " p(logS)=" + fmt(ps, 3) + "; ";
  }
  return {pass, detail + "need p > 0.01"};
}

Outcome c3_hurst() {
  const double dt = 1.0 / kDaysPerYear;
  const std::size_t n = 100000;
  bool hybrid_ok = true;
  std::vector<double> hybrid;
  for (int i = 1; i <= 9; ++i) {
    const double h = 0.1 * i;
    const double est = estimate_hurst(hybrid_volterra_path(h, n, dt, 42)).h_hat;
    hybrid.push_back(est);
    hybrid_ok = hybrid_ok && std::abs(est - h) <= 0.05;
  }
  bool ou_ok = true;
  std::vector<double> ou;
  for (double h : {0.1, 0.3}) {
    const auto q = OUApproxConfig::geometric(h, 20);
    const double est = estimate_hurst(ou_fbm_path(q, n, dt, 43)).h_hat;
    ou.push_back(est);
    ou_ok = ou_ok && std::abs(est - 0.5) <= 0.1;
  }
  return {hybrid_ok && ou_ok,
          std::string("hybrid H_hat for H=0.1..0.9: ") + list(hybrid) +
              (hybrid_ok ? " (all within 0.05)" : " (outside 0.05)") +
              "; OU-sum H_hat for H=0.1/0.3: " + list(ou) +
              (ou_ok ? " (within 0.5 +- 0.1)" : " (NOT within 0.5 +- 0.1)")};
}

Outcome c4_gradients() {
  MarketConfig cfg;
  cfg.trading_days = 4;
  cfg.maturity = 4.0 / kDaysPerYear;
  cfg.fwd_maturity = cfg.maturity + 15.0 / kDaysPerYear;
  auto ps = simulate(cfg, 16);
  attach_payoff(ps, Payoff{});
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto arch : {Architecture::SemiRecurrent, Architecture::FRNN}) {
    for (int width : {8, 32}) {
      Policy pol(arch, 4, {width, width}, Activation::ReLU, InfoSpec::from(cfg));
      pol.initialize(11);
      for (auto& v : pol.params()) v += 0.01;
      const auto lg = loss_and_grad(pol, ps, 0.8);
      for (std::size_t i = 0; i < pol.n_params(); ++i) {
        const double orig = pol.params()[i], h = 1e-5;
        pol.params()[i] = orig + h;
        const double up = policy_loss(pol, ps, 0.8);
        pol.params()[i] = orig - h;
        const double dn = policy_loss(pol, ps, 0.8);
        pol.params()[i] = orig;
        const double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(lg.grad[i] - fd) / std::max(std::abs(fd), 1e-6));
        ++checked;
      }
    }
  }
  return {worst <= 1e-4, std::to_string(checked) + " parameters, worst relative error " +
                             fmt(worst, 3) + " (limit 1e-4)"};
}

Outcome c5_black_scholes(const Options& opt) {
  MarketConfig cfg;
  cfg.nu = 0.0;
  const double vol = std::sqrt(cfg.xi0);
  const Payoff call{};
  const double p0 = stats::bs_call(cfg.s0, call.strike, vol, cfg.maturity);

  // model hedge deltas at time 0 and at states along outer paths
  ModelHedgeConfig mc;
  mc.inner_paths = 20000;
  mc.stock_eps = 1e-3;
  MarketConfig oc = cfg;
  oc.seed = 61;
  const auto outer = simulate_rbergomi(oc, 3);
  double worst = 0.0;
  std::size_t states = 0;
  for (std::size_t p = 0; p < outer.n_paths; ++p) {
    for (std::size_t k : {std::size_t{0}, std::size_t{10}, std::size_t{20}}) {
      const auto st = conditional_state(outer, p, k, cfg);
      const double d = stock_delta(st, call, cfg, mc, inner_seed(mc, p, k)).value;
      const double bs = stats::bs_call_delta(st.spot, call.strike, vol, cfg.maturity - st.t);
      worst = std::max(worst, std::abs(d - bs));
      ++states;
    }
  }
  const bool delta_ok = worst <= 1e-2;

  // deep fRNN against discrete BS delta hedging on the same test paths
  const auto seeds = role_seeds(cfg.seed);
  auto make = [&](std::uint64_t seed, std::size_t n) {
    MarketConfig m = cfg;
    m.seed = seed;
    auto ps = simulate(m, n);
    attach_payoff(ps, call);
    return ps;
  };
  const std::size_t scale = opt.full_scale ? 10 : 1;
  const auto tr = make(seeds.train, 10000 * scale), va = make(seeds.val, 2000 * scale),
             te = make(seeds.test, 10000 * scale);
  Policy pol = make_policy(Architecture::FRNN, cfg);
  TrainConfig tc;
  tc.epochs = opt.full_scale ? 75 : 30;
  train(pol, tr, va, p0, tc);
  const double deep = pnl(te, policy_forward(pol, te), p0).quadratic_loss;
  Strategy bs(te.n_paths, te.n_steps);
  for (std::size_t p = 0; p < te.n_paths; ++p)
    for (std::size_t k = 0; k < te.n_steps; ++k)
      bs.at(p, k, 0) =
          stats::bs_call_delta(te.s(p, k), call.strike, vol, cfg.maturity - te.grid[k]);
  const double resid = pnl(te, bs, p0).quadratic_loss;
  const bool deep_ok = deep <= 1.5 * resid;
  return {delta_ok && deep_ok,
          "max |model delta - BS delta| over " + std::to_string(states) + " states = " +
              fmt(worst, 3) + " (limit 1e-2); fRNN loss " + fmt(deep) + " vs BS residual " +
              fmt(resid) + " (ratio " + fmt(deep / resid, 3) + ", limit 1.5)"};
}

Outcome c6_hurst_trend(Runs& runs, const Options& opt) {
  const auto r = collect(runs.compare(), "frnn");
  if (!r.ok || r.loss.size() != 4) return {false, "run failed: " + r.error};
  const double ratio = r.loss[0] / r.loss[3];
  bool pass = strictly_decreasing(r.loss) && ratio >= 3.0;
  std::string detail = "fRNN losses H=0.1..0.4: " + list(r.loss) + ", H0.1/H0.4 = " +
                       fmt(ratio, 3) + " (need strictly decreasing and >= 3)";
  if (opt.full_scale) {
    const bool band = within_band(r.loss, {0.834, 0.376, 0.263, 0.244}, 0.5);
    pass = pass && band;
    detail += band ? "; full-scale values within 50%" : "; full-scale values outside 50%";
  }
  return {pass, detail};
}

Outcome c7_architectures(Runs& runs) {
  const auto f = collect(runs.compare(), "frnn");
  const auto s = collect(runs.compare(), "semi");
  if (!f.ok || !s.ok || f.loss.size() < 2 || s.loss.size() < 2)
    return {false, "run failed: " + f.error + s.error};
  const bool pass = f.loss[0] < s.loss[0] && f.loss[1] < s.loss[1];
  return {pass, "H=0.1 fRNN " + fmt(f.loss[0]) + " vs semi " + fmt(s.loss[0]) + "; H=0.2 fRNN " +
                    fmt(f.loss[1]) + " vs semi " + fmt(s.loss[1])};
}

Outcome c8_model_hedge(Runs& runs, const Options& opt) {
  const auto r = collect(runs.compare(), "model_hedge");
  if (!r.ok || r.loss.size() != 4) return {false, "run failed: " + r.error};
  bool pass = strictly_decreasing(r.loss);
  std::string detail = "model hedge losses H=0.1..0.4: " + list(r.loss) +
                       (pass ? " (decreasing)" : " (NOT decreasing)");
  if (opt.full_scale) {
    const bool band = within_band(r.loss, {1.45, 0.52, 0.34, 0.24}, 0.5);
    pass = pass && band;
    detail += band ? "; full-scale values within 50%" : "; full-scale values outside 50%";
  }
  return {pass, detail};
}

Outcome c9_frequency(Runs& runs) {
  const auto r = collect(runs.frequency(), "frnn");
  if (!r.ok || r.loss.size() != 4) return {false, "run failed: " + r.error};
  const auto& l = r.loss;  // every 2 days, daily, 2x, 4x
  const bool pass = l[0] > l[1] && l[1] > l[2] && l[3] >= 0.8 * l[2];
  return {pass, "losses (2-day/daily/2x/4x): " + list(l) +
                    " (need 2-day > daily > 2x and 4x >= 0.8 * 2x)"};
}

Outcome c10_tail(Runs& runs) {
  const auto r = collect(runs.compare(), "frnn");
  if (!r.ok || r.loss.empty()) return {false, "run failed: " + r.error};
  const double q01 = r.q01[0], p0 = r.p0[0];
  return {q01 < -5.0 * p0, "H=0.1 fRNN 1% P&L quantile " + fmt(q01) + " vs -5 p0 = " +
                               fmt(-5.0 * p0) + " (loss " + fmt(r.loss[0]) + ")"};
}

Outcome c11_suite(const Options& opt) {
  if (opt.unit_tests.empty()) return {false, "unit test binary not given (--unit-tests)"};
  const auto t0 = clock_type::now();
  const std::string cmd = "\"" + opt.unit_tests + "\" > \"" +
                          (opt.workdir / "unit_tests.log").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  return {rc == 0 && secs < 600.0, std::string(rc == 0 ? "all unit tests passed" : "unit tests failed") +
                                       " in " + fmt(secs, 4) + " s (limit 600 s)"};
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  std::vector<int> only;
  CLI::App app{"Acceptance checks"};
  app.add_option("--workdir", opt.workdir, "Directory for experiment outputs");
  app.add_option("--specs", opt.spec_dir, "Directory with the experiment specs");
  app.add_option("--unit-tests", opt.unit_tests, "Path of the unit test binary");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--full-scale", opt.full_scale, "Full path counts and epochs (hours)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(opt.workdir);

  Runs runs(opt);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"MC price of the ATM call", [] { return c1_price(); }},
      {"hybrid vs exact sampler marginals", [] { return c2_samplers(); }},
      {"Hurst recovery", [] { return c3_hurst(); }},
      {"gradient exactness", [] { return c4_gradients(); }},
      {"Black-Scholes reduction", [&] { return c5_black_scholes(opt); }},
      {"fRNN loss trend in H", [&] { return c6_hurst_trend(runs, opt); }},
      {"fRNN beats semi-recurrent", [&] { return c7_architectures(runs); }},
      {"model hedge trend in H", [&] { return c8_model_hedge(runs, opt); }},
      {"rebalancing frequency", [&] { return c9_frequency(runs); }},
      {"P&L tail", [&] { return c10_tail(runs); }},
      {"invariant suites", [&] { return c11_suite(opt); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = clock_type::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << o.detail << " [" << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  std::cout << failed << " criteria failed" << std::endl;
  return failed == 0 ? 0 : 1;
}
