#include "roughhedge/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "roughhedge/error.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/rng.hpp"
#include "roughhedge/simulation.hpp"

namespace roughhedge {

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Hurst: return "hurst";
    case SweepAxis::Frequency: return "frequency";
    case SweepAxis::Architecture: return "architecture";
  }
  return "?";
}

std::size_t ExperimentSpec::n_points() const {
  return axis == SweepAxis::Architecture ? architectures.size() : values.size();
}

void ExperimentSpec::validate() const {
  auto check = [](bool cond, const std::string& msg) {
    require(cond, ErrorKind::Validation, msg);
  };
  check(!name.empty(), "experiment name is empty");
  check(n_points() > 0, "sweep is empty");
  check(!architectures.empty() || include_model_hedge,
        "nothing to run: no architectures and no model hedge");
  check(paths.train >= 1 && paths.val >= 1 && paths.test >= 1 && paths.price >= 1,
        "path counts must be >= 1");
  for (int h : network.hidden) check(h >= 1, "hidden layer widths must be >= 1");
  check(network.hidden_state >= 1, "fRNN hidden state width must be >= 1");
  try {
    market.validate();
    train.validate();
    payoff.validate();
    if (include_model_hedge) model_hedge.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Validation, e.what());
  }
  for (double v : values) {
    MarketConfig m = market;
    if (axis == SweepAxis::Hurst) m.hurst = v;
    if (axis == SweepAxis::Frequency) m.steps_per_day = v;
    try {
      m.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Validation, std::string("sweep value ") + std::to_string(v) + ": " + e.what());
    }
  }
  if (include_model_hedge) {
    check(market.model == ModelKind::RoughBergomi, "the model hedge needs model = rbergomi");
    check(model_hedge.outer_paths <= paths.test, "model_hedge.outer_paths exceeds test paths");
  }
}

void ExperimentSpec::apply_full_scale() {
  paths.train = 100000;
  paths.val = 20000;
  paths.test = 100000;
  paths.price = 1000000;
  train.epochs = 75;
  model_hedge.outer_paths = 1000;
}

RoleSeeds role_seeds(std::uint64_t base) {
  return {derive_seed(base, 0x5452'4149'4eull), derive_seed(base, 0x56'414cull),
          derive_seed(base, 0x54'4553'54ull), derive_seed(base, 0x5052'4943'45ull)};
}

// ---------------------------------------------------------------------------
// YAML parsing

namespace {

class SpecReader {
 public:
  explicit SpecReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const YAML::Mark& mark, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (!mark.is_null()) os << ':' << mark.line + 1 << ':' << mark.column + 1;
    os << ": " << msg;
    fail(ErrorKind::Validation, os.str());
  }

  void expect_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) error(node.Mark(), what + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& section,
                  std::initializer_list<const char*> allowed) const {
    expect_map(node, section.empty() ? "document" : "section '" + section + "'");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                  [&](const char* a) { return key == a; });
      if (!ok) {
        error(kv.first.Mark(), "unknown key '" + key + "'" +
                                   (section.empty() ? "" : " in section '" + section + "'"));
      }
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const char* key, T fallback) const {
    const auto v = node[key];
    if (!v) return fallback;
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      error(v.Mark(), std::string("bad value for '") + key + "'");
    }
  }

  template <typename T>
  std::vector<T> list(const YAML::Node& node, const char* key) const {
    const auto v = node[key];
    if (!v) return {};
    if (!v.IsSequence()) error(v.Mark(), std::string("'") + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : v) {
      try {
        out.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        error(item.Mark(), std::string("bad list entry in '") + key + "'");
      }
    }
    return out;
  }

  // Wraps library parse functions so their errors point at the node.
  template <typename Fn>
  auto at(const YAML::Node& node, Fn&& fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      error(node.Mark(), e.what());
    }
  }

  MarketConfig market(const YAML::Node& m) const {
    MarketConfig cfg;
    if (!m) return cfg;
    check_keys(m, "market",
               {"model", "hurst", "nu", "rho", "xi0", "s0", "maturity_days", "fwd_maturity_days",
                "steps_per_day", "trading_days", "seed", "fv_scheme", "antithetic", "heston"});
    if (m["model"]) {
      const auto name = get<std::string>(m, "model", "");
      cfg.model = at(m["model"], [&] { return parse_model_kind(name); });
    }
    cfg.hurst = get(m, "hurst", cfg.hurst);
    cfg.nu = get(m, "nu", cfg.nu);
    cfg.rho = get(m, "rho", cfg.rho);
    cfg.xi0 = get(m, "xi0", cfg.xi0);
    cfg.s0 = get(m, "s0", cfg.s0);
    cfg.maturity = get(m, "maturity_days", cfg.maturity * kDaysPerYear) / kDaysPerYear;
    cfg.fwd_maturity =
        get(m, "fwd_maturity_days", cfg.fwd_maturity * kDaysPerYear) / kDaysPerYear;
    cfg.steps_per_day = get(m, "steps_per_day", cfg.steps_per_day);
    cfg.trading_days = get(m, "trading_days", cfg.trading_days);
    cfg.seed = get<std::uint64_t>(m, "seed", cfg.seed);
    cfg.antithetic = get(m, "antithetic", cfg.antithetic);
    if (m["fv_scheme"]) {
      const auto s = get<std::string>(m, "fv_scheme", "");
      if (s == "exact") {
        cfg.fv_scheme = ForwardVarianceScheme::Exact;
      } else if (s == "euler") {
        cfg.fv_scheme = ForwardVarianceScheme::Euler;
      } else {
        error(m["fv_scheme"].Mark(), "fv_scheme must be exact or euler");
      }
    }
    if (const auto h = m["heston"]) {
      check_keys(h, "market.heston", {"alpha", "b", "sigma", "v0"});
      cfg.heston.alpha = get(h, "alpha", cfg.heston.alpha);
      cfg.heston.b = get(h, "b", cfg.heston.b);
      cfg.heston.sigma = get(h, "sigma", cfg.heston.sigma);
      cfg.heston.v0 = get(h, "v0", cfg.heston.v0);
    }
    at(m, [&] {
      cfg.validate();
      return 0;
    });
    return cfg;
  }

 private:
  std::string source_;
};

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& text, const std::string& source) {
  SpecReader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.error(e.mark, e.msg);
  }
  r.check_keys(root, "",
               {"name", "market", "payoff", "sweep", "network", "train", "paths",
                "model_hedge", "outputs", "parallel", "scale"});
  ExperimentSpec spec;
  spec.name = r.get<std::string>(root, "name", spec.name);
  spec.market = r.market(root["market"]);

  if (const auto p = root["payoff"]) {
    r.check_keys(p, "payoff", {"kind", "strike"});
    const auto kind = r.get<std::string>(p, "kind", "call");
    if (kind != "call") r.error(p["kind"].Mark(), "only kind: call is supported");
    spec.payoff.strike = r.get(p, "strike", spec.payoff.strike);
  }

  const auto sw = root["sweep"];
  if (!sw) r.error(root.Mark(), "missing section 'sweep'");
  r.check_keys(sw, "sweep", {"axis", "values", "architectures"});
  const auto axis = r.get<std::string>(sw, "axis", "");
  if (axis == "hurst") {
    spec.axis = SweepAxis::Hurst;
  } else if (axis == "frequency") {
    spec.axis = SweepAxis::Frequency;
  } else if (axis == "architecture") {
    spec.axis = SweepAxis::Architecture;
  } else {
    r.error(sw["axis"] ? sw["axis"].Mark() : sw.Mark(),
            "sweep.axis must be hurst, frequency or architecture");
  }
  if (spec.axis == SweepAxis::Architecture) {
    if (sw["values"]) {
      spec.architectures.clear();
      for (const auto& item : sw["values"]) {
        const auto name = item.as<std::string>();
        spec.architectures.push_back(r.at(item, [&] { return parse_architecture(name); }));
      }
    }
  } else {
    if (!sw["values"]) r.error(sw.Mark(), "sweep.values is required");
    spec.values = r.list<double>(sw, "values");
  }
  if (sw["architectures"]) {
    if (spec.axis == SweepAxis::Architecture) {
      r.error(sw["architectures"].Mark(), "use sweep.values for the architecture axis");
    }
    spec.architectures.clear();
    for (const auto& item : sw["architectures"]) {
      const auto name = item.as<std::string>();
      spec.architectures.push_back(r.at(item, [&] { return parse_architecture(name); }));
    }
  }

  if (const auto n = root["network"]) {
    r.check_keys(n, "network", {"hidden", "activation", "hidden_state"});
    if (n["hidden"]) spec.network.hidden = r.list<int>(n, "hidden");
    if (n["activation"]) {
      const auto a = r.get<std::string>(n, "activation", "");
      spec.network.activation = r.at(n["activation"], [&] { return parse_activation(a); });
    }
    spec.network.hidden_state = r.get(n, "hidden_state", spec.network.hidden_state);
  }

  if (const auto t = root["train"]) {
    r.check_keys(t, "train",
                 {"epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2",
                  "adam_eps", "init", "seed", "validation_fraction"});
    auto& tc = spec.train;
    tc.epochs = r.get(t, "epochs", tc.epochs);
    tc.batch_size = r.get<std::size_t>(t, "batch_size", tc.batch_size);
    tc.learning_rate = r.get(t, "learning_rate", tc.learning_rate);
    tc.beta1 = r.get(t, "beta1", tc.beta1);
    tc.beta2 = r.get(t, "beta2", tc.beta2);
    tc.adam_eps = r.get(t, "adam_eps", tc.adam_eps);
    tc.seed = r.get<std::uint64_t>(t, "seed", tc.seed);
    tc.validation_fraction = r.get(t, "validation_fraction", tc.validation_fraction);
    if (t["optimizer"]) {
      const auto o = r.get<std::string>(t, "optimizer", "");
      if (o == "adam") {
        tc.optimizer = OptimizerKind::Adam;
      } else if (o == "sgd") {
        tc.optimizer = OptimizerKind::SGD;
      } else {
        r.error(t["optimizer"].Mark(), "optimizer must be adam or sgd");
      }
    }
    if (t["init"]) {
      const auto i = r.get<std::string>(t, "init", "");
      if (i == "uniform_fan_in") {
        tc.init = InitScheme::UniformFanIn;
      } else if (i == "zero") {
        tc.init = InitScheme::Zero;
      } else {
        r.error(t["init"].Mark(), "init must be uniform_fan_in or zero");
      }
    }
  }

  if (const auto p = root["paths"]) {
    r.check_keys(p, "paths", {"train", "val", "test", "price"});
    spec.paths.train = r.get<std::size_t>(p, "train", spec.paths.train);
    spec.paths.val = r.get<std::size_t>(p, "val", spec.paths.val);
    spec.paths.test = r.get<std::size_t>(p, "test", spec.paths.test);
    spec.paths.price = r.get<std::size_t>(p, "price", spec.paths.price);
  }

  if (const auto m = root["model_hedge"]) {
    r.check_keys(m, "model_hedge",
                 {"enabled", "outer_paths", "inner_paths", "stock_eps", "bump_eps", "seed"});
    spec.include_model_hedge = r.get(m, "enabled", true);
    auto& mc = spec.model_hedge;
    mc.outer_paths = r.get<std::size_t>(m, "outer_paths", mc.outer_paths);
    mc.inner_paths = r.get<std::size_t>(m, "inner_paths", mc.inner_paths);
    mc.stock_eps = r.get(m, "stock_eps", mc.stock_eps);
    mc.bump_eps = r.get(m, "bump_eps", mc.bump_eps);
    mc.seed = r.get<std::uint64_t>(m, "seed", mc.seed);
  }

  spec.outputs = r.get<std::string>(root, "outputs", spec.outputs.string());
  spec.parallel = r.get(root, "parallel", spec.parallel);
  const auto scale = r.get<std::string>(root, "scale", "desk");
  if (scale == "full") {
    spec.apply_full_scale();
  } else if (scale != "desk") {
    r.error(root["scale"].Mark(), "scale must be desk or full");
  }
  spec.validate();
  return spec;
}

namespace {
std::string read_text(const std::filesystem::path& file) {
  std::ifstream is(file);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}
}  // namespace

ExperimentSpec load_experiment_spec(const std::filesystem::path& file) {
  return parse_experiment_spec(read_text(file), file.string());
}

MarketConfig load_market_config(const std::filesystem::path& file) {
  SpecReader r(file.string());
  YAML::Node root;
  try {
    root = YAML::Load(read_text(file));
  } catch (const YAML::ParserException& e) {
    r.error(e.mark, e.msg);
  }
  r.expect_map(root, "document");
  return r.market(root["market"] ? root["market"] : root);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const MarketConfig& cfg) {
  nlohmann::json j;
  j["model"] = to_string(cfg.model);
  j["hurst"] = cfg.hurst;
  j["nu"] = cfg.nu;
  j["rho"] = cfg.rho;
  j["xi0"] = cfg.xi0;
  j["s0"] = cfg.s0;
  j["maturity"] = cfg.maturity;
  j["fwd_maturity"] = cfg.fwd_maturity;
  j["steps_per_day"] = cfg.steps_per_day;
  j["trading_days"] = cfg.trading_days;
  j["n_steps"] = cfg.n_steps();
  j["seed"] = cfg.seed;
  j["fv_scheme"] = cfg.fv_scheme == ForwardVarianceScheme::Exact ? "exact" : "euler";
  j["antithetic"] = cfg.antithetic;
  j["heston"] = {{"alpha", cfg.heston.alpha},
                 {"b", cfg.heston.b},
                 {"sigma", cfg.heston.sigma},
                 {"v0", cfg.heston.v0}};
  return j;
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["market"] = to_json(spec.market);
  j["payoff"] = {{"kind", "call"}, {"strike", spec.payoff.strike}};
  j["sweep"]["axis"] = to_string(spec.axis);
  j["sweep"]["values"] = spec.values;
  std::vector<std::string> archs;
  for (auto a : spec.architectures) archs.push_back(to_string(a));
  j["sweep"]["architectures"] = archs;
  j["network"] = {{"hidden", spec.network.hidden},
                  {"activation", to_string(spec.network.activation)},
                  {"hidden_state", spec.network.hidden_state}};
  const auto& t = spec.train;
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.learning_rate},
                {"optimizer", t.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_eps", t.adam_eps},
                {"init", t.init == InitScheme::UniformFanIn ? "uniform_fan_in" : "zero"},
                {"seed", t.seed}};
  j["paths"] = {{"train", spec.paths.train},
                {"val", spec.paths.val},
                {"test", spec.paths.test},
                {"price", spec.paths.price}};
  const auto& mc = spec.model_hedge;
  j["model_hedge"] = {{"enabled", spec.include_model_hedge},
                      {"outer_paths", mc.outer_paths},
                      {"inner_paths", mc.inner_paths},
                      {"stock_eps", mc.stock_eps},
                      {"bump_eps", mc.bump_eps},
                      {"seed", mc.seed}};
  j["parallel"] = spec.parallel;
  return j;
}

namespace {

std::string hex(const unsigned char* data, unsigned len) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(data[i]);
  return os.str();
}

std::string sha256_string(const std::string& s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  require(EVP_Digest(s.data(), s.size(), md, &len, EVP_sha256(), nullptr) == 1,
          ErrorKind::Io, "SHA-256 failed");
  return hex(md, len);
}

}  // namespace

std::string sha256_hex(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1, ErrorKind::Io,
          "SHA-256 init failed");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  return hex(md, len);
}

// ---------------------------------------------------------------------------
// Running

namespace {

// Premium from its own path stream, in fixed chunks to bound memory.
PriceEstimate premium(const MarketConfig& cfg, const Payoff& payoff, std::size_t n,
                      std::uint64_t seed) {
  constexpr std::size_t kChunk = 10000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t first = 0, c = 0; first < n; first += kChunk, ++c) {
    MarketConfig m = cfg;
    m.seed = derive_seed(seed, c);
    const auto ps = simulate(m, std::min(kChunk, n - first));
    for (std::size_t p = 0; p < ps.n_paths; ++p) {
      const double z = payoff(ps.s(p, ps.n_steps));
      sum += z;
      sq += z * z;
    }
  }
  const double dn = static_cast<double>(n);
  const double mean = sum / dn;
  const double var = n > 1 ? std::max(0.0, (sq - dn * mean * mean) / (dn - 1.0)) : 0.0;
  return {mean, std::sqrt(var / dn)};
}

struct MethodResult {
  std::string method;
  PnLReport report;
  nlohmann::json info;
};

struct PointOutcome {
  nlohmann::json json;
  std::vector<MethodResult> methods;
  std::vector<std::filesystem::path> files;
};

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

PointOutcome run_point(const ExperimentSpec& spec, std::size_t idx, const RoleSeeds& seeds) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  PointOutcome out;
  MarketConfig cfg = spec.market;
  std::vector<Architecture> archs = spec.architectures;
  nlohmann::json& j = out.json;
  j["index"] = idx;
  switch (spec.axis) {
    case SweepAxis::Hurst:
      cfg.hurst = spec.values[idx];
      j["value"] = cfg.hurst;
      break;
    case SweepAxis::Frequency:
      cfg.steps_per_day = spec.values[idx];
      j["value"] = cfg.steps_per_day;
      break;
    case SweepAxis::Architecture:
      archs = {spec.architectures[idx]};
      j["value"] = to_string(spec.architectures[idx]);
      break;
  }
  j["hurst"] = cfg.hurst;
  j["steps_per_day"] = cfg.steps_per_day;
  j["n_steps"] = cfg.n_steps();
  const std::string tag = "p" + std::to_string(idx);
  const auto dir = spec.outputs;

  try {
    const auto p0 = premium(cfg, spec.payoff, spec.paths.price, seeds.price);
    j["p0"] = p0.price;
    j["p0_stderr"] = p0.std_error;
    auto make = [&](std::uint64_t seed, std::size_t n) {
      MarketConfig m = cfg;
      m.seed = seed;
      auto ps = simulate(m, n);
      attach_payoff(ps, spec.payoff);
      return ps;
    };
    const auto test = make(seeds.test, spec.paths.test);
    if (!archs.empty()) {
      const auto train_set = make(seeds.train, spec.paths.train);
      const auto val_set = make(seeds.val, spec.paths.val);
      for (auto arch : archs) {
        const auto t0 = clock::now();
        Policy policy(arch, cfg.n_steps(), spec.network.hidden, spec.network.activation,
                      InfoSpec::from(cfg), spec.network.hidden_state);
        const auto tr = train(policy, train_set, val_set, p0.price, spec.train);
        const std::string stem = tag + "_" + to_string(arch);
        const auto report = pnl(test, policy_forward(policy, test), p0.price);
        for (auto& f : write_report(report, dir, stem)) out.files.push_back(f);
        write_loss_curve_csv(tr, dir / (stem + "_curve.csv"));
        out.files.push_back(dir / (stem + "_curve.csv"));
        save_policy(policy, dir / (stem + ".policy"));
        out.files.push_back(dir / (stem + ".policy"));
        nlohmann::json info = to_json(report);
        info["best_epoch"] = tr.best_epoch;
        info["best_val_loss"] = tr.best_val_loss;
        info["wall_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
        out.methods.push_back({to_string(arch), report, info});
      }
    }
    if (spec.include_model_hedge) {
      const auto t0 = clock::now();
      const auto outer = test.slice(0, spec.model_hedge.outer_paths);
      const auto mh = model_hedge_run(outer, spec.payoff, cfg, spec.model_hedge, p0.price);
      const std::string stem = tag + "_model_hedge";
      for (auto& f : write_report(mh.report, dir, stem)) out.files.push_back(f);
      write_hedge_weights_csv(outer, mh, dir / (stem + "_weights.csv"));
      out.files.push_back(dir / (stem + "_weights.csv"));
      nlohmann::json info = to_json(mh.report);
      info["band_violations"] = mh.band_violations;
      info["wall_seconds"] = std::chrono::duration<double>(clock::now() - t0).count();
      out.methods.push_back({"model_hedge", mh.report, info});
    }
    j["status"] = "ok";
  } catch (const Error& e) {
    j["status"] = "failed";
    j["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    j["status"] = "failed";
    j["error"] = {{"kind", "internal"}, {"message", e.what()}};
  }
  for (const auto& m : out.methods) j["results"][m.method] = m.info;
  j["wall_seconds"] = std::chrono::duration<double>(clock::now() - start).count();
  return out;
}

}  // namespace

nlohmann::json run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.outputs);
  const auto seeds = role_seeds(spec.market.seed);
  const auto start = std::chrono::steady_clock::now();
  std::vector<PointOutcome> points(spec.n_points());
  if (spec.parallel) {
    parallel_for(points.size(), [&](std::size_t i) { points[i] = run_point(spec, i, seeds); });
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = run_point(spec, i, seeds);
  }

  const auto losses_file = spec.outputs / "losses.csv";
  {
    std::ofstream os(losses_file);
    require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + losses_file.string());
    os << std::setprecision(10);
    os << "point,axis,value,hurst,steps_per_day,method,p0,quadratic_loss,mean,stdev,q01,q05,"
          "q50,q95,q99,n_paths\n";
    for (const auto& pt : points) {
      const auto& j = pt.json;
      const std::string value =
          j["value"].is_string() ? j["value"].get<std::string>() : format_value(j["value"]);
      for (const auto& m : pt.methods) {
        const auto& r = m.report;
        os << j["index"].get<std::size_t>() << ',' << to_string(spec.axis) << ',' << value << ','
           << j["hurst"].get<double>() << ',' << j["steps_per_day"].get<double>() << ','
           << m.method << ',' << j["p0"].get<double>() << ',' << r.quadratic_loss << ','
           << r.mean << ',' << r.stdev;
        for (double q : r.quantiles) os << ',' << q;
        os << ',' << r.pnl.size() << '\n';
      }
    }
  }

  nlohmann::json manifest;
  const auto config = to_json(spec);
  manifest["name"] = spec.name;
  manifest["version"] = kVersion;
  manifest["config"] = config;
  manifest["config_hash"] = sha256_string(config.dump());
  manifest["seeds"] = {{"train", seeds.train},
                       {"val", seeds.val},
                       {"test", seeds.test},
                       {"price", seeds.price},
                       {"train_init", spec.train.seed},
                       {"model_hedge", spec.model_hedge.seed}};
  manifest["points"] = nlohmann::json::array();
  std::vector<std::filesystem::path> files{losses_file};
  std::size_t failed = 0;
  for (const auto& pt : points) {
    manifest["points"].push_back(pt.json);
    failed += pt.json["status"] == "ok" ? 0 : 1;
    files.insert(files.end(), pt.files.begin(), pt.files.end());
  }
  manifest["failed_points"] = failed;
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : files) {
    manifest["files"].push_back({{"path", std::filesystem::relative(f, spec.outputs).string()},
                                 {"sha256", sha256_hex(f)}});
  }
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream os(spec.outputs / "manifest.json");
  require(static_cast<bool>(os), ErrorKind::Io, "cannot write manifest");
  os << manifest.dump(2) << '\n';
  return manifest;
}

std::string compare_report(const std::vector<nlohmann::json>& manifests) {
  require(!manifests.empty(), ErrorKind::InvalidArgument, "no manifests to compare");
  auto payoff_of = [](const nlohmann::json& m) { return m.at("config").at("payoff"); };
  auto model_of = [](const nlohmann::json& m) {
    return m.at("config").at("market").at("model").get<std::string>();
  };
  for (const auto& m : manifests) {
    require(payoff_of(m) == payoff_of(manifests[0]), ErrorKind::Validation,
            "manifests use different payoffs");
    require(model_of(m) == model_of(manifests[0]), ErrorKind::Validation,
            "manifests use different market models");
  }
  const std::vector<std::string> methods{"model_hedge", "semi", "frnn"};
  const std::vector<std::string> headers{"model_hedge", "deep_semi", "deep_frnn"};
  std::map<double, std::map<std::string, double>> rows;
  std::vector<bool> present(methods.size(), false);
  for (const auto& m : manifests) {
    for (const auto& pt : m.at("points")) {
      if (!pt.contains("results")) continue;
      auto& row = rows[pt.at("hurst").get<double>()];
      for (std::size_t i = 0; i < methods.size(); ++i) {
        const auto& res = pt["results"];
        if (!res.contains(methods[i]) || row.count(methods[i])) continue;
        row[methods[i]] = res[methods[i]].at("quadratic_loss").get<double>();
        present[i] = true;
      }
    }
  }
  std::ostringstream os;
  os << std::setprecision(6) << "hurst";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (present[i]) os << ',' << headers[i];
  }
  os << '\n';
  for (const auto& [h, row] : rows) {
    os << h;
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (!present[i]) continue;
      os << ',';
      if (auto it = row.find(methods[i]); it != row.end()) os << it->second;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace roughhedge
