#include "roughhedge/modelhedge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "roughhedge/error.hpp"
#include "roughhedge/kernels.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/rng.hpp"

namespace roughhedge {

void ConditionalState::validate() const {
  require(grid.size() == fv_curve.size() + 1, ErrorKind::Structural,
          "conditional grid must have one more point than the curve");
  require(theta_vals.empty() || theta_vals.size() == fv_curve.size(), ErrorKind::Structural,
          "theta values and curve differ in length");
  require(spot > 0.0 && std::isfinite(spot), ErrorKind::InvalidArgument,
          "conditional spot must be positive");
  for (double v : fv_curve) {
    require(v > 0.0 && std::isfinite(v), ErrorKind::InvalidArgument,
            "forward variance curve must be positive");
  }
}

void ModelHedgeConfig::validate() const {
  require(inner_paths >= 2 && inner_paths % 2 == 0, ErrorKind::InvalidArgument,
          "inner_paths must be a positive even number (antithetic pairs)");
  require(stock_eps > 0.0 && bump_eps > 0.0, ErrorKind::InvalidArgument,
          "bump sizes must be positive");
  require(outer_paths >= 1, ErrorKind::InvalidArgument, "outer_paths must be >= 1");
}

ConditionalState conditional_state(const PathSet& outer, std::size_t path, std::size_t step,
                                   const MarketConfig& cfg) {
  require(outer.source == PathSource::Hybrid, ErrorKind::InvalidArgument,
          "conditional curves need hybrid-scheme rBergomi paths");
  require(outer.n_steps == static_cast<std::size_t>(cfg.n_steps()), ErrorKind::Structural,
          "outer grid does not match the market config");
  require(path < outer.n_paths && step <= outer.n_steps, ErrorKind::Structural,
          "path or step out of range");
  const std::size_t n = outer.n_steps;
  const double h2 = 2.0 * cfg.hurst;
  const double scale = std::sqrt(2.0 * cfg.hurst) * cfg.nu;
  const double half_nu2 = 0.5 * cfg.nu * cfg.nu;
  const auto w = kernel::hybrid_weights(static_cast<int>(n), cfg.dt(), cfg.hurst - 0.5);

  ConditionalState st;
  st.step = step;
  st.t = outer.grid[step];
  st.spot = outer.s(path, step);
  st.grid.assign(outer.grid.begin() + step, outer.grid.end());
  const double tk = st.t;
  for (std::size_t i = step; i < n; ++i) {
    const double ti = outer.grid[i];
    double theta;
    if (i == step) {
      theta = std::log(outer.v(path, i) / cfg.xi0) + half_nu2 * std::pow(ti, h2);
    } else {
      // X_{t_i} = W1_{i-1} + sum_{d>=1} w_d dW_{i-1-d}; cells j < k are known
      double acc = 0.0;
      for (std::size_t j = 0; j < step; ++j) acc += w[i - 1 - j] * outer.dw(path, j);
      theta = scale * acc;
    }
    st.theta_vals.push_back(theta);
    st.fv_curve.push_back(cfg.xi0 *
                          std::exp(theta - half_nu2 * (std::pow(ti, h2) - std::pow(ti - tk, h2))));
  }
  return st;
}

ConditionalState initial_state(const MarketConfig& cfg) {
  ConditionalState st;
  st.spot = cfg.s0;
  st.grid = cfg.grid();
  st.fv_curve.assign(st.grid.size() - 1, cfg.xi0);
  st.theta_vals.assign(st.grid.size() - 1, 0.0);
  return st;
}

std::uint64_t inner_seed(const ModelHedgeConfig& mc, std::size_t path, std::size_t step) {
  return derive_seed(mc.seed, 0x494e'4e45'52ull, path, step);
}

std::vector<double> gateaux_direction(const ConditionalState& state, const MarketConfig& cfg) {
  const double alpha = cfg.hurst - 0.5;
  const double dt = cfg.dt();
  std::vector<double> a(state.remaining());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::pow(std::max(state.grid[i] - state.t, 0.5 * dt), alpha);
  }
  return a;
}

namespace {

struct InnerStats {
  double sum = 0.0;
  double sq = 0.0;
  void add(double v) {
    sum += v;
    sq += v * v;
  }
  MCValue finish(std::size_t n) const {
    const double m = sum / static_cast<double>(n);
    const double var = n > 1 ? std::max(0.0, (sq - n * m * m) / (n - 1.0)) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(n))};
  }
};

struct InnerRequest {
  bool stock_bump = false;
  std::vector<std::vector<double>> directions;  // relative curve bumps
};

struct InnerResult {
  MCValue price{0.0, 0.0};
  MCValue stock{0.0, 0.0};
  std::vector<MCValue> bumps;
};

// Inner hybrid-scheme simulation from `state`. Every antithetic pair
// contributes one averaged sample, so standard errors are pair-based.
InnerResult run_inner(const ConditionalState& state, const Payoff& payoff,
                      const MarketConfig& cfg, const ModelHedgeConfig& mc,
                      std::uint64_t seed, const InnerRequest& req) {
  state.validate();
  mc.validate();
  payoff.validate();
  const std::size_t m = state.remaining();
  const double eps_s = mc.stock_eps * cfg.s0;
  InnerResult res;
  res.bumps.resize(req.directions.size());
  if (m == 0) {
    const double z = payoff(state.spot);
    res.price = {z, 0.0};
    res.stock = {(payoff(state.spot + eps_s) - z) / eps_s, 0.0};
    for (auto& b : res.bumps) b = {0.0, 0.0};
    return res;
  }
  for (const auto& d : req.directions) {
    require(d.size() == m, ErrorKind::Structural, "bump direction length mismatch");
  }

  const double dt = cfg.dt();
  const double alpha = cfg.hurst - 0.5;
  const double h2 = 2.0 * cfg.hurst;
  const double scale = std::sqrt(2.0 * cfg.hurst) * cfg.nu;
  const double half_nu2 = 0.5 * cfg.nu * cfg.nu;
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));
  const auto w = kernel::hybrid_weights(static_cast<int>(m), dt, alpha);
  const auto cell = kernel::hybrid_cell_covariance(dt, alpha);
  const double l11 = std::sqrt(cell.var_dw);
  const double l21 = cell.cov / l11;
  const double l22 = std::sqrt(std::max(0.0, cell.var_exact - l21 * l21));
  std::vector<double> comp(m);
  for (std::size_t i = 0; i < m; ++i) comp[i] = half_nu2 * std::pow(i * dt, h2);

  const std::size_t nb = req.directions.size();
  std::vector<double> z1(m), z2(m), z3(m), dw(m), w1(m), v(m);
  InnerStats base, stock;
  std::vector<InnerStats> bumps(nb);
  const std::size_t pairs = mc.inner_paths / 2;
  for (std::size_t q = 0; q < pairs; ++q) {
    StreamRng rng(seed, q);
    for (std::size_t i = 0; i < m; ++i) {
      z1[i] = rng.normal();
      z2[i] = rng.normal();
      z3[i] = rng.normal();
    }
    double pair_base = 0.0, pair_stock = 0.0;
    std::vector<double> pair_bump(nb, 0.0);
    for (double sign : {1.0, -1.0}) {
      for (std::size_t i = 0; i < m; ++i) {
        dw[i] = sign * l11 * z1[i];
        w1[i] = sign * (l21 * z1[i] + l22 * z2[i]);
      }
      v[0] = state.fv_curve[0];
      for (std::size_t i = 1; i < m; ++i) {
        double x = w1[i - 1];
        for (std::size_t d = 1; d < i; ++d) x += w[d] * dw[i - 1 - d];
        v[i] = state.fv_curve[i] * std::exp(scale * x - comp[i]);
      }
      auto terminal = [&](const std::vector<double>* bump, double eps) {
        double log_s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double vi = bump ? v[i] * (1.0 + eps * (*bump)[i]) : v[i];
          const double dz = cfg.rho * dw[i] + rho_bar * sign * std::sqrt(dt) * z3[i];
          log_s += std::sqrt(std::max(vi, 0.0)) * dz - 0.5 * vi * dt;
        }
        return std::exp(log_s);
      };
      const double growth = terminal(nullptr, 0.0);
      const double zb = payoff(state.spot * growth);
      pair_base += 0.5 * zb;
      if (req.stock_bump) {
        pair_stock += 0.5 * (payoff((state.spot + eps_s) * growth) - zb) / eps_s;
      }
      for (std::size_t b = 0; b < nb; ++b) {
        const double gb = terminal(&req.directions[b], mc.bump_eps);
        pair_bump[b] += 0.5 * (payoff(state.spot * gb) - zb) / mc.bump_eps;
      }
    }
    base.add(pair_base);
    stock.add(pair_stock);
    for (std::size_t b = 0; b < nb; ++b) bumps[b].add(pair_bump[b]);
  }
  res.price = base.finish(pairs);
  res.stock = stock.finish(pairs);
  for (std::size_t b = 0; b < nb; ++b) res.bumps[b] = bumps[b].finish(pairs);
  return res;
}

}  // namespace

MCValue conditional_price(const ConditionalState& state, const Payoff& payoff,
                          const MarketConfig& cfg, const ModelHedgeConfig& mc,
                          std::uint64_t seed) {
  return run_inner(state, payoff, cfg, mc, seed, {}).price;
}

MCValue stock_delta(const ConditionalState& state, const Payoff& payoff,
                    const MarketConfig& cfg, const ModelHedgeConfig& mc, std::uint64_t seed) {
  InnerRequest req;
  req.stock_bump = true;
  return run_inner(state, payoff, cfg, mc, seed, req).stock;
}

MCValue gateaux_weight(const ConditionalState& state, const Payoff& payoff,
                       const MarketConfig& cfg, const ModelHedgeConfig& mc,
                       std::uint64_t seed) {
  InnerRequest req;
  req.directions.push_back(gateaux_direction(state, cfg));
  return run_inner(state, payoff, cfg, mc, seed, req).bumps[0];
}

MCValue gateaux_weight_flat(const ConditionalState& state, const Payoff& payoff,
                            const MarketConfig& cfg, const ModelHedgeConfig& mc,
                            std::uint64_t seed) {
  const auto a = gateaux_direction(state, cfg);
  if (a.empty()) return {0.0, 0.0};
  double mean_a = 0.0;
  for (double v : a) mean_a += v;
  mean_a /= static_cast<double>(a.size());
  InnerRequest req;
  req.directions.emplace_back(a.size(), 1.0);
  const auto r = run_inner(state, payoff, cfg, mc, seed, req).bumps[0];
  return {r.value * mean_a, r.std_error * mean_a};
}

HedgeWeights hedge_weights(const ConditionalState& state, double fv_now, const Payoff& payoff,
                           const MarketConfig& cfg, const ModelHedgeConfig& mc,
                           std::uint64_t seed) {
  require(state.t < cfg.fwd_maturity && fv_now > 0.0, ErrorKind::Domain,
          "forward variance hedge needs t < T_fwd and a positive forward variance");
  InnerRequest req;
  req.stock_bump = true;
  req.directions.push_back(gateaux_direction(state, cfg));
  const auto r = run_inner(state, payoff, cfg, mc, seed, req);
  HedgeWeights hw;
  hw.price = r.price.value;
  hw.delta_S = r.stock.value;
  hw.gateaux = r.bumps.empty() ? 0.0 : r.bumps[0].value;
  const double tau = cfg.fwd_maturity - state.t;
  hw.delta_FV = hw.gateaux / (fv_now * std::pow(tau, cfg.hurst - 0.5));
  hw.inner_paths = mc.inner_paths;
  hw.bump_eps = mc.bump_eps;
  hw.first_cell_clamped = cfg.hurst < 0.5 && state.remaining() > 0;
  hw.delta_out_of_band = hw.delta_S < -0.1 || hw.delta_S > 1.1;
  return hw;
}

ModelHedgeResult model_hedge_run(const PathSet& outer, const Payoff& payoff,
                                 const MarketConfig& cfg, const ModelHedgeConfig& mc,
                                 double p0) {
  mc.validate();
  payoff.validate();
  require(outer.n_paths >= 1, ErrorKind::InvalidArgument, "no outer paths");
  const std::size_t n = outer.n_steps;
  ModelHedgeResult res;
  res.strategy = Strategy(outer.n_paths, n);
  res.weights.resize(outer.n_paths * n);

  parallel_for(outer.n_paths, [&](std::size_t p) {
    for (std::size_t k = 0; k < n; ++k) {
      try {
        const auto st = conditional_state(outer, p, k, cfg);
        const auto hw = hedge_weights(st, outer.fv(p, k), payoff, cfg, mc, inner_seed(mc, p, k));
        res.weights[p * n + k] = hw;
        res.strategy.at(p, k, 0) = hw.delta_S;
        res.strategy.at(p, k, 1) = hw.delta_FV;
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "model hedge at path " << p << ", step " << k << ": " << e.what();
        throw Error(e.kind(), msg.str());
      }
    }
  });
  for (const auto& hw : res.weights) res.band_violations += hw.delta_out_of_band ? 1 : 0;

  if (outer.payoff.size() == outer.n_paths) {
    res.report = pnl(outer, res.strategy, p0);
  } else {
    PathSet with_payoff = outer;
    attach_payoff(with_payoff, payoff);
    res.report = pnl(with_payoff, res.strategy, p0);
  }
  return res;
}

void write_hedge_weights_csv(const PathSet& outer, const ModelHedgeResult& result,
                             const std::filesystem::path& file) {
  std::ofstream os(file);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + file.string());
  os.precision(12);
  os << "path,step,t,S,FV,delta_S,delta_FV\n";
  const std::size_t n = outer.n_steps;
  for (std::size_t p = 0; p < outer.n_paths; ++p) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto& hw = result.weights[p * n + k];
      os << p << ',' << k << ',' << outer.grid[k] << ',' << outer.s(p, k) << ','
         << outer.fv(p, k) << ',' << hw.delta_S << ',' << hw.delta_FV << '\n';
    }
  }
}

}  // namespace roughhedge
