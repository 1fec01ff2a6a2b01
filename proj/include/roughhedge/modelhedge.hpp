#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "roughhedge/hedging.hpp"
#include "roughhedge/market.hpp"

namespace roughhedge {

// Time-t_k information of an rBergomi path: spot and the conditional forward
// variance curve E[V_{t_i} | F_{t_k}] for the remaining cells i = k..n-1.
// Cell k carries the current spot variance.
struct ConditionalState {
  std::size_t step = 0;
  double t = 0.0;
  double spot = 0.0;
  std::vector<double> grid;      // t_k, ..., t_n
  std::vector<double> fv_curve;  // one level per remaining cell
  // sqrt(2H) nu times the F_{t_k}-measurable part of X_{t_i}, per cell
  std::vector<double> theta_vals;

  std::size_t remaining() const { return fv_curve.size(); }
  void validate() const;
};

// Rebuilds the conditional curve from the outer path's Brownian increments
// using the hybrid-scheme weights, so the inner restart reproduces the outer
// scheme's conditional law. Needs rBergomi paths with dW.
ConditionalState conditional_state(const PathSet& outer, std::size_t path, std::size_t step,
                                   const MarketConfig& cfg);
// Time-0 state with a flat curve at xi0.
ConditionalState initial_state(const MarketConfig& cfg);

struct ModelHedgeConfig {
  std::size_t inner_paths = 2000;   // antithetic pairs, so must be even
  double stock_eps = 1e-2;          // stock bump as a fraction of S0
  double bump_eps = 1e-2;           // relative forward-variance bump
  std::size_t outer_paths = 1000;
  std::uint64_t seed = 17;

  void validate() const;
};

struct MCValue {
  double value;
  double std_error;
};

// Inner Monte-Carlo price of the payoff from `state`. The inner noise stream
// is fixed by inner_seed, so bumped re-evaluations share random numbers.
MCValue conditional_price(const ConditionalState& state, const Payoff& payoff,
                          const MarketConfig& cfg, const ModelHedgeConfig& mc,
                          std::uint64_t inner_seed);

// (u(S + eps) - u(S)) / eps with eps = mc.stock_eps * S0.
MCValue stock_delta(const ConditionalState& state, const Payoff& payoff,
                    const MarketConfig& cfg, const ModelHedgeConfig& mc,
                    std::uint64_t inner_seed);

// Bump direction a_i = max(t_i - t, dt/2)^(H - 1/2) over the remaining cells.
std::vector<double> gateaux_direction(const ConditionalState& state, const MarketConfig& cfg);

// Derivative of the price along a: the curve is bumped to
// curve_i * (1 + eps a_i) and the weight is (u_bumped - u) / eps.
MCValue gateaux_weight(const ConditionalState& state, const Payoff& payoff,
                       const MarketConfig& cfg, const ModelHedgeConfig& mc,
                       std::uint64_t inner_seed);
// Flat-curve shortcut: one uniform relative bump, scaled by the mean of a.
MCValue gateaux_weight_flat(const ConditionalState& state, const Payoff& payoff,
                            const MarketConfig& cfg, const ModelHedgeConfig& mc,
                            std::uint64_t inner_seed);

struct HedgeWeights {
  double delta_S = 0.0;
  double delta_FV = 0.0;
  double price = 0.0;
  double gateaux = 0.0;
  std::size_t inner_paths = 0;
  double bump_eps = 0.0;
  bool first_cell_clamped = false;
  bool delta_out_of_band = false;  // delta_S outside [-0.1, 1.1]
};

// All hedge ratios at one state from a single inner simulation.
// delta_FV = gateaux / (FV_t (T_fwd - t)^(H - 1/2)).
HedgeWeights hedge_weights(const ConditionalState& state, double fv_now, const Payoff& payoff,
                           const MarketConfig& cfg, const ModelHedgeConfig& mc,
                           std::uint64_t inner_seed);

// Inner seed of outer (path, step).
std::uint64_t inner_seed(const ModelHedgeConfig& mc, std::size_t path, std::size_t step);

struct ModelHedgeResult {
  Strategy strategy;
  PnLReport report;
  std::vector<HedgeWeights> weights;  // [path * n_steps + step]
  std::size_t band_violations = 0;
};

// Hedges every outer path with the model ratios and evaluates the P&L
// against the premium p0.
ModelHedgeResult model_hedge_run(const PathSet& outer, const Payoff& payoff,
                                 const MarketConfig& cfg, const ModelHedgeConfig& mc,
                                 double p0);

// path,step,t,S,FV,delta_S,delta_FV
void write_hedge_weights_csv(const PathSet& outer, const ModelHedgeResult& result,
                             const std::filesystem::path& file);

}  // namespace roughhedge
