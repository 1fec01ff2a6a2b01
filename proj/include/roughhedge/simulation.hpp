#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roughhedge/market.hpp"

namespace roughhedge {

// Quadrature of the mean-reversion measure mu(dx) = dx / (x^a Gamma(a) Gamma(1-a)),
// a = H + 1/2, that turns fBm into a mixture of OU processes.
struct OUApproxConfig {
  std::vector<double> speeds;   // x_i >= 0, increasing
  std::vector<double> weights;  // w_i >= 0

  std::size_t n_terms() const { return speeds.size(); }
  void validate() const;

  // Geometric cells on [x_min, x_max]; node at each cell's geometric midpoint,
  // weight equal to the mu-mass of the cell.
  static OUApproxConfig geometric(double hurst, int n_terms, double x_min = 1e-3,
                                  double x_max = 1e3);
};

// Batch generators. All are deterministic in (cfg, n_paths): path p draws from
// its own counter-based stream, so results do not depend on thread count.
PathSet simulate_rbergomi(const MarketConfig& cfg, std::size_t n_paths);
PathSet simulate_volterra_exact(const MarketConfig& cfg, std::size_t n_paths);
PathSet simulate_heston(const MarketConfig& cfg, std::size_t n_paths);
PathSet simulate_black_scholes(const MarketConfig& cfg, std::size_t n_paths);
PathSet simulate_ou_approx(const MarketConfig& cfg, const OUApproxConfig& ou,
                           std::size_t n_paths);
// Dispatches on cfg.model.
PathSet simulate(const MarketConfig& cfg, std::size_t n_paths);

inline constexpr int kMaxExactSteps = 256;

// Traded forward variance FV_t = E[V_{T_fwd} | F_t] from the auxiliary values
// theta_k = sqrt(2H) nu int_0^{t_k} (T_fwd - r)^(H-1/2) dW_r on the grid.
std::vector<double> forward_variance_path(std::span<const double> theta,
                                          std::span<const double> grid,
                                          const MarketConfig& cfg);

// Covariance of (dW_1..n, X_1..n, Theta_1..n) used by the exact sampler, where
// X_k = int_0^{t_k} (t_k - r)^alpha dW and Theta_k = int_0^{t_k} (T_fwd - r)^alpha dW.
Eigen::MatrixXd volterra_joint_covariance(std::span<const double> grid, double fwd_maturity,
                                          double hurst);

// Single long paths of the driving Gaussian process, for roughness studies.
// X_k ~ int_0^{t_k} (t_k - r)^(H-1/2) dW_r by the hybrid scheme.
std::vector<double> hybrid_volterra_path(double hurst, std::size_t n_steps, double dt,
                                         std::uint64_t seed, std::uint64_t stream = 0);
// Bhat_k = sum_i w_i Y^{x_i}_{t_k}, exact joint OU transitions.
std::vector<double> ou_fbm_path(const OUApproxConfig& ou, std::size_t n_steps, double dt,
                                std::uint64_t seed, std::uint64_t stream = 0);

// log(V_t / xi0) + nu^2 t^(2H) / 2 for one rBergomi-type path: the Gaussian
// driver sqrt(2H) nu X_t with the deterministic compensator removed.
std::vector<double> compensated_log_variance(const PathSet& paths, const MarketConfig& cfg,
                                             std::size_t path);

}  // namespace roughhedge
