#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace roughhedge {

enum class ModelKind { RoughBergomi, Heston, BlackScholes };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

// How the traded forward-variance price is built from the auxiliary process.
enum class ForwardVarianceScheme { Exact, Euler };

struct HestonParams {
  double alpha = 1.0;   // mean-reversion speed
  double b = 0.04;      // long-run variance
  double sigma = 0.8;   // vol of variance
  double v0 = 0.04;
};

inline constexpr double kDaysPerYear = 365.0;

struct MarketConfig {
  ModelKind model = ModelKind::RoughBergomi;
  double hurst = 0.1;
  double nu = 1.9;
  double rho = -0.7;
  double xi0 = 0.235 * 0.235;
  double s0 = 100.0;
  double maturity = 30.0 / kDaysPerYear;
  double fwd_maturity = 45.0 / kDaysPerYear;
  // Rebalancing frequency; fractional values give multi-day steps (0.5 = every
  // other day). trading_days * steps_per_day must be a positive integer.
  double steps_per_day = 1.0;
  int trading_days = 30;
  HestonParams heston{};
  std::uint64_t seed = 1;
  ForwardVarianceScheme fv_scheme = ForwardVarianceScheme::Exact;
  bool antithetic = false;

  int n_steps() const;
  double dt() const { return maturity / n_steps(); }
  std::vector<double> grid() const;
  // Throws Error(InvalidArgument/Domain) on any violated invariant.
  void validate() const;
};

// Where a path set came from. The model hedge needs the hybrid-scheme
// discretization to rebuild conditional forward-variance curves.
enum class PathSource { Hybrid, Exact, Heston, BlackScholes, OUApprox, External };

const char* to_string(PathSource src);

// A batch of simulated paths. Per-time arrays are row-major
// [path][0..n_steps], per-step arrays are [path][0..n_steps-1].
struct PathSet {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  PathSource source = PathSource::External;
  std::vector<double> grid;
  std::vector<double> S;
  std::vector<double> V;
  std::vector<double> FV;
  std::vector<double> dW;
  std::vector<double> dB;
  std::vector<double> payoff;

  PathSet() = default;
  PathSet(std::size_t paths, std::size_t steps);

  std::size_t width() const { return n_steps + 1; }

  double& s(std::size_t p, std::size_t k) { return S[p * width() + k]; }
  double s(std::size_t p, std::size_t k) const { return S[p * width() + k]; }
  double& v(std::size_t p, std::size_t k) { return V[p * width() + k]; }
  double v(std::size_t p, std::size_t k) const { return V[p * width() + k]; }
  double& fv(std::size_t p, std::size_t k) { return FV[p * width() + k]; }
  double fv(std::size_t p, std::size_t k) const { return FV[p * width() + k]; }
  double& dw(std::size_t p, std::size_t k) { return dW[p * n_steps + k]; }
  double dw(std::size_t p, std::size_t k) const { return dW[p * n_steps + k]; }
  double& db(std::size_t p, std::size_t k) { return dB[p * n_steps + k]; }
  double db(std::size_t p, std::size_t k) const { return dB[p * n_steps + k]; }

  std::span<const double> stock_path(std::size_t p) const {
    return {S.data() + p * width(), width()};
  }
  std::span<const double> variance_path(std::size_t p) const {
    return {V.data() + p * width(), width()};
  }
  std::span<const double> fv_path(std::size_t p) const {
    return {FV.data() + p * width(), width()};
  }

  // Copies a contiguous range of paths.
  PathSet slice(std::size_t first, std::size_t count) const;
};

}  // namespace roughhedge
