#include "roughhedge/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roughhedge/error.hpp"
#include "roughhedge/kernels.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/rng.hpp"

namespace roughhedge {

namespace {

// Stream tags keep the samplers' noise independent for a shared seed.
constexpr std::uint64_t kTagHybrid = 0x4859'4252'4944ull;
constexpr std::uint64_t kTagExact = 0x4558'4143'54ull;
constexpr std::uint64_t kTagHeston = 0x4845'5354'4f4eull;
constexpr std::uint64_t kTagBlackScholes = 0x4253ull;
constexpr std::uint64_t kTagOU = 0x4f55'4150'5052ull;

// Antithetic batches pair path 2q with 2q + 1 on the same stream, negated.
struct PathNoise {
  StreamRng rng;
  double sign;

  PathNoise(std::uint64_t key, std::size_t path, bool antithetic)
      : rng(key, antithetic ? path / 2 : path),
        sign(antithetic && (path % 2 == 1) ? -1.0 : 1.0) {}

  double normal() { return sign * rng.normal(); }
};

void check_rbergomi(const MarketConfig& cfg, std::size_t n_paths) {
  cfg.validate();
  require(n_paths >= 1, ErrorKind::InvalidArgument, "n_paths must be >= 1");
  require(!cfg.antithetic || n_paths % 2 == 0, ErrorKind::InvalidArgument,
          "antithetic sampling needs an even number of paths");
}

// Cell averages of the forward kernel (T_fwd - r)^alpha; projecting the cell
// integral on dW gives the auxiliary increment used for the traded forward variance.
std::vector<double> forward_kernel_weights(std::span<const double> grid, double fwd_maturity,
                                           double alpha) {
  const std::size_t n = grid.size() - 1;
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double len = grid[j + 1] - grid[j];
    c[j] = kernel::power_integral(fwd_maturity, grid[j], grid[j + 1], alpha) / len;
  }
  return c;
}

void check_finite_row(const PathSet& ps, std::size_t p) {
  for (std::size_t k = 0; k <= ps.n_steps; ++k) {
    const double s = ps.s(p, k), v = ps.v(p, k), f = ps.fv(p, k);
    const bool ok = std::isfinite(s) && s > 0.0 && std::isfinite(v) && v >= 0.0 &&
                    std::isfinite(f) && f > 0.0;
    if (!ok) {
      std::ostringstream msg;
      msg << "non-finite or nonpositive value on path " << p << " at step " << k
          << " (S=" << s << ", V=" << v << ", FV=" << f << ")";
      fail(ErrorKind::Overflow, msg.str());
    }
  }
}

// Builds V, FV and S of path p from its drivers. x holds X_0..X_n (X_0 = 0),
// theta the unscaled auxiliary values int_0^{t_k} (T_fwd - r)^alpha dW.
void assemble_rbergomi_row(const MarketConfig& cfg, PathSet& ps, std::size_t p,
                           std::span<const double> x, std::span<const double> theta) {
  const std::size_t n = ps.n_steps;
  const double h = cfg.hurst;
  const double scale = std::sqrt(2.0 * h) * cfg.nu;
  const double half_nu2 = 0.5 * cfg.nu * cfg.nu;
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));

  for (std::size_t k = 0; k <= n; ++k) {
    const double t = ps.grid[k];
    ps.v(p, k) = k == 0 ? cfg.xi0
                        : cfg.xi0 * std::exp(scale * x[k] - half_nu2 * std::pow(t, 2.0 * h));
  }

  std::vector<double> th(n + 1);
  for (std::size_t k = 0; k <= n; ++k) th[k] = scale * theta[k];
  const auto fv = forward_variance_path(th, ps.grid, cfg);
  std::copy(fv.begin(), fv.end(), ps.FV.begin() + p * ps.width());

  ps.s(p, 0) = cfg.s0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = ps.grid[k + 1] - ps.grid[k];
    const double v = ps.v(p, k);
    const double dz = cfg.rho * ps.dw(p, k) + rho_bar * ps.db(p, k);
    ps.s(p, k + 1) = ps.s(p, k) * std::exp(std::sqrt(v) * dz - 0.5 * v * dt);
  }
  check_finite_row(ps, p);
}

}  // namespace

void OUApproxConfig::validate() const {
  require(!speeds.empty(), ErrorKind::InvalidArgument, "OU quadrature is empty");
  require(speeds.size() == weights.size(), ErrorKind::Structural,
          "OU speeds and weights differ in length");
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    require(speeds[i] >= 0.0 && weights[i] >= 0.0, ErrorKind::InvalidArgument,
            "OU speeds and weights must be nonnegative");
    require(i == 0 || speeds[i] > speeds[i - 1], ErrorKind::InvalidArgument,
            "OU speeds must be increasing");
  }
}

OUApproxConfig OUApproxConfig::geometric(double hurst, int n_terms, double x_min,
                                         double x_max) {
  require(n_terms >= 1, ErrorKind::InvalidArgument, "OU quadrature is empty");
  require(hurst > 0.0 && hurst <= 0.5, ErrorKind::Domain,
          "the OU mixture representation needs hurst in (0, 1/2]");
  if (hurst == 0.5) {
    // kernel == 1: a single zero-speed factor, i.e. Brownian motion itself
    return OUApproxConfig{{0.0}, {1.0}};
  }
  require(0.0 < x_min && x_min < x_max, ErrorKind::InvalidArgument, "need 0 < x_min < x_max");
  const double a = hurst + 0.5;
  // mu([lo, hi]) = (hi^(1-a) - lo^(1-a)) / ((1-a) Gamma(a) Gamma(1-a))
  const double norm = std::tgamma(a) * std::tgamma(1.0 - a);
  OUApproxConfig ou;
  const double ratio = std::pow(x_max / x_min, 1.0 / n_terms);
  for (int i = 0; i < n_terms; ++i) {
    const double lo = x_min * std::pow(ratio, i);
    const double hi = lo * ratio;
    ou.speeds.push_back(std::sqrt(lo * hi));
    ou.weights.push_back((std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a)) / ((1.0 - a) * norm));
  }
  return ou;
}

std::vector<double> forward_variance_path(std::span<const double> theta,
                                          std::span<const double> grid,
                                          const MarketConfig& cfg) {
  require(theta.size() == grid.size(), ErrorKind::Structural,
          "theta and grid lengths differ");
  const double h2 = 2.0 * cfg.hurst;
  const double tf = cfg.fwd_maturity;
  std::vector<double> fv(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    require(grid[k] < tf, ErrorKind::Domain,
            "forward variance undefined at or beyond its maturity");
  }
  if (cfg.fv_scheme == ForwardVarianceScheme::Exact) {
    const double half_nu2 = 0.5 * cfg.nu * cfg.nu;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      fv[k] = cfg.xi0 *
              std::exp(theta[k] + half_nu2 * (std::pow(tf - grid[k], h2) - std::pow(tf, h2)));
    }
  } else {
    // Euler-Maruyama on dFV = FV dTheta.
    fv[0] = cfg.xi0 * std::exp(theta[0]);
    for (std::size_t k = 1; k < theta.size(); ++k) {
      fv[k] = fv[k - 1] * (1.0 + theta[k] - theta[k - 1]);
    }
  }
  return fv;
}

PathSet simulate_rbergomi(const MarketConfig& cfg, std::size_t n_paths) {
  require(cfg.model == ModelKind::RoughBergomi, ErrorKind::InvalidArgument,
          "simulate_rbergomi needs model = rbergomi");
  check_rbergomi(cfg, n_paths);
  const std::size_t n = cfg.n_steps();
  const double alpha = cfg.hurst - 0.5;
  const double dt = cfg.dt();

  PathSet ps(n_paths, n);
  ps.source = PathSource::Hybrid;
  ps.grid = cfg.grid();

  const auto weights = kernel::hybrid_weights(static_cast<int>(n), dt, alpha);
  const auto cell = kernel::hybrid_cell_covariance(dt, alpha);
  const double l11 = std::sqrt(cell.var_dw);
  const double l21 = cell.cov / l11;
  const double l22 = std::sqrt(std::max(0.0, cell.var_exact - l21 * l21));
  const auto fwd_w = forward_kernel_weights(ps.grid, cfg.fwd_maturity, alpha);
  const std::uint64_t key = derive_seed(cfg.seed, kTagHybrid);

  parallel_for(n_paths, [&](std::size_t p) {
    PathNoise noise(key, p, cfg.antithetic);
    std::vector<double> w1(n), x(n + 1, 0.0), theta(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double z1 = noise.normal();
      const double z2 = noise.normal();
      const double z3 = noise.normal();
      ps.dw(p, k) = l11 * z1;
      w1[k] = l21 * z1 + l22 * z2;
      ps.db(p, k) = std::sqrt(dt) * z3;
    }
    const double* dw = &ps.dW[p * n];
    for (std::size_t i = 1; i <= n; ++i) {
      // cell i-1 (0-based) is the nearest one and enters exactly
      double acc = w1[i - 1];
      for (std::size_t d = 1; d < i; ++d) acc += weights[d] * dw[i - 1 - d];
      x[i] = acc;
      theta[i] = theta[i - 1] + fwd_w[i - 1] * dw[i - 1];
    }
    assemble_rbergomi_row(cfg, ps, p, x, theta);
  });
  return ps;
}

Eigen::MatrixXd volterra_joint_covariance(std::span<const double> grid, double fwd_maturity,
                                          double hurst) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size()) - 1;
  const double alpha = hurst - 0.5;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  const double tf = fwd_maturity;
  // index helpers: dW_j -> j, X_i -> n + i - 1, Theta_i -> 2n + i - 1 (i = 1..n)
  for (Eigen::Index j = 0; j < n; ++j) c(j, j) = grid[j + 1] - grid[j];
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double ti = grid[i];
    for (Eigen::Index j = 1; j <= i; ++j) {
      const double xw = kernel::power_integral(ti, grid[j - 1], grid[j], alpha);
      c(n + i - 1, j - 1) = c(j - 1, n + i - 1) = xw;
      const double tw = kernel::power_integral(tf, grid[j - 1], grid[j], alpha);
      c(2 * n + i - 1, j - 1) = c(j - 1, 2 * n + i - 1) = tw;
    }
  }
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index l = i; l <= n; ++l) {
      const double xx = kernel::product_integral(grid[i], grid[l], alpha);
      c(n + i - 1, n + l - 1) = c(n + l - 1, n + i - 1) = xx;
      const double tt = kernel::squared_integral(tf, 0.0, grid[i], alpha);
      c(2 * n + i - 1, 2 * n + l - 1) = c(2 * n + l - 1, 2 * n + i - 1) = tt;
    }
  }
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index k = 1; k <= n; ++k) {
      const double m = std::min(grid[i], grid[k]);
      const double xt = kernel::product_integral(m, grid[i], tf, alpha);
      c(n + i - 1, 2 * n + k - 1) = c(2 * n + k - 1, n + i - 1) = xt;
    }
  }
  return c;
}

PathSet simulate_volterra_exact(const MarketConfig& cfg, std::size_t n_paths) {
  require(cfg.model == ModelKind::RoughBergomi, ErrorKind::InvalidArgument,
          "simulate_volterra_exact needs model = rbergomi");
  check_rbergomi(cfg, n_paths);
  const std::size_t n = cfg.n_steps();
  if (n > static_cast<std::size_t>(kMaxExactSteps)) {
    std::ostringstream msg;
    msg << "exact sampler grid has " << n << " steps; dense factorization is limited to "
        << kMaxExactSteps;
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  PathSet ps(n_paths, n);
  ps.source = PathSource::Exact;
  ps.grid = cfg.grid();

  const CovarianceFactor factor(volterra_joint_covariance(ps.grid, cfg.fwd_maturity, cfg.hurst),
                               CovarianceFactor::Method::Spectral);
  const std::uint64_t key = derive_seed(cfg.seed, kTagExact);

  parallel_for(n_paths, [&](std::size_t p) {
    PathNoise noise(key, p, cfg.antithetic);
    std::vector<double> z(3 * n), y(3 * n);
    for (double& v : z) v = noise.normal();
    factor.apply(z, y);
    std::vector<double> x(n + 1, 0.0), theta(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      ps.dw(p, k) = y[k];
      x[k + 1] = y[n + k];
      theta[k + 1] = y[2 * n + k];
      ps.db(p, k) = std::sqrt(ps.grid[k + 1] - ps.grid[k]) * noise.normal();
    }
    assemble_rbergomi_row(cfg, ps, p, x, theta);
  });
  return ps;
}

PathSet simulate_heston(const MarketConfig& cfg, std::size_t n_paths) {
  require(cfg.model == ModelKind::Heston, ErrorKind::InvalidArgument,
          "simulate_heston needs model = heston");
  check_rbergomi(cfg, n_paths);
  const std::size_t n = cfg.n_steps();
  const auto& hp = cfg.heston;
  PathSet ps(n_paths, n);
  ps.source = PathSource::Heston;
  ps.grid = cfg.grid();
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));
  const std::uint64_t key = derive_seed(cfg.seed, kTagHeston);

  parallel_for(n_paths, [&](std::size_t p) {
    PathNoise noise(key, p, cfg.antithetic);
    // full truncation Euler; the stored variance is the truncated one
    double v = hp.v0;
    ps.s(p, 0) = cfg.s0;
    ps.v(p, 0) = hp.v0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dt = ps.grid[k + 1] - ps.grid[k];
      const double vp = std::max(v, 0.0);
      const double dw = std::sqrt(dt) * noise.normal();
      const double db = std::sqrt(dt) * noise.normal();
      ps.dw(p, k) = dw;
      ps.db(p, k) = db;
      const double dz = cfg.rho * dw + rho_bar * db;
      ps.s(p, k + 1) = ps.s(p, k) * std::exp(std::sqrt(vp) * dz - 0.5 * vp * dt);
      v = v + hp.alpha * (hp.b - vp) * dt + hp.sigma * std::sqrt(vp) * dw;
      ps.v(p, k + 1) = std::max(v, 0.0);
    }
    for (std::size_t k = 0; k <= n; ++k) {
      const double decay = std::exp(-hp.alpha * (cfg.fwd_maturity - ps.grid[k]));
      ps.fv(p, k) = hp.b + (ps.v(p, k) - hp.b) * decay;
    }
    check_finite_row(ps, p);
  });
  return ps;
}

PathSet simulate_black_scholes(const MarketConfig& cfg, std::size_t n_paths) {
  require(cfg.model == ModelKind::BlackScholes, ErrorKind::InvalidArgument,
          "simulate_black_scholes needs model = blackscholes");
  check_rbergomi(cfg, n_paths);
  const std::size_t n = cfg.n_steps();
  PathSet ps(n_paths, n);
  ps.source = PathSource::BlackScholes;
  ps.grid = cfg.grid();
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));
  const double vol = std::sqrt(cfg.xi0);
  const std::uint64_t key = derive_seed(cfg.seed, kTagBlackScholes);

  parallel_for(n_paths, [&](std::size_t p) {
    PathNoise noise(key, p, cfg.antithetic);
    ps.s(p, 0) = cfg.s0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dt = ps.grid[k + 1] - ps.grid[k];
      ps.dw(p, k) = std::sqrt(dt) * noise.normal();
      ps.db(p, k) = std::sqrt(dt) * noise.normal();
      const double dz = cfg.rho * ps.dw(p, k) + rho_bar * ps.db(p, k);
      ps.s(p, k + 1) = ps.s(p, k) * std::exp(vol * dz - 0.5 * cfg.xi0 * dt);
    }
    for (std::size_t k = 0; k <= n; ++k) {
      ps.v(p, k) = cfg.xi0;
      ps.fv(p, k) = cfg.xi0;
    }
    check_finite_row(ps, p);
  });
  return ps;
}

namespace {

// Joint covariance of (dW, eps_1..eps_m) over one step of length dt, where
// eps_i = int_0^dt exp(-x_i (dt - s)) dW_s.
Eigen::MatrixXd ou_step_covariance(const OUApproxConfig& ou, double dt) {
  const Eigen::Index m = static_cast<Eigen::Index>(ou.n_terms());
  auto integral = [dt](double rate) {
    return rate == 0.0 ? dt : -std::expm1(-rate * dt) / rate;
  };
  Eigen::MatrixXd c(m + 1, m + 1);
  c(0, 0) = dt;
  for (Eigen::Index i = 0; i < m; ++i) {
    c(0, i + 1) = c(i + 1, 0) = integral(ou.speeds[i]);
    for (Eigen::Index j = 0; j < m; ++j) {
      c(i + 1, j + 1) = integral(ou.speeds[i] + ou.speeds[j]);
    }
  }
  return c;
}

struct OUStepper {
  CovarianceFactor factor;
  std::vector<double> decay;

  OUStepper(const OUApproxConfig& ou, double dt)
      : factor(ou_step_covariance(ou, dt), CovarianceFactor::Method::Spectral, 1e-8) {
    for (double x : ou.speeds) decay.push_back(std::exp(-x * dt));
  }
};

}  // namespace

std::vector<double> ou_fbm_path(const OUApproxConfig& ou, std::size_t n_steps, double dt,
                                std::uint64_t seed, std::uint64_t stream) {
  ou.validate();
  const OUStepper stepper(ou, dt);
  const std::size_t m = ou.n_terms();
  StreamRng rng(derive_seed(seed, kTagOU), stream);
  std::vector<double> y(m, 0.0), z(m + 1), e(m + 1), out(n_steps + 1, 0.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    rng.fill_normal(z);
    stepper.factor.apply(z, e);
    double b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      y[i] = stepper.decay[i] * y[i] + e[i + 1];
      b += ou.weights[i] * y[i];
    }
    out[k + 1] = b;
  }
  return out;
}

PathSet simulate_ou_approx(const MarketConfig& cfg, const OUApproxConfig& ou,
                           std::size_t n_paths) {
  require(cfg.model == ModelKind::RoughBergomi, ErrorKind::InvalidArgument,
          "simulate_ou_approx needs model = rbergomi");
  check_rbergomi(cfg, n_paths);
  ou.validate();
  const std::size_t n = cfg.n_steps();
  const double dt = cfg.dt();
  const double alpha = cfg.hurst - 0.5;
  PathSet ps(n_paths, n);
  ps.source = PathSource::OUApprox;
  ps.grid = cfg.grid();
  const OUStepper stepper(ou, dt);
  const std::size_t m = ou.n_terms();
  // Riemann-Liouville normalization: int_0^t (t-r)^alpha dW = Gamma(H + 1/2) B^H_t
  const double rl = std::tgamma(cfg.hurst + 0.5);
  const auto fwd_w = forward_kernel_weights(ps.grid, cfg.fwd_maturity, alpha);
  const std::uint64_t key = derive_seed(cfg.seed, kTagOU);

  parallel_for(n_paths, [&](std::size_t p) {
    PathNoise noise(key, p, cfg.antithetic);
    std::vector<double> y(m, 0.0), z(m + 1), e(m + 1);
    std::vector<double> x(n + 1, 0.0), theta(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (double& v : z) v = noise.normal();
      stepper.factor.apply(z, e);
      ps.dw(p, k) = e[0];
      ps.db(p, k) = std::sqrt(dt) * noise.normal();
      double b = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        y[i] = stepper.decay[i] * y[i] + e[i + 1];
        b += ou.weights[i] * y[i];
      }
      x[k + 1] = rl * b;
      theta[k + 1] = theta[k] + fwd_w[k] * e[0];
    }
    assemble_rbergomi_row(cfg, ps, p, x, theta);
  });
  return ps;
}

PathSet simulate(const MarketConfig& cfg, std::size_t n_paths) {
  switch (cfg.model) {
    case ModelKind::RoughBergomi: return simulate_rbergomi(cfg, n_paths);
    case ModelKind::Heston: return simulate_heston(cfg, n_paths);
    case ModelKind::BlackScholes: return simulate_black_scholes(cfg, n_paths);
  }
  fail(ErrorKind::InvalidArgument, "unknown model");
}

std::vector<double> hybrid_volterra_path(double hurst, std::size_t n_steps, double dt,
                                         std::uint64_t seed, std::uint64_t stream) {
  require(hurst > 0.0 && hurst < 1.0, ErrorKind::Domain, "hurst must lie in (0,1)");
  const double alpha = hurst - 0.5;
  const auto weights = kernel::hybrid_weights(static_cast<int>(n_steps), dt, alpha);
  const auto cell = kernel::hybrid_cell_covariance(dt, alpha);
  const double l11 = std::sqrt(cell.var_dw);
  const double l21 = cell.cov / l11;
  const double l22 = std::sqrt(std::max(0.0, cell.var_exact - l21 * l21));
  StreamRng rng(derive_seed(seed, kTagHybrid), stream);
  std::vector<double> dw(n_steps), w1(n_steps), x(n_steps + 1, 0.0);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    dw[k] = l11 * z1;
    w1[k] = l21 * z1 + l22 * z2;
  }
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double acc = w1[i - 1];
    for (std::size_t d = 1; d < i; ++d) acc += weights[d] * dw[i - 1 - d];
    x[i] = acc;
  }
  return x;
}

std::vector<double> compensated_log_variance(const PathSet& paths, const MarketConfig& cfg,
                                             std::size_t path) {
  require(path < paths.n_paths, ErrorKind::Structural, "path index out of range");
  std::vector<double> out(paths.width());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::log(paths.v(path, k) / cfg.xi0) +
             0.5 * cfg.nu * cfg.nu * std::pow(paths.grid[k], 2.0 * cfg.hurst);
  }
  return out;
}

}  // namespace roughhedge
