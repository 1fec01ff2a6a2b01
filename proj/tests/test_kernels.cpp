#include "doctest.h"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "roughhedge/error.hpp"
#include "roughhedge/kernels.hpp"
#include "roughhedge/simulation.hpp"

using namespace roughhedge;
using doctest::Approx;

namespace {
double quad(auto f, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, lo, hi);
}

// f(r, hi - r) with the distance to the upper end taken from the
// quadrature's complement, which stays accurate next to the singularity.
double quad_upper(auto f, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double mid = 0.5 * (lo + hi);
  return ts.integrate([&](double r, double rc) { return f(r, r > mid ? rc : hi - r); }, lo,
                      hi);
}
}  // namespace

TEST_CASE("power integrals match quadrature") {
  for (double alpha : {-0.4, -0.2, 0.0, 0.1, 0.3}) {
    CAPTURE(alpha);
    const double t = 0.7, lo = 0.1, hi = 0.7;
    const double q1 = quad_upper([&](double, double d) { return std::pow(d, alpha); }, lo, hi);
    CHECK(kernel::power_integral(t, lo, hi, alpha) == Approx(q1).epsilon(1e-10));
    const double q2 =
        quad_upper([&](double, double d) { return std::pow(d, 2 * alpha); }, lo, hi);
    CHECK(kernel::squared_integral(t, lo, hi, alpha) == Approx(q2).epsilon(1e-10));
  }
}

TEST_CASE("product integral matches quadrature and special cases") {
  for (double alpha : {-0.45, -0.4, -0.25, 0.2, 0.4}) {
    for (auto [s, t] : {std::pair{0.3, 0.5}, {0.5, 0.5001}, {0.01, 1.0}, {0.2, 0.2}}) {
      CAPTURE(alpha);
      CAPTURE(s);
      CAPTURE(t);
      const double q = quad_upper(
          [&](double, double d) { return std::pow(d, alpha) * std::pow(t - s + d, alpha); },
          0.0, s);
      CHECK(kernel::product_integral(s, t, alpha) == Approx(q).epsilon(1e-9));
    }
  }
  // diagonal: int_0^s (s-r)^(2 alpha) dr
  CHECK(kernel::product_integral(0.4, 0.4, -0.3) ==
        Approx(std::pow(0.4, 0.4) / 0.4).epsilon(1e-12));
  // alpha = 0: Cov(W_s, W_t) = min(s, t)
  CHECK(kernel::product_integral(0.3, 0.9, 0.0) == Approx(0.3).epsilon(1e-14));
  // truncated form
  const double alpha = -0.4, m = 0.2, s = 0.5, t = 0.8;
  const double q = quad(
      [&](double r) { return std::pow(s - r, alpha) * std::pow(t - r, alpha); }, 0.0, m);
  CHECK(kernel::product_integral(m, s, t, alpha) == Approx(q).epsilon(1e-9));
}

TEST_CASE("hybrid weights are cell averages of the kernel") {
  const double dt = 1.0 / 365, alpha = -0.4;
  const auto w = kernel::hybrid_weights(10, dt, alpha);
  for (int j = 1; j < 10; ++j) {
    const double avg = kernel::power_integral((j + 1) * dt, 0.0, dt, alpha) / dt;
    CHECK(w[j] == Approx(avg).epsilon(1e-12));
  }
  const auto c = kernel::hybrid_cell_covariance(dt, alpha);
  CHECK(c.var_dw == dt);
  CHECK(c.cov == Approx(kernel::power_integral(dt, 0.0, dt, alpha)).epsilon(1e-12));
  CHECK(c.var_exact == Approx(kernel::squared_integral(dt, 0.0, dt, alpha)).epsilon(1e-12));
}

TEST_CASE("covariance factor reproduces the matrix") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 2, 0.6, 2, 2, 0.5, 0.6, 0.5, 1;
  for (auto method : {CovarianceFactor::Method::Ldlt, CovarianceFactor::Method::Spectral}) {
    const CovarianceFactor f(a, method);
    CHECK((f.matrix() * f.matrix().transpose() - a).norm() < 1e-12);
  }
  // rank-deficient but semidefinite
  Eigen::MatrixXd s(2, 2);
  s << 1, 1, 1, 1;
  const CovarianceFactor fs(s, CovarianceFactor::Method::Spectral);
  CHECK((fs.matrix() * fs.matrix().transpose() - s).norm() < 1e-12);
  // clearly indefinite
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  for (auto method : {CovarianceFactor::Method::Ldlt, CovarianceFactor::Method::Spectral}) {
    try {
      CovarianceFactor f(bad, method);
      FAIL("expected an indefiniteness error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numerical);
    }
  }
}

TEST_CASE("joint Volterra covariance at H = 1/2 is Brownian") {
  MarketConfig cfg;
  cfg.hurst = 0.5;
  cfg.trading_days = 8;
  cfg.maturity = 8.0 / 365;
  const auto grid = cfg.grid();
  const auto c = volterra_joint_covariance(grid, cfg.fwd_maturity, 0.5);
  const Eigen::Index n = 8;
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index l = 1; l <= n; ++l) {
      const double expect = std::min(grid[i], grid[l]);
      CHECK(c(n + i - 1, n + l - 1) == Approx(expect).epsilon(1e-12));
      CHECK(c(n + i - 1, 2 * n + l - 1) == Approx(expect).epsilon(1e-12));
    }
  }
}
