#include "roughhedge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "roughhedge/error.hpp"

namespace roughhedge::stats {

MeanEstimate mean_estimate(std::span<const double> xs) {
  require(!xs.empty(), ErrorKind::InvalidArgument, "mean of an empty sample");
  const double n = static_cast<double>(xs.size());
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {m, sd / std::sqrt(n), sd};
}

double variance(std::span<const double> xs) {
  const auto e = mean_estimate(xs);
  return e.stdev * e.stdev;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorKind::InvalidArgument, "quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, q);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument, "KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double p = 0.0;
  if (lambda < 1e-3) {
    p = 1.0;
  } else {
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
  }
  return {d, p};
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument,
          "ols needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::Numerical, "ols: regressor has zero spread");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - intercept - slope * x[i];
    sse += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  const double r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return {slope, intercept, se, r2};
}

namespace {
std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}
}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const auto fit_xy = ols(rx, ry);
  const auto fit_yx = ols(ry, rx);
  const double r = std::sqrt(std::max(0.0, fit_xy.slope * fit_yx.slope));
  return fit_xy.slope >= 0.0 ? r : -r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double bs_call(double spot, double strike, double sigma, double tau) {
  if (tau <= 0.0 || sigma <= 0.0) return std::max(spot - strike, 0.0);
  if (strike <= 0.0) return spot;
  const double sd = sigma * std::sqrt(tau);
  const double d1 = (std::log(spot / strike) + 0.5 * sd * sd) / sd;
  return spot * normal_cdf(d1) - strike * normal_cdf(d1 - sd);
}

double bs_call_delta(double spot, double strike, double sigma, double tau) {
  if (strike <= 0.0) return 1.0;
  if (tau <= 0.0 || sigma <= 0.0) return spot > strike ? 1.0 : 0.0;
  const double sd = sigma * std::sqrt(tau);
  const double d1 = (std::log(spot / strike) + 0.5 * sd * sd) / sd;
  return normal_cdf(d1);
}

}  // namespace roughhedge::stats
