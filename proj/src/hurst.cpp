#include "roughhedge/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "roughhedge/error.hpp"
#include "roughhedge/stats.hpp"

namespace roughhedge {

std::vector<int> default_hurst_lags() {
  std::vector<int> lags(20);
  std::iota(lags.begin(), lags.end(), 1);
  return lags;
}

HurstEstimate estimate_hurst(std::span<const double> series, double q,
                             std::span<const int> lags_in) {
  require(q > 0.0, ErrorKind::InvalidArgument, "moment order q must be positive");
  std::vector<int> lags(lags_in.begin(), lags_in.end());
  if (lags.empty()) lags = default_hurst_lags();
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  require(lags.size() >= 2, ErrorKind::InvalidArgument, "need at least two distinct lags");
  require(lags.front() >= 1, ErrorKind::InvalidArgument, "lags must be positive");
  const std::size_t max_lag = static_cast<std::size_t>(lags.back());
  require(series.size() >= 10 * max_lag, ErrorKind::InvalidArgument,
          "series shorter than 10 x max lag");
  for (double x : series) {
    require(std::isfinite(x), ErrorKind::Numerical, "series contains non-finite values");
  }

  std::vector<double> log_lag, log_moment;
  for (int lag : lags) {
    const std::size_t l = static_cast<std::size_t>(lag);
    double acc = 0.0;
    for (std::size_t t = 0; t + l < series.size(); ++t) {
      acc += std::pow(std::abs(series[t + l] - series[t]), q);
    }
    const double m = acc / static_cast<double>(series.size() - l);
    require(m > 0.0, ErrorKind::Numerical,
            "degenerate structure function (constant series?)");
    log_lag.push_back(std::log(static_cast<double>(lag)));
    log_moment.push_back(std::log(m));
  }
  const auto fit = stats::ols(log_lag, log_moment);
  return {fit.slope / q, fit.slope_stderr / q, lags, fit.r_squared};
}

}  // namespace roughhedge
