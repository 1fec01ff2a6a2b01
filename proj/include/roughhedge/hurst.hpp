#pragma once

#include <span>
#include <vector>

namespace roughhedge {

struct HurstEstimate {
  double h_hat;
  double std_error;
  std::vector<int> lags;
  double r_squared;
};

std::vector<int> default_hurst_lags();  // 1..20

// Generalized Hurst exponent from the q-th order structure function:
// m_q(lag) = mean_t |x_{t+lag} - x_t|^q, H = slope(log m_q vs log lag) / q.
HurstEstimate estimate_hurst(std::span<const double> series, double q = 2.0,
                             std::span<const int> lags = {});

}  // namespace roughhedge
