#pragma once

#include <span>
#include <vector>

namespace roughhedge::stats {

struct MeanEstimate {
  double mean;
  double std_error;
  double stdev;
};

MeanEstimate mean_estimate(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased

// Linear interpolation between order statistics (type 7).
double quantile(std::vector<double> xs, double q);
double quantile_sorted(std::span<const double> sorted, double q);

struct KsResult {
  double statistic;
  double p_value;
};
// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope;
  double intercept;
  double slope_stderr;
  double r_squared;
};
LinearFit ols(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation (no tie correction needed for continuous data).
double spearman(std::span<const double> x, std::span<const double> y);

double normal_cdf(double x);
double normal_pdf(double x);

// Black-Scholes call with zero rates; total variance sigma^2 * tau.
double bs_call(double spot, double strike, double sigma, double tau);
double bs_call_delta(double spot, double strike, double sigma, double tau);

}  // namespace roughhedge::stats
