#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

// Integrals of the power kernel (t - r)^alpha, alpha = H - 1/2, that show up
// in covariances of Riemann-Liouville type Volterra processes.
namespace roughhedge::kernel {

// int_lo^hi (t - r)^alpha dr, requires lo <= hi <= t.
double power_integral(double t, double lo, double hi, double alpha);

// int_lo^hi (t - r)^(2 alpha) dr, requires lo <= hi <= t.
double squared_integral(double t, double lo, double hi, double alpha);

// Gauss hypergeometric 2F1(-alpha, 1; alpha + 2; z) for 0 <= z < 1.
double hyp2f1_power(double alpha, double z);

// int_0^s (s - r)^alpha (t - r)^alpha dr for 0 <= s <= t, i.e. Cov(X_s, X_t)
// for X_t = int_0^t (t - r)^alpha dW_r.
double product_integral(double s, double t, double alpha);

// int_0^m (s - r)^alpha (t - r)^alpha dr for 0 <= m <= s <= t.
double product_integral(double m, double s, double t, double alpha);

// Hybrid-scheme Riemann weights (kappa = 1): weight[j] multiplies the Brownian
// increment j + 1 cells back from the evaluation point, for j >= 1. It is the
// kernel evaluated at the optimal point b_j, which equals the cell average of
// the kernel. weight[0] is unused (the nearest cell is simulated exactly).
std::vector<double> hybrid_weights(int n, double dt, double alpha);

// Joint covariance of (dW, int_cell (t_i - r)^alpha dW_r) over one cell.
struct HybridCellCovariance {
  double var_dw;
  double cov;
  double var_exact;
};
HybridCellCovariance hybrid_cell_covariance(double dt, double alpha);

}  // namespace roughhedge::kernel

namespace roughhedge {

// Factor C = L L^T for a symmetric positive semidefinite covariance. Ldlt is
// a pivoted LDLT; Spectral uses an eigendecomposition and suits badly
// conditioned matrices. Negative pivots/eigenvalues within rel_tol of the
// largest are rounding and get clamped to zero; larger ones raise
// Error(Numerical).
class CovarianceFactor {
 public:
  enum class Method { Ldlt, Spectral };

  explicit CovarianceFactor(const Eigen::MatrixXd& cov, Method method = Method::Ldlt,
                            double rel_tol = 1e-10);

  Eigen::Index dim() const { return factor_.rows(); }
  const Eigen::MatrixXd& matrix() const { return factor_; }
  // out = L z
  void apply(std::span<const double> z, std::span<double> out) const;

 private:
  Eigen::MatrixXd factor_;
};

}  // namespace roughhedge
