#include "roughhedge/kernels.hpp"

#include <cmath>
#include <sstream>

#include "roughhedge/error.hpp"

namespace roughhedge::kernel {

namespace {

// (a^(p) - b^(p)) / p with the p -> 0 limit log(a / b).
double power_difference(double a, double b, double p) {
  if (std::abs(p) < 1e-14) return std::log(a / b);
  const double pa = a > 0.0 ? std::pow(a, p) : 0.0;
  const double pb = b > 0.0 ? std::pow(b, p) : 0.0;
  return (pa - pb) / p;
}

}  // namespace

double power_integral(double t, double lo, double hi, double alpha) {
  require(lo <= hi && hi <= t + 1e-15, ErrorKind::Domain, "power_integral: need lo <= hi <= t");
  return power_difference(t - lo, std::max(t - hi, 0.0), alpha + 1.0);
}

double squared_integral(double t, double lo, double hi, double alpha) {
  require(lo <= hi && hi <= t + 1e-15, ErrorKind::Domain,
          "squared_integral: need lo <= hi <= t");
  return power_difference(t - lo, std::max(t - hi, 0.0), 2.0 * alpha + 1.0);
}

double hyp2f1_power(double alpha, double z) {
  require(z >= 0.0 && z < 1.0, ErrorKind::Domain, "hyp2f1_power: need 0 <= z < 1");
  // term_{n+1} / term_n = (n - alpha) / (n + alpha + 2) * z
  double term = 1.0;
  double sum = 1.0;
  for (long n = 0; n < 50'000'000; ++n) {
    term *= (n - alpha) / (n + alpha + 2.0) * z;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) return sum;
  }
  fail(ErrorKind::Numerical, "hyp2f1_power: series did not converge");
}

double product_integral(double s, double t, double alpha) {
  require(0.0 <= s && s <= t, ErrorKind::Domain, "product_integral: need 0 <= s <= t");
  if (s == 0.0) return 0.0;
  if (s == t) return std::pow(s, 2.0 * alpha + 1.0) / (2.0 * alpha + 1.0);
  return std::pow(s, alpha + 1.0) * std::pow(t, alpha) / (alpha + 1.0) *
         hyp2f1_power(alpha, s / t);
}

double product_integral(double m, double s, double t, double alpha) {
  require(0.0 <= m && m <= s && s <= t, ErrorKind::Domain,
          "product_integral: need 0 <= m <= s <= t");
  if (m == s) return product_integral(s, t, alpha);
  // Shifting r -> r + m turns the tail int_m^s into the same integral on [0, s - m].
  return product_integral(s, t, alpha) - product_integral(s - m, t - m, alpha);
}

std::vector<double> hybrid_weights(int n, double dt, double alpha) {
  std::vector<double> w(std::max(n, 1), 0.0);
  const double scale = std::pow(dt, alpha);
  for (int j = 1; j < n; ++j) {
    const double k = j + 1.0;
    w[j] = scale * power_difference(k, k - 1.0, alpha + 1.0);
  }
  return w;
}

HybridCellCovariance hybrid_cell_covariance(double dt, double alpha) {
  return {dt, std::pow(dt, alpha + 1.0) / (alpha + 1.0),
          std::pow(dt, 2.0 * alpha + 1.0) / (2.0 * alpha + 1.0)};
}

}  // namespace roughhedge::kernel

namespace roughhedge {

CovarianceFactor::CovarianceFactor(const Eigen::MatrixXd& cov, Method method, double rel_tol) {
  require(cov.rows() == cov.cols(), ErrorKind::Structural, "covariance must be square");
  const Eigen::Index n = cov.rows();
  auto clamp_spectrum = [&](Eigen::VectorXd& d, const char* what) {
    const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d[i] >= 0.0) continue;
      if (d[i] < -rel_tol * scale) {
        std::ostringstream msg;
        msg << "covariance is indefinite: " << what << ' ' << i << " = " << d[i]
            << " (kernel integrals inconsistent)";
        fail(ErrorKind::Numerical, msg.str());
      }
      d[i] = 0.0;
    }
  };
  if (method == Method::Spectral) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    require(eig.info() == Eigen::Success, ErrorKind::Numerical,
            "covariance eigendecomposition failed");
    Eigen::VectorXd d = eig.eigenvalues();
    clamp_spectrum(d, "eigenvalue");
    factor_ = eig.eigenvectors() * d.cwiseSqrt().asDiagonal();
    return;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  require(ldlt.info() == Eigen::Success, ErrorKind::Numerical,
          "covariance is indefinite or singular: LDLT failed");
  Eigen::VectorXd d = ldlt.vectorD();
  clamp_spectrum(d, "pivot");
  // cov = P^T L D L^T P, so the factor is P^T L sqrt(D).
  Eigen::MatrixXd l = ldlt.matrixL();
  l = l * d.cwiseSqrt().asDiagonal();
  factor_ = ldlt.transpositionsP().transpose() * l;
}

void CovarianceFactor::apply(std::span<const double> z, std::span<double> out) const {
  const Eigen::Index n = dim();
  require(static_cast<Eigen::Index>(z.size()) == n && static_cast<Eigen::Index>(out.size()) == n,
          ErrorKind::Structural, "CovarianceFactor::apply size mismatch");
  Eigen::Map<const Eigen::VectorXd> zv(z.data(), n);
  Eigen::Map<Eigen::VectorXd> ov(out.data(), n);
  ov.noalias() = factor_ * zv;
}

}  // namespace roughhedge
