#include "roughhedge/market.hpp"

#include <algorithm>
#include <cmath>

#include "roughhedge/error.hpp"

namespace roughhedge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RoughBergomi: return "rbergomi";
    case ModelKind::Heston: return "heston";
    case ModelKind::BlackScholes: return "blackscholes";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "rbergomi" || name == "rough_bergomi") return ModelKind::RoughBergomi;
  if (name == "heston") return ModelKind::Heston;
  if (name == "blackscholes" || name == "bs") return ModelKind::BlackScholes;
  fail(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

const char* to_string(PathSource src) {
  switch (src) {
    case PathSource::Hybrid: return "hybrid";
    case PathSource::Exact: return "exact";
    case PathSource::Heston: return "heston";
    case PathSource::BlackScholes: return "blackscholes";
    case PathSource::OUApprox: return "ou_approx";
    case PathSource::External: return "external";
  }
  return "unknown";
}

int MarketConfig::n_steps() const {
  const double n = steps_per_day * trading_days;
  return static_cast<int>(std::lround(n));
}

std::vector<double> MarketConfig::grid() const {
  const int n = n_steps();
  std::vector<double> t(n + 1);
  for (int k = 0; k <= n; ++k) t[k] = maturity * k / n;
  t[n] = maturity;
  return t;
}

void MarketConfig::validate() const {
  require(hurst > 0.0 && hurst < 1.0, ErrorKind::Domain, "hurst must lie in (0,1)");
  require(xi0 > 0.0, ErrorKind::InvalidArgument, "xi0 must be positive");
  require(s0 > 0.0, ErrorKind::InvalidArgument, "s0 must be positive");
  require(std::abs(rho) <= 1.0, ErrorKind::InvalidArgument, "|rho| must be <= 1");
  require(nu >= 0.0, ErrorKind::InvalidArgument, "nu must be nonnegative");
  require(maturity > 0.0, ErrorKind::InvalidArgument, "maturity must be positive");
  require(fwd_maturity > maturity, ErrorKind::Domain,
          "forward-variance maturity must exceed option maturity");
  require(trading_days >= 1, ErrorKind::InvalidArgument, "trading_days must be >= 1");
  require(steps_per_day > 0.0, ErrorKind::InvalidArgument, "steps_per_day must be positive");
  const double n = steps_per_day * trading_days;
  require(std::abs(n - std::round(n)) < 1e-9 && std::round(n) >= 1.0,
          ErrorKind::InvalidArgument,
          "trading_days * steps_per_day must be a positive integer");
  if (model == ModelKind::Heston) {
    require(heston.alpha > 0.0 && heston.b > 0.0 && heston.sigma > 0.0 && heston.v0 > 0.0,
            ErrorKind::InvalidArgument, "Heston alpha, b, sigma, V0 must be positive");
  }
}

PathSet::PathSet(std::size_t paths, std::size_t steps)
    : n_paths(paths),
      n_steps(steps),
      grid(steps + 1),
      S(paths * (steps + 1)),
      V(paths * (steps + 1)),
      FV(paths * (steps + 1)),
      dW(paths * steps),
      dB(paths * steps) {}

PathSet PathSet::slice(std::size_t first, std::size_t count) const {
  require(first + count <= n_paths, ErrorKind::Structural, "path slice out of range");
  PathSet out(count, n_steps);
  out.source = source;
  out.grid = grid;
  const std::size_t w = width();
  auto copy_rows = [&](const std::vector<double>& src, std::vector<double>& dst,
                       std::size_t row) {
    if (src.empty()) {
      dst.clear();
      return;
    }
    std::copy(src.begin() + first * row, src.begin() + (first + count) * row, dst.begin());
  };
  copy_rows(S, out.S, w);
  copy_rows(V, out.V, w);
  copy_rows(FV, out.FV, w);
  copy_rows(dW, out.dW, n_steps);
  copy_rows(dB, out.dB, n_steps);
  if (!payoff.empty()) {
    out.payoff.assign(payoff.begin() + first, payoff.begin() + first + count);
  }
  return out;
}

}  // namespace roughhedge
