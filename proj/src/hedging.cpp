#include "roughhedge/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "roughhedge/error.hpp"
#include "roughhedge/stats.hpp"

namespace roughhedge {

double Payoff::operator()(double terminal_spot) const {
  return std::max(terminal_spot - strike, 0.0);
}

void Payoff::validate() const {
  require(strike >= 0.0, ErrorKind::InvalidArgument, "strike must be nonnegative");
}

void attach_payoff(PathSet& paths, const Payoff& payoff) {
  payoff.validate();
  paths.payoff.resize(paths.n_paths);
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    paths.payoff[p] = payoff(paths.s(p, paths.n_steps));
  }
}

PriceEstimate mc_price(const PathSet& paths, const Payoff& payoff) {
  require(paths.n_paths > 0, ErrorKind::InvalidArgument, "cannot price on an empty path set");
  payoff.validate();
  std::vector<double> z(paths.n_paths);
  for (std::size_t p = 0; p < paths.n_paths; ++p) z[p] = payoff(paths.s(p, paths.n_steps));
  const auto est = stats::mean_estimate(z);
  return {est.mean, est.std_error};
}

void CostSpec::validate() const {
  for (double c : rate) {
    require(c >= 0.0, ErrorKind::InvalidArgument, "transaction cost rates must be >= 0");
  }
}

Histogram tail_clipped_histogram(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InvalidArgument, "histogram of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = stats::quantile_sorted(sorted, 0.01);
  const double hi = stats::quantile_sorted(sorted, 0.99);
  const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
  const double n = static_cast<double>(sorted.size());

  std::size_t bins = 1;
  if (hi > lo && iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(n);
    bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 1000.0));
  }
  Histogram h;
  h.edges.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges.push_back(i == bins ? hi : lo + (hi - lo) * static_cast<double>(i) / bins);
  }
  h.edges.push_back(std::numeric_limits<double>::infinity());
  h.counts.assign(bins + 2, 0);
  for (double v : sorted) {
    std::size_t b;
    if (v < lo) {
      b = 0;
    } else if (v > hi) {
      b = bins + 1;
    } else if (hi == lo) {
      b = 1;
    } else {
      const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
      b = 1 + std::min(bins - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[b];
  }
  return h;
}

PnLReport summarize_pnl(std::vector<double> values) {
  require(!values.empty(), ErrorKind::InvalidArgument, "P&L report of an empty sample");
  PnLReport r;
  const double n = static_cast<double>(values.size());
  double sum = 0.0, sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += v * v;
  }
  r.mean = sum / n;
  r.quadratic_loss = sq / n;
  r.stdev = stats::mean_estimate(values).stdev;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kReportQuantiles.size(); ++i) {
    r.quantiles[i] = stats::quantile_sorted(sorted, kReportQuantiles[i]);
  }
  r.worst_path_id = static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  r.histogram = tail_clipped_histogram(values);
  r.pnl = std::move(values);
  return r;
}

std::vector<double> trading_costs(const PathSet& paths, const Strategy& strategy,
                                  const CostSpec& costs) {
  costs.validate();
  std::vector<double> total(paths.n_paths, 0.0);
  const std::size_t n = paths.n_steps;
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    double c = 0.0;
    for (std::size_t x = 0; x < kNumInstruments; ++x) {
      if (costs.rate[x] == 0.0) continue;
      double prev = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double price = x == 0 ? paths.s(p, k) : paths.fv(p, k);
        const double d = strategy.at(p, k, x);
        c += costs.rate[x] * std::abs(d - prev) * price;
        prev = d;
      }
      if (costs.terminal_liquidation) {
        const double price = x == 0 ? paths.s(p, n - 1) : paths.fv(p, n - 1);
        c += costs.rate[x] * std::abs(prev) * price;
      }
    }
    total[p] = c;
  }
  return total;
}

PnLReport pnl(const PathSet& paths, const Strategy& strategy, double p0, const CostSpec& costs) {
  require(strategy.n_paths == paths.n_paths && strategy.n_steps == paths.n_steps &&
              strategy.values.size() == paths.n_paths * paths.n_steps * kNumInstruments,
          ErrorKind::Structural, "strategy shape does not match the path set");
  require(paths.payoff.size() == paths.n_paths, ErrorKind::Structural,
          "path set has no payoff attached");
  const auto cost = trading_costs(paths, strategy, costs);
  std::vector<double> values(paths.n_paths);
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    double gains = 0.0;
    for (std::size_t k = 0; k < paths.n_steps; ++k) {
      gains += strategy.at(p, k, 0) * (paths.s(p, k + 1) - paths.s(p, k));
      gains += strategy.at(p, k, 1) * (paths.fv(p, k + 1) - paths.fv(p, k));
    }
    values[p] = -paths.payoff[p] + p0 + gains - cost[p];
  }
  return summarize_pnl(std::move(values));
}

double quadratic_loss(const PnLReport& report) {
  if (report.pnl.empty()) return report.quadratic_loss;
  double sq = 0.0;
  for (double v : report.pnl) sq += v * v;
  return sq / static_cast<double>(report.pnl.size());
}

nlohmann::json to_json(const PnLReport& r) {
  nlohmann::json j;
  j["n_paths"] = r.pnl.size();
  j["quadratic_loss"] = r.quadratic_loss;
  j["mean"] = r.mean;
  j["stdev"] = r.stdev;
  nlohmann::json q;
  for (std::size_t i = 0; i < kReportQuantiles.size(); ++i) {
    std::ostringstream key;
    key << "q" << std::setw(2) << std::setfill('0')
        << static_cast<int>(std::lround(kReportQuantiles[i] * 100));
    q[key.str()] = r.quantiles[i];
  }
  j["quantiles"] = q;
  j["worst_path_id"] = r.worst_path_id;
  j["histogram_bins"] = r.histogram.counts.size();
  return j;
}

namespace {
std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  require(out.good(), ErrorKind::Io, "cannot open " + file.string() + " for writing");
  out << std::setprecision(17);
  return out;
}
}  // namespace

void write_pnl_csv(const PnLReport& report, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "path_id,pnl\n";
  for (std::size_t p = 0; p < report.pnl.size(); ++p) out << p << ',' << report.pnl[p] << '\n';
}

void write_histogram_csv(const Histogram& hist, const std::filesystem::path& file) {
  auto out = open_out(file);
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << hist.edges[i] << ',' << hist.edges[i + 1] << ',' << hist.counts[i] << '\n';
  }
}

std::vector<std::filesystem::path> write_report(const PnLReport& report,
                                                const std::filesystem::path& dir,
                                                const std::string& stem) {
  std::filesystem::create_directories(dir);
  const auto json_file = dir / (stem + ".json");
  const auto pnl_file = dir / (stem + "_pnl.csv");
  const auto hist_file = dir / (stem + "_hist.csv");
  {
    auto out = open_out(json_file);
    out << to_json(report).dump(2) << '\n';
  }
  write_pnl_csv(report, pnl_file);
  write_histogram_csv(report.histogram, hist_file);
  return {json_file, pnl_file, hist_file};
}

}  // namespace roughhedge
