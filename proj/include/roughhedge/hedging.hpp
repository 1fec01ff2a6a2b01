#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "roughhedge/market.hpp"

namespace roughhedge {

struct Payoff {
  enum class Kind { VanillaCall };
  Kind kind = Kind::VanillaCall;
  double strike = 100.0;

  double operator()(double terminal_spot) const;
  void validate() const;
};

// Fills paths.payoff from the terminal stock prices.
void attach_payoff(PathSet& paths, const Payoff& payoff);

struct PriceEstimate {
  double price;
  double std_error;
};

PriceEstimate mc_price(const PathSet& paths, const Payoff& payoff);

inline constexpr std::size_t kNumInstruments = 2;  // stock, forward variance

// Proportional costs on traded notional, per instrument.
struct CostSpec {
  std::array<double, kNumInstruments> rate{0.0, 0.0};
  bool terminal_liquidation = false;

  void validate() const;
};

// Holdings delta^x_k per (path, step, instrument) in units of the instrument.
struct Strategy {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<double> values;

  Strategy() = default;
  Strategy(std::size_t paths, std::size_t steps)
      : n_paths(paths), n_steps(steps), values(paths * steps * kNumInstruments, 0.0) {}

  double& at(std::size_t p, std::size_t k, std::size_t x) {
    return values[(p * n_steps + k) * kNumInstruments + x];
  }
  double at(std::size_t p, std::size_t k, std::size_t x) const {
    return values[(p * n_steps + k) * kNumInstruments + x];
  }
};

struct Histogram {
  // edges.size() == counts.size() + 1; the first and last buckets are the
  // outlier tails (-inf, q01) and (q99, +inf).
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

// Freedman-Diaconis bins on [q01, q99] plus the two tail buckets.
Histogram tail_clipped_histogram(std::span<const double> values);

struct PnLReport {
  std::vector<double> pnl;
  double quadratic_loss = 0.0;
  double mean = 0.0;
  double stdev = 0.0;
  // 1%, 5%, 50%, 95%, 99%
  std::array<double, 5> quantiles{};
  Histogram histogram;
  std::size_t worst_path_id = 0;
};

inline constexpr std::array<double, 5> kReportQuantiles{0.01, 0.05, 0.50, 0.95, 0.99};

PnLReport summarize_pnl(std::vector<double> pnl);

// Terminal P&L of selling the claim at p0 and trading `strategy` in (S, FV):
// -Z + p0 + sum_k delta_k . (P_{k+1} - P_k) - costs.
PnLReport pnl(const PathSet& paths, const Strategy& strategy, double p0,
              const CostSpec& costs = {});

// Total transaction cost per path for the given strategy.
std::vector<double> trading_costs(const PathSet& paths, const Strategy& strategy,
                                  const CostSpec& costs);

double quadratic_loss(const PnLReport& report);

nlohmann::json to_json(const PnLReport& report);
void write_pnl_csv(const PnLReport& report, const std::filesystem::path& file);
void write_histogram_csv(const Histogram& hist, const std::filesystem::path& file);
// <stem>.json, <stem>_pnl.csv, <stem>_hist.csv in dir; returns the paths written.
std::vector<std::filesystem::path> write_report(const PnLReport& report,
                                                const std::filesystem::path& dir,
                                                const std::string& stem);

}  // namespace roughhedge
