#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "roughhedge/hedging.hpp"
#include "roughhedge/market.hpp"
#include "roughhedge/modelhedge.hpp"
#include "roughhedge/network.hpp"
#include "roughhedge/train.hpp"

namespace roughhedge {

inline constexpr const char* kVersion = "0.1.0";

enum class SweepAxis { Hurst, Frequency, Architecture };

const char* to_string(SweepAxis axis);

struct PathCounts {
  std::size_t train = 10000;
  std::size_t val = 2000;
  std::size_t test = 10000;
  std::size_t price = 100000;  // paths for the premium p0
};

struct NetworkSpec {
  std::vector<int> hidden{32, 32};
  Activation activation = Activation::ReLU;
  int hidden_state = 2;
};

struct ExperimentSpec {
  std::string name = "experiment";
  MarketConfig market;
  Payoff payoff;
  SweepAxis axis = SweepAxis::Hurst;
  // Hurst values or rebalancing frequencies (steps per day) for those axes.
  std::vector<double> values;
  // Architectures trained at each point; for the architecture axis these
  // are the sweep points themselves.
  std::vector<Architecture> architectures{Architecture::SemiRecurrent, Architecture::FRNN};
  NetworkSpec network;
  TrainConfig train;
  PathCounts paths;
  bool include_model_hedge = false;
  ModelHedgeConfig model_hedge{.inner_paths = 2000, .outer_paths = 100};
  std::filesystem::path outputs = "out";
  bool parallel = false;

  std::size_t n_points() const;
  // Throws Error(Validation) before any compute.
  void validate() const;
  // Full-size path counts and epochs (hours of compute).
  void apply_full_scale();
};

// YAML text with sections name, market, payoff, sweep, network, train, paths,
// model_hedge, outputs, parallel. Errors carry line:column positions.
ExperimentSpec parse_experiment_spec(const std::string& text,
                                     const std::string& source = "<string>");
ExperimentSpec load_experiment_spec(const std::filesystem::path& file);
// The `market` section alone, for single-run CLI commands.
MarketConfig load_market_config(const std::filesystem::path& file);

nlohmann::json to_json(const ExperimentSpec& spec);
nlohmann::json to_json(const MarketConfig& cfg);

// Seeds for each path-set role. They depend on the base seed only, so every
// sweep point reuses the same random numbers.
struct RoleSeeds {
  std::uint64_t train, val, test, price;
};
RoleSeeds role_seeds(std::uint64_t base);

std::string sha256_hex(const std::filesystem::path& file);

// Runs every sweep point and writes losses.csv, per-run reports, loss curves,
// checkpoints and manifest.json into spec.outputs. Failures of single points
// are recorded in the manifest; the remaining points still run.
nlohmann::json run_experiment(const ExperimentSpec& spec);

// Rows (hurst, model_hedge, deep_semi, deep_frnn) aligned across manifests,
// with columns for methods absent everywhere dropped. Rejects manifests with
// different payoffs or model families.
std::string compare_report(const std::vector<nlohmann::json>& manifests);

}  // namespace roughhedge
