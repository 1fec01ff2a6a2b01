#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roughhedge/hedging.hpp"
#include "roughhedge/market.hpp"

namespace roughhedge {

enum class Activation { ReLU, Tanh };
enum class Architecture { SemiRecurrent, FRNN };

const char* to_string(Activation a);
const char* to_string(Architecture a);
Activation parse_activation(const std::string& name);
Architecture parse_architecture(const std::string& name);

// Widths [d_in, h_1, ..., h_L, d_out]; hidden layers use `activation`, the
// output layer is linear.
struct MLPTopology {
  std::vector<int> widths;
  Activation activation = Activation::ReLU;

  std::size_t n_params() const;
  void validate() const;
};

// Maps path columns to network inputs and network outputs to holdings.
// Inputs at step k: log(S_k / s0) / (sqrt(var_level) sqrt(T)) and FV_k / var_level.
// Holdings: delta^S = out_0, delta^FV = out_1 / var_level.
struct InfoSpec {
  double s0 = 100.0;
  double log_scale = 1.0;
  double var_level = 1.0;

  static InfoSpec from(const MarketConfig& cfg);
};

inline constexpr int kInfoWidth = 2;

// Per-step networks. Semi-recurrent: step k sees (I_k, delta_{k-1}) and emits
// delta_k. FRNN: step k sees (I_k, h_{k-1}) and emits (delta_k, h_k) with the
// hidden state h unconstrained. Feedback values are the raw network outputs.
class Policy {
 public:
  Policy() = default;
  Policy(Architecture arch, std::size_t n_steps, std::vector<int> hidden, Activation act,
         InfoSpec info, int hidden_state = 2);

  Architecture architecture() const { return arch_; }
  std::size_t n_steps() const { return n_steps_; }
  int hidden_state() const { return hidden_state_; }
  int feedback_width() const;
  const MLPTopology& topology() const { return topo_; }
  const InfoSpec& info() const { return info_; }

  std::size_t n_params() const { return params_.size(); }
  std::size_t step_params() const { return topo_.n_params(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Uniform fan-in initialization with zero biases.
  void initialize(std::uint64_t seed);

  std::uint64_t seed = 0;
  int epochs_trained = 0;

 private:
  Architecture arch_ = Architecture::FRNN;
  std::size_t n_steps_ = 0;
  int hidden_state_ = 0;
  MLPTopology topo_;
  InfoSpec info_;
  std::vector<double> params_;
};

// Default topology: 2 x 32 ReLU, hidden state width 2.
Policy make_policy(Architecture arch, const MarketConfig& cfg);

// Holdings for every path and step. Throws Error(Structural) when the path
// grid does not match the policy's step count.
Strategy policy_forward(const Policy& policy, const PathSet& paths);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean over `batch` (all paths when empty) of (-Z + p0 + (delta . P)_T)^2 and
// its exact gradient. The reduction order is fixed, so results do not depend
// on the thread count.
LossGrad loss_and_grad(const Policy& policy, const PathSet& paths, double p0,
                       std::span<const std::size_t> batch = {});
double policy_loss(const Policy& policy, const PathSet& paths, double p0,
                   std::span<const std::size_t> batch = {});

void save_policy(const Policy& policy, const std::filesystem::path& file);
Policy load_policy(const std::filesystem::path& file);

}  // namespace roughhedge
