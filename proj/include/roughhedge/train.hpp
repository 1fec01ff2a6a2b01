#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roughhedge/network.hpp"

namespace roughhedge {

enum class OptimizerKind { SGD, Adam };
enum class InitScheme { UniformFanIn, Zero };

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  InitScheme init = InitScheme::UniformFanIn;
  std::uint64_t seed = 7;
  // Share of a single path set held out for validation when no separate
  // validation set is given.
  double validation_fraction = 0.2;
  // Divergence: validation loss above divergence_factor x the initial one
  // for divergence_patience consecutive epochs aborts training.
  double divergence_factor = 10.0;
  int divergence_patience = 5;

  void validate() const;
};

struct EpochLoss {
  int epoch;
  double train_loss;
  double val_loss;
};

struct TrainResult {
  // Entry 0 is the untrained policy.
  std::vector<EpochLoss> curve;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Minibatch training on the quadratic hedging loss. On return the policy holds
// the parameters with the lowest validation loss. Throws Error(Divergence).
TrainResult train(Policy& policy, const PathSet& train_paths, const PathSet& val_paths,
                  double p0, const TrainConfig& cfg);

void write_loss_curve_csv(const TrainResult& result, const std::filesystem::path& file);

}  // namespace roughhedge
