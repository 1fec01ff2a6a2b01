#include "roughhedge/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "roughhedge/error.hpp"
#include "roughhedge/rng.hpp"

namespace roughhedge {

void TrainConfig::validate() const {
  require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
  require(batch_size >= 1, ErrorKind::InvalidArgument, "batch size must be >= 1");
  require(learning_rate > 0.0, ErrorKind::InvalidArgument, "learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0,
          ErrorKind::InvalidArgument, "Adam needs beta1, beta2 in [0,1) and eps > 0");
  require(validation_fraction > 0.0 && validation_fraction < 1.0, ErrorKind::InvalidArgument,
          "validation fraction must lie in (0,1)");
  require(divergence_factor > 1.0 && divergence_patience >= 1, ErrorKind::InvalidArgument,
          "bad divergence settings");
}

namespace {

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      theta[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.adam_eps);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

}  // namespace

TrainResult train(Policy& policy, const PathSet& train_paths, const PathSet& val_paths,
                  double p0, const TrainConfig& cfg) {
  cfg.validate();
  require(train_paths.n_paths >= 1 && val_paths.n_paths >= 1, ErrorKind::InvalidArgument,
          "training and validation sets must be non-empty");
  if (cfg.init == InitScheme::UniformFanIn) {
    policy.initialize(cfg.seed);
  } else {
    std::fill(policy.params().begin(), policy.params().end(), 0.0);
    policy.seed = cfg.seed;
  }

  TrainResult result;
  const double initial_val = policy_loss(policy, val_paths, p0);
  result.curve.push_back({0, policy_loss(policy, train_paths, p0), initial_val});
  result.best_val_loss = initial_val;
  std::vector<double> best = policy.params();

  Adam adam(policy.n_params(), cfg);
  std::vector<std::size_t> order(train_paths.n_paths);
  std::iota(order.begin(), order.end(), std::size_t{0});
  StreamRng shuffle_rng(derive_seed(cfg.seed, 0x5348'5546ull), 0);
  int above = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double train_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      const std::span<const std::size_t> batch(order.data() + first, count);
      LossGrad lg;
      try {
        lg = loss_and_grad(policy, train_paths, p0, batch);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numerical) throw;
        fail(ErrorKind::Divergence,
             "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      train_sum += lg.loss * static_cast<double>(count);
      if (cfg.optimizer == OptimizerKind::Adam) {
        adam.step(policy.params(), lg.grad);
      } else {
        for (std::size_t i = 0; i < lg.grad.size(); ++i) {
          policy.params()[i] -= cfg.learning_rate * lg.grad[i];
        }
      }
    }
    double val;
    try {
      val = policy_loss(policy, val_paths, p0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      fail(ErrorKind::Divergence,
           "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.curve.push_back({epoch, train_sum / static_cast<double>(order.size()), val});
    policy.epochs_trained = epoch;
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      best = policy.params();
    }
    above = (val > cfg.divergence_factor * initial_val) ? above + 1 : 0;
    if (above >= cfg.divergence_patience) {
      std::ostringstream msg;
      msg << "training diverged: validation loss " << val << " at epoch " << epoch
          << " exceeds " << cfg.divergence_factor << " x initial " << initial_val << " for "
          << above << " epochs";
      fail(ErrorKind::Divergence, msg.str());
    }
  }
  policy.params() = best;
  return result;
}

void write_loss_curve_csv(const TrainResult& result, const std::filesystem::path& file) {
  std::ofstream os(file);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + file.string());
  os.precision(10);
  os << "epoch,train_loss,val_loss\n";
  for (const auto& e : result.curve) {
    os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  }
}

}  // namespace roughhedge
