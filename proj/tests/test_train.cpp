#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "roughhedge/network.hpp"
#include "roughhedge/rng.hpp"
#include "roughhedge/simulation.hpp"
#include "roughhedge/train.hpp"

using namespace roughhedge;
using doctest::Approx;

namespace {

MarketConfig short_market(int days) {
  MarketConfig cfg;
  cfg.trading_days = days;
  cfg.maturity = days / 365.0;
  cfg.fwd_maturity = cfg.maturity + 15.0 / 365.0;
  return cfg;
}

PathSet make_paths(const MarketConfig& cfg, std::size_t n, std::uint64_t seed) {
  MarketConfig c = cfg;
  c.seed = seed;
  auto ps = simulate(c, n);
  attach_payoff(ps, Payoff{});
  return ps;
}

// Two steps. The sign eps of S_0 - 100 decides the claim eps * (S_2 - S_1),
// while (S_1, FV_1) is the same on every path. A memoryless second-step hedge
// cannot do better than loss 1.
PathSet memory_toy(std::size_t n) {
  PathSet ps(n, 2);
  ps.grid = {0.0, 1.0 / 365, 2.0 / 365};
  StreamRng rng(77, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const double eps = (p % 2 == 0) ? 1.0 : -1.0;
    const double xi = rng.uniform() < 0.5 ? 1.0 : -1.0;
    ps.s(p, 0) = 100.0 + 10.0 * eps;
    ps.s(p, 1) = 100.0;
    ps.s(p, 2) = 100.0 + xi;
    for (std::size_t k = 0; k < 3; ++k) ps.fv(p, k) = ps.v(p, k) = 0.04;
    ps.payoff.push_back(eps * xi);
  }
  return ps;
}

}  // namespace

TEST_CASE("training configuration validation") {
  TrainConfig cfg;
  cfg.validate();
  cfg.batch_size = 0;
  expect_error([&] { cfg.validate(); }, ErrorKind::InvalidArgument);
  cfg = {};
  cfg.learning_rate = -1;
  expect_error([&] { cfg.validate(); }, ErrorKind::InvalidArgument);
}

TEST_CASE("training lowers the loss and keeps the best validation parameters") {
  const auto cfg = short_market(5);
  const auto tr = make_paths(cfg, 2000, 1), va = make_paths(cfg, 500, 2);
  Policy pol(Architecture::FRNN, 5, {16, 16}, Activation::ReLU, InfoSpec::from(cfg));
  TrainConfig tc;
  tc.epochs = 8;
  tc.learning_rate = 3e-3;
  const auto res = train(pol, tr, va, 0.9, tc);
  REQUIRE(res.curve.size() == 9);
  CHECK(res.curve[0].epoch == 0);
  CHECK(res.best_val_loss < res.curve[0].val_loss);
  double min_val = res.curve[0].val_loss;
  for (const auto& e : res.curve) min_val = std::min(min_val, e.val_loss);
  CHECK(res.best_val_loss == min_val);
  CHECK(res.curve[res.best_epoch].val_loss == res.best_val_loss);
  CHECK(policy_loss(pol, va, 0.9) == Approx(res.best_val_loss).epsilon(1e-12));
  CHECK(pol.epochs_trained == 8);
}

TEST_CASE("training is deterministic and thread-count independent") {
  const auto cfg = short_market(3);
  const auto tr = make_paths(cfg, 600, 1), va = make_paths(cfg, 200, 2);
  TrainConfig tc;
  tc.epochs = 3;
  auto run = [&] {
    Policy pol(Architecture::SemiRecurrent, 3, {8, 8}, Activation::ReLU, InfoSpec::from(cfg));
    train(pol, tr, va, 0.5, tc);
    return pol.params();
  };
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = run();
  omp_set_num_threads(3);
  const auto b = run();
  omp_set_num_threads(saved);
#else
  const auto a = run();
  const auto b = run();
#endif
  CHECK(a == b);
}

TEST_CASE("huge learning rates are reported as divergence") {
  const auto cfg = short_market(3);
  const auto tr = make_paths(cfg, 256, 1), va = make_paths(cfg, 128, 2);
  Policy pol(Architecture::FRNN, 3, {8, 8}, Activation::ReLU, InfoSpec::from(cfg));
  TrainConfig tc;
  tc.optimizer = OptimizerKind::SGD;
  tc.learning_rate = 1e6;
  tc.epochs = 20;
  tc.batch_size = 32;
  const auto msg = expect_error([&] { train(pol, tr, va, 0.5, tc); }, ErrorKind::Divergence);
  CHECK(msg.find("diverged") != std::string::npos);
}

TEST_CASE("zero initialization starts from the unhedged loss") {
  const auto cfg = short_market(3);
  const auto tr = make_paths(cfg, 256, 1), va = make_paths(cfg, 128, 2);
  Policy pol(Architecture::FRNN, 3, {4}, Activation::ReLU, InfoSpec::from(cfg));
  TrainConfig tc;
  tc.init = InitScheme::Zero;
  tc.epochs = 1;
  const auto res = train(pol, tr, va, 0.5, tc);
  double expect = 0.0;
  for (double z : va.payoff) expect += (0.5 - z) * (0.5 - z);
  CHECK(res.curve[0].val_loss == Approx(expect / va.n_paths));
}

TEST_CASE("fRNN hidden state carries information a memoryless hedge cannot use") {
  const auto tr = memory_toy(1024), va = memory_toy(256);
  InfoSpec info;
  info.s0 = 100.0;
  info.log_scale = 10.0;
  info.var_level = 0.04;
  Policy pol(Architecture::FRNN, 2, {16, 16}, Activation::Tanh, info);
  TrainConfig tc;
  tc.epochs = 150;
  tc.learning_rate = 1e-2;
  tc.batch_size = 128;
  const auto res = train(pol, tr, va, 0.0, tc);
  MESSAGE("memory toy fRNN loss " << res.best_val_loss << " (memoryless bound 1)");
  CHECK(res.best_val_loss < 0.9);
}

TEST_CASE("Heston: the recurrent hedge is no worse than semi-recurrent") {
  MarketConfig cfg = short_market(10);
  cfg.model = ModelKind::Heston;
  const auto tr = make_paths(cfg, 4000, 1), va = make_paths(cfg, 1000, 2);
  TrainConfig tc;
  tc.epochs = 10;
  tc.learning_rate = 3e-3;
  double loss[2];
  int i = 0;
  for (auto arch : {Architecture::SemiRecurrent, Architecture::FRNN}) {
    Policy pol(arch, cfg.n_steps(), {16, 16}, Activation::ReLU, InfoSpec::from(cfg));
    loss[i++] = train(pol, tr, va, 1.0, tc).best_val_loss;
  }
  MESSAGE("Heston semi " << loss[0] << " frnn " << loss[1]);
  CHECK(loss[1] <= 1.25 * loss[0]);
}

TEST_CASE("loss curve csv") {
  TrainResult r;
  r.curve = {{0, 2.0, 2.1}, {1, 1.0, 1.1}};
  const auto f = std::filesystem::temp_directory_path() / "rh_curve.csv";
  write_loss_curve_csv(r, f);
  std::ifstream in(f);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,train_loss,val_loss");
  std::filesystem::remove(f);
}
