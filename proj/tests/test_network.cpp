#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "roughhedge/network.hpp"
#include "roughhedge/simulation.hpp"

using namespace roughhedge;
using doctest::Approx;

namespace {

MarketConfig short_market(int days = 3) {
  MarketConfig cfg;
  cfg.trading_days = days;
  cfg.maturity = days / 365.0;
  cfg.fwd_maturity = cfg.maturity + 15.0 / 365.0;
  cfg.seed = 3;
  return cfg;
}

PathSet short_paths(const MarketConfig& cfg, std::size_t n) {
  auto ps = simulate(cfg, n);
  attach_payoff(ps, Payoff{});
  return ps;
}

// Offset of the output layer's weight matrix within one step's parameters.
std::size_t output_layer_offset(const MLPTopology& t) {
  std::size_t o = 0;
  for (std::size_t l = 0; l + 2 < t.widths.size(); ++l)
    o += static_cast<std::size_t>(t.widths[l + 1]) * (t.widths[l] + 1);
  return o;
}

}  // namespace

TEST_CASE("topology and parameter counts") {
  const MLPTopology t{{4, 32, 32, 4}, Activation::ReLU};
  CHECK(t.n_params() == 4 * 32 + 32 + 32 * 32 + 32 + 32 * 4 + 4);
  const auto cfg = short_market();
  const Policy semi(Architecture::SemiRecurrent, 3, {8}, Activation::Tanh, InfoSpec::from(cfg));
  CHECK(semi.feedback_width() == 2);
  CHECK(semi.topology().widths == std::vector<int>{4, 8, 2});
  const Policy frnn(Architecture::FRNN, 3, {8}, Activation::Tanh, InfoSpec::from(cfg), 3);
  CHECK(frnn.feedback_width() == 3);
  CHECK(frnn.topology().widths == std::vector<int>{5, 8, 5});
  CHECK(frnn.n_params() == 3 * frnn.step_params());
  CHECK(make_policy(Architecture::FRNN, MarketConfig{}).n_steps() == 30);
  CHECK(parse_architecture("semi") == Architecture::SemiRecurrent);
  CHECK(parse_activation("tanh") == Activation::Tanh);
  expect_error([] { parse_architecture("lstm"); }, ErrorKind::InvalidArgument);
}

TEST_CASE("zero parameters give zero holdings") {
  const auto cfg = short_market();
  const auto ps = short_paths(cfg, 10);
  for (auto arch : {Architecture::SemiRecurrent, Architecture::FRNN}) {
    const Policy pol(arch, 3, {8, 8}, Activation::ReLU, InfoSpec::from(cfg));
    const auto st = policy_forward(pol, ps);
    for (double v : st.values) CHECK(v == 0.0);
    // loss is then the mean squared (p0 - Z)
    double expect = 0.0;
    for (double z : ps.payoff) expect += (1.0 - z) * (1.0 - z);
    CHECK(policy_loss(pol, ps, 1.0) == Approx(expect / 10));
  }
}

TEST_CASE("single affine layer by hand") {
  const auto cfg = short_market(2);
  auto ps = short_paths(cfg, 1);
  const InfoSpec info = InfoSpec::from(cfg);
  Policy pol(Architecture::SemiRecurrent, 2, {}, Activation::ReLU, info);
  REQUIRE(pol.step_params() == 4 * 2 + 2);
  // W is 2 x 4 column-major, then b
  const std::vector<double> step{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.05, -0.05};
  std::copy(step.begin(), step.end(), pol.params().begin());
  std::copy(step.begin(), step.end(), pol.params().begin() + 10);
  const auto st = policy_forward(pol, ps);
  double fb0 = 0, fb1 = 0;
  for (std::size_t k = 0; k < 2; ++k) {
    const double x0 = std::log(ps.s(0, k) / info.s0) * info.log_scale;
    const double x1 = ps.fv(0, k) / info.var_level;
    const double o0 = 0.1 * x0 + 0.3 * x1 + 0.5 * fb0 + 0.7 * fb1 + 0.05;
    const double o1 = 0.2 * x0 + 0.4 * x1 + 0.6 * fb0 + 0.8 * fb1 - 0.05;
    CHECK(st.at(0, k, 0) == Approx(o0).epsilon(1e-13));
    CHECK(st.at(0, k, 1) == Approx(o1 / info.var_level).epsilon(1e-13));
    fb0 = o0;
    fb1 = o1;
  }
}

TEST_CASE("gradients match central differences") {
  const auto cfg = short_market();
  const auto ps = short_paths(cfg, 10);
  for (auto arch : {Architecture::SemiRecurrent, Architecture::FRNN})
    for (auto act : {Activation::ReLU, Activation::Tanh})
      for (int width : {1, 8}) {
        CAPTURE(to_string(arch));
        CAPTURE(to_string(act));
        CAPTURE(width);
        Policy pol(arch, 3, {width, width}, act, InfoSpec::from(cfg));
        pol.initialize(5);
        for (auto& v : pol.params()) v += 0.01;
        const auto lg = loss_and_grad(pol, ps, 0.8);
        CHECK(lg.loss == Approx(policy_loss(pol, ps, 0.8)).epsilon(1e-12));
        std::size_t bad = 0;
        for (std::size_t i = 0; i < pol.n_params(); ++i) {
          const double orig = pol.params()[i], h = 1e-5;
          pol.params()[i] = orig + h;
          const double up = policy_loss(pol, ps, 0.8);
          pol.params()[i] = orig - h;
          const double dn = policy_loss(pol, ps, 0.8);
          pol.params()[i] = orig;
          const double fd = (up - dn) / (2 * h);
          if (std::abs(lg.grad[i] - fd) > 1e-4 * std::max(std::abs(fd), 1e-6)) ++bad;
        }
        CHECK(bad == 0);
      }
}

TEST_CASE("batch loss equals the loss on the selected paths") {
  const auto cfg = short_market();
  const auto ps = short_paths(cfg, 200);
  Policy pol(Architecture::FRNN, 3, {8, 8}, Activation::ReLU, InfoSpec::from(cfg));
  pol.initialize(1);
  std::vector<std::size_t> idx{3, 150, 7, 199};
  PathSet picked(4, 3);
  picked.grid = ps.grid;
  for (std::size_t j = 0; j < 4; ++j) {
    const auto one = ps.slice(idx[j], 1);
    std::copy(one.S.begin(), one.S.end(), picked.S.begin() + j * 4);
    std::copy(one.FV.begin(), one.FV.end(), picked.FV.begin() + j * 4);
    picked.payoff.push_back(one.payoff[0]);
  }
  CHECK(policy_loss(pol, ps, 0.5, idx) == Approx(policy_loss(pol, picked, 0.5)).epsilon(1e-12));
}

TEST_CASE("quadratic loss is homogeneous in the claim and hedge") {
  const auto cfg = short_market();
  auto ps = short_paths(cfg, 50);
  Policy pol(Architecture::FRNN, 3, {8, 8}, Activation::Tanh, InfoSpec::from(cfg));
  pol.initialize(2);
  const double base = policy_loss(pol, ps, 0.7);
  // doubling the holding rows of every output layer doubles the hedge, and
  // the hidden-state rows (which feed back) are untouched
  const auto& t = pol.topology();
  const std::size_t out = t.widths.back(), in = t.widths[t.widths.size() - 2];
  const std::size_t off = output_layer_offset(t);
  for (std::size_t k = 0; k < pol.n_steps(); ++k) {
    double* w = pol.params().data() + k * pol.step_params() + off;
    for (std::size_t c = 0; c < in; ++c)
      for (std::size_t r = 0; r < 2; ++r) w[c * out + r] *= 2.0;
    for (std::size_t r = 0; r < 2; ++r) w[in * out + r] *= 2.0;
  }
  for (double& z : ps.payoff) z *= 2.0;
  CHECK(policy_loss(pol, ps, 1.4) == Approx(4.0 * base).epsilon(1e-12));
}

TEST_CASE("holdings are adapted") {
  const auto cfg = short_market(5);
  const auto ps = short_paths(cfg, 8);
  for (auto arch : {Architecture::SemiRecurrent, Architecture::FRNN}) {
    Policy pol(arch, 5, {8, 8}, Activation::ReLU, InfoSpec::from(cfg));
    pol.initialize(3);
    for (std::size_t k = 0; k < 5; ++k) {
      PathSet changed = ps;
      // scramble the future of every path after step k
      for (std::size_t p = 0; p < 8; ++p)
        for (std::size_t j = k + 1; j <= 5; ++j) {
          changed.s(p, j) = ps.s(7 - p, j) * 1.1;
          changed.fv(p, j) = ps.fv(7 - p, j) * 0.9;
        }
      const auto a = policy_forward(pol, ps), b = policy_forward(pol, changed);
      for (std::size_t p = 0; p < 8; ++p)
        for (std::size_t j = 0; j <= k; ++j)
          for (std::size_t x = 0; x < 2; ++x) CHECK(a.at(p, j, x) == b.at(p, j, x));
    }
  }
}

TEST_CASE("fRNN with zero recurrent weights is memoryless") {
  const auto cfg = short_market(4);
  const auto ps = short_paths(cfg, 6);
  Policy pol(Architecture::FRNN, 4, {8}, Activation::Tanh, InfoSpec::from(cfg));
  pol.initialize(4);
  const int h1 = pol.topology().widths[1];
  for (std::size_t k = 0; k < 4; ++k) {
    double* w = pol.params().data() + k * pol.step_params();
    for (int c = kInfoWidth; c < pol.topology().widths[0]; ++c)
      for (int r = 0; r < h1; ++r) w[c * h1 + r] = 0.0;
  }
  PathSet changed = ps;
  for (std::size_t p = 0; p < 6; ++p) changed.s(p, 1) *= 1.2;
  const auto a = policy_forward(pol, ps), b = policy_forward(pol, changed);
  for (std::size_t p = 0; p < 6; ++p)
    for (std::size_t k : {std::size_t{0}, std::size_t{2}, std::size_t{3}}) {
      CHECK(a.at(p, k, 0) == b.at(p, k, 0));
      CHECK(a.at(p, k, 1) == b.at(p, k, 1));
    }
}

TEST_CASE("shape mismatch and non-finite inputs") {
  const auto cfg = short_market();
  auto ps = short_paths(cfg, 4);
  const Policy pol(Architecture::FRNN, 5, {4}, Activation::ReLU, InfoSpec::from(cfg));
  expect_error([&] { policy_forward(pol, ps); }, ErrorKind::Structural);

  Policy ok(Architecture::FRNN, 3, {4}, Activation::ReLU, InfoSpec::from(cfg));
  ok.initialize(1);
  ps.s(2, 3) = std::numeric_limits<double>::quiet_NaN();
  const auto msg = expect_error([&] { policy_loss(ok, ps, 0.0); }, ErrorKind::Numerical);
  CHECK(msg.find("path 2") != std::string::npos);

  PathSet no_payoff = short_paths(cfg, 4);
  no_payoff.payoff.clear();
  expect_error([&] { policy_loss(ok, no_payoff, 0.0); }, ErrorKind::Structural);
}

TEST_CASE("checkpoint round trip") {
  const auto cfg = short_market();
  Policy pol(Architecture::FRNN, 3, {6, 5}, Activation::Tanh, InfoSpec::from(cfg), 3);
  pol.initialize(9);
  pol.epochs_trained = 12;
  const auto file = std::filesystem::temp_directory_path() / "rh_test.policy";
  save_policy(pol, file);
  const auto back = load_policy(file);
  CHECK(back.params() == pol.params());
  CHECK(back.architecture() == Architecture::FRNN);
  CHECK(back.hidden_state() == 3);
  CHECK(back.topology().widths == pol.topology().widths);
  CHECK(back.topology().activation == Activation::Tanh);
  CHECK(back.info().log_scale == pol.info().log_scale);
  CHECK(back.seed == 9);
  CHECK(back.epochs_trained == 12);

  {
    std::ofstream bad(file, std::ios::binary);
    bad << "NOTAPOLICYFILE";
  }
  expect_error([&] { load_policy(file); }, ErrorKind::Io);
  std::filesystem::remove(file);
  expect_error([&] { load_policy(file); }, ErrorKind::Io);
}
