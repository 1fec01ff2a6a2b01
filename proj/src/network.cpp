#include "roughhedge/network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "roughhedge/error.hpp"
#include "roughhedge/parallel.hpp"
#include "roughhedge/rng.hpp"

namespace roughhedge {

const char* to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "tanh";
}

const char* to_string(Architecture a) {
  return a == Architecture::SemiRecurrent ? "semi" : "frnn";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  fail(ErrorKind::InvalidArgument, "unknown activation '" + name + "' (relu, tanh)");
}

Architecture parse_architecture(const std::string& name) {
  if (name == "semi" || name == "semi-recurrent") return Architecture::SemiRecurrent;
  if (name == "frnn") return Architecture::FRNN;
  fail(ErrorKind::InvalidArgument, "unknown architecture '" + name + "' (semi, frnn)");
}

std::size_t MLPTopology::n_params() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    n += static_cast<std::size_t>(widths[l]) * (widths[l - 1] + 1);
  }
  return n;
}

void MLPTopology::validate() const {
  require(widths.size() >= 2, ErrorKind::InvalidArgument, "an MLP needs at least two widths");
  for (int w : widths) require(w >= 1, ErrorKind::InvalidArgument, "layer widths must be >= 1");
}

InfoSpec InfoSpec::from(const MarketConfig& cfg) {
  const double level = cfg.model == ModelKind::Heston ? cfg.heston.v0 : cfg.xi0;
  InfoSpec info;
  info.s0 = cfg.s0;
  info.var_level = level;
  info.log_scale = 1.0 / (std::sqrt(level) * std::sqrt(cfg.maturity));
  return info;
}

Policy::Policy(Architecture arch, std::size_t n_steps, std::vector<int> hidden, Activation act,
               InfoSpec info, int hidden_state)
    : arch_(arch), n_steps_(n_steps), hidden_state_(hidden_state), info_(info) {
  require(n_steps >= 1, ErrorKind::InvalidArgument, "policy needs at least one step");
  require(arch == Architecture::SemiRecurrent || hidden_state >= 1, ErrorKind::InvalidArgument,
          "fRNN hidden state width must be >= 1");
  require(info.var_level > 0.0 && info.s0 > 0.0, ErrorKind::InvalidArgument,
          "information normalization must be positive");
  if (arch == Architecture::SemiRecurrent) hidden_state_ = 0;
  const int fb = feedback_width();
  topo_.activation = act;
  topo_.widths.push_back(kInfoWidth + fb);
  for (int h : hidden) topo_.widths.push_back(h);
  topo_.widths.push_back(static_cast<int>(kNumInstruments) + hidden_state_);
  topo_.validate();
  params_.assign(n_steps_ * topo_.n_params(), 0.0);
}

int Policy::feedback_width() const {
  return arch_ == Architecture::SemiRecurrent ? static_cast<int>(kNumInstruments)
                                              : hidden_state_;
}

void Policy::initialize(std::uint64_t init_seed) {
  seed = init_seed;
  StreamRng rng(derive_seed(init_seed, 0x494e4954ull), 0);
  const auto& w = topo_.widths;
  std::size_t off = 0;
  for (std::size_t k = 0; k < n_steps_; ++k) {
    for (std::size_t l = 1; l < w.size(); ++l) {
      const bool hidden_layer = l + 1 < w.size();
      const double gain = hidden_layer && topo_.activation == Activation::ReLU ? 6.0 : 3.0;
      const double bound = std::sqrt(gain / w[l - 1]);
      const std::size_t nw = static_cast<std::size_t>(w[l]) * w[l - 1];
      for (std::size_t i = 0; i < nw; ++i) params_[off + i] = bound * (2.0 * rng.uniform() - 1.0);
      off += nw;
      std::fill_n(params_.begin() + off, w[l], 0.0);
      off += w[l];
    }
  }
}

Policy make_policy(Architecture arch, const MarketConfig& cfg) {
  return Policy(arch, cfg.n_steps(), {32, 32}, Activation::ReLU, InfoSpec::from(cfg), 2);
}

namespace {

using Eigen::MatrixXd;
using ConstMatMap = Eigen::Map<const MatrixXd>;
using MatMap = Eigen::Map<MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

constexpr std::size_t kChunk = 64;

// Forward and optional backward pass over a fixed set of paths.
class ChunkPass {
 public:
  ChunkPass(const Policy& policy, const PathSet& paths, std::span<const std::size_t> idx)
      : pol_(policy), ps_(paths), idx_(idx), b_(static_cast<Eigen::Index>(idx.size())) {}

  // Runs the network; fills holdings and (when p0 is given) P&L per path.
  void forward(bool keep_cache) {
    const auto& w = pol_.topology().widths;
    const std::size_t n = pol_.n_steps();
    const std::size_t layers = w.size() - 1;
    const int fbw = pol_.feedback_width();
    const auto& info = pol_.info();
    if (keep_cache) cache_.assign(n, std::vector<MatrixXd>(layers + 1));
    out_.assign(n, MatrixXd());
    MatrixXd fb = MatrixXd::Zero(fbw, b_);
    MatrixXd a, z;
    for (std::size_t k = 0; k < n; ++k) {
      MatrixXd x(w[0], b_);
      for (Eigen::Index j = 0; j < b_; ++j) {
        const std::size_t p = idx_[j];
        x(0, j) = std::log(ps_.s(p, k) / info.s0) * info.log_scale;
        x(1, j) = ps_.fv(p, k) / info.var_level;
      }
      x.bottomRows(fbw) = fb;
      const double* theta = pol_.params().data() + k * pol_.step_params();
      a = std::move(x);
      for (std::size_t l = 0; l < layers; ++l) {
        ConstMatMap W(theta, w[l + 1], w[l]);
        theta += static_cast<std::size_t>(w[l + 1]) * w[l];
        ConstVecMap bias(theta, w[l + 1]);
        theta += w[l + 1];
        z.noalias() = W * a;
        z.colwise() += bias;
        if (l + 1 < layers) {
          if (pol_.topology().activation == Activation::ReLU) {
            z = z.cwiseMax(0.0);
          } else {
            z = z.array().tanh().matrix();
          }
        }
        if (keep_cache) cache_[k][l] = a;
        a.swap(z);
      }
      out_[k] = a;
      fb = pol_.architecture() == Architecture::SemiRecurrent ? a.topRows(fbw)
                                                              : a.bottomRows(fbw);
    }
  }

  double delta(std::size_t k, Eigen::Index j, std::size_t x) const {
    const double o = out_[k](static_cast<Eigen::Index>(x), j);
    return x == 0 ? o : o / pol_.info().var_level;
  }

  // Terminal P&L of each path in the chunk; throws on non-finite values.
  std::vector<double> pnl(double p0) const {
    std::vector<double> out(idx_.size());
    for (Eigen::Index j = 0; j < b_; ++j) {
      const std::size_t p = idx_[j];
      double gains = 0.0;
      for (std::size_t k = 0; k < pol_.n_steps(); ++k) {
        gains += delta(k, j, 0) * (ps_.s(p, k + 1) - ps_.s(p, k)) +
                 delta(k, j, 1) * (ps_.fv(p, k + 1) - ps_.fv(p, k));
      }
      out[j] = -ps_.payoff[p] + p0 + gains;
      if (!std::isfinite(out[j])) {
        std::ostringstream msg;
        msg << "non-finite hedging loss on path " << p;
        fail(ErrorKind::Numerical, msg.str());
      }
    }
    return out;
  }

  // Accumulates d(sum_j pnl_j^2)/d(theta) into grad.
  void backward(const std::vector<double>& pnl, std::span<double> grad) const {
    const auto& w = pol_.topology().widths;
    const std::size_t n = pol_.n_steps();
    const std::size_t layers = w.size() - 1;
    const int fbw = pol_.feedback_width();
    const int dout = w.back();
    const bool relu = pol_.topology().activation == Activation::ReLU;
    const bool semi = pol_.architecture() == Architecture::SemiRecurrent;
    MatrixXd g_fb = MatrixXd::Zero(fbw, b_);
    MatrixXd g, g_prev;
    for (std::size_t kk = n; kk-- > 0;) {
      g.resize(dout, b_);
      g.setZero();
      for (Eigen::Index j = 0; j < b_; ++j) {
        const std::size_t p = idx_[j];
        const double gp = 2.0 * pnl[j];
        g(0, j) = gp * (ps_.s(p, kk + 1) - ps_.s(p, kk));
        g(1, j) = gp * (ps_.fv(p, kk + 1) - ps_.fv(p, kk)) / pol_.info().var_level;
      }
      if (semi) {
        g.topRows(fbw) += g_fb;
      } else {
        g.bottomRows(fbw) += g_fb;
      }
      // parameter offsets of each layer within step kk
      std::vector<std::size_t> off(layers);
      std::size_t o = kk * pol_.step_params();
      for (std::size_t l = 0; l < layers; ++l) {
        off[l] = o;
        o += static_cast<std::size_t>(w[l + 1]) * (w[l] + 1);
      }
      for (std::size_t l = layers; l-- > 0;) {
        const MatrixXd& a_in = cache_[kk][l];
        MatMap gW(grad.data() + off[l], w[l + 1], w[l]);
        VecMap gb(grad.data() + off[l] + static_cast<std::size_t>(w[l + 1]) * w[l], w[l + 1]);
        gW.noalias() += g * a_in.transpose();
        gb += g.rowwise().sum();
        ConstMatMap W(pol_.params().data() + off[l], w[l + 1], w[l]);
        g_prev.noalias() = W.transpose() * g;
        if (l > 0) {
          if (relu) {
            g_prev = (a_in.array() > 0.0).select(g_prev, 0.0);
          } else {
            g_prev.array() *= 1.0 - a_in.array().square();
          }
        }
        g.swap(g_prev);
      }
      g_fb = g.bottomRows(fbw);
    }
  }

 private:
  const Policy& pol_;
  const PathSet& ps_;
  std::span<const std::size_t> idx_;
  Eigen::Index b_;
  std::vector<std::vector<MatrixXd>> cache_;
  std::vector<MatrixXd> out_;
};

void check_shapes(const Policy& policy, const PathSet& paths, bool need_payoff) {
  if (paths.n_steps != policy.n_steps()) {
    std::ostringstream msg;
    msg << "policy has " << policy.n_steps() << " steps but the paths have " << paths.n_steps;
    fail(ErrorKind::Structural, msg.str());
  }
  require(!need_payoff || paths.payoff.size() == paths.n_paths, ErrorKind::Structural,
          "paths carry no payoff; attach one first");
}

std::vector<std::size_t> all_paths(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

Strategy policy_forward(const Policy& policy, const PathSet& paths) {
  check_shapes(policy, paths, false);
  Strategy st(paths.n_paths, paths.n_steps);
  const auto idx = all_paths(paths.n_paths);
  const std::size_t chunks = (paths.n_paths + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, paths.n_paths - first);
    ChunkPass pass(policy, paths, std::span(idx).subspan(first, count));
    pass.forward(false);
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < paths.n_steps; ++k) {
        for (std::size_t x = 0; x < kNumInstruments; ++x) {
          st.at(first + j, k, x) = pass.delta(k, static_cast<Eigen::Index>(j), x);
        }
      }
    }
  });
  return st;
}

LossGrad loss_and_grad(const Policy& policy, const PathSet& paths, double p0,
                       std::span<const std::size_t> batch) {
  check_shapes(policy, paths, true);
  std::vector<std::size_t> all;
  if (batch.empty()) {
    all = all_paths(paths.n_paths);
    batch = all;
  }
  require(!batch.empty(), ErrorKind::InvalidArgument, "empty batch");
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  const std::size_t np = policy.n_params();
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<std::vector<double>> chunk_grad(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, batch.size() - first);
    ChunkPass pass(policy, paths, batch.subspan(first, count));
    pass.forward(true);
    const auto pnl = pass.pnl(p0);
    double s = 0.0;
    for (double v : pnl) s += v * v;
    chunk_loss[c] = s;
    chunk_grad[c].assign(np, 0.0);
    pass.backward(pnl, chunk_grad[c]);
  });
  LossGrad out;
  out.grad.assign(np, 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t c = 0; c < chunks; ++c) {
    out.loss += chunk_loss[c];
    for (std::size_t i = 0; i < np; ++i) out.grad[i] += chunk_grad[c][i];
  }
  out.loss *= inv;
  for (double& g : out.grad) g *= inv;
  return out;
}

double policy_loss(const Policy& policy, const PathSet& paths, double p0,
                   std::span<const std::size_t> batch) {
  check_shapes(policy, paths, true);
  std::vector<std::size_t> all;
  if (batch.empty()) {
    all = all_paths(paths.n_paths);
    batch = all;
  }
  require(!batch.empty(), ErrorKind::InvalidArgument, "empty batch");
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<double> chunk_loss(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, batch.size() - first);
    ChunkPass pass(policy, paths, batch.subspan(first, count));
    pass.forward(false);
    for (double v : pass.pnl(p0)) chunk_loss[c] += v * v;
  });
  double s = 0.0;
  for (double v : chunk_loss) s += v;
  return s / static_cast<double>(batch.size());
}

namespace {

constexpr std::array<char, 8> kPolicyMagic{'R', 'H', 'P', 'O', 'L', 'I', 'C', 'Y'};
constexpr std::uint32_t kPolicyVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(is), ErrorKind::Io, "truncated policy checkpoint");
  return v;
}

}  // namespace

void save_policy(const Policy& policy, const std::filesystem::path& file) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream os(file, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::Io, "cannot open " + file.string());
  os.write(kPolicyMagic.data(), kPolicyMagic.size());
  put<std::uint32_t>(os, kPolicyVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(policy.architecture()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(policy.topology().activation));
  put<std::uint64_t>(os, policy.n_steps());
  put<std::int32_t>(os, policy.hidden_state());
  const auto& w = policy.topology().widths;
  put<std::uint32_t>(os, static_cast<std::uint32_t>(w.size()));
  for (int v : w) put<std::int32_t>(os, v);
  put<double>(os, policy.info().s0);
  put<double>(os, policy.info().log_scale);
  put<double>(os, policy.info().var_level);
  put<std::uint64_t>(os, policy.seed);
  put<std::int32_t>(os, policy.epochs_trained);
  put<std::uint64_t>(os, policy.n_params());
  os.write(reinterpret_cast<const char*>(policy.params().data()),
           static_cast<std::streamsize>(policy.n_params() * sizeof(double)));
  require(static_cast<bool>(os), ErrorKind::Io, "write failed for " + file.string());
}

Policy load_policy(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::Io, "cannot open " + file.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  require(static_cast<bool>(is) && magic == kPolicyMagic, ErrorKind::Io,
          file.string() + " is not a policy checkpoint");
  const auto version = get<std::uint32_t>(is);
  require(version == kPolicyVersion, ErrorKind::Io,
          "unsupported checkpoint version " + std::to_string(version));
  const auto arch = get<std::uint32_t>(is);
  const auto act = get<std::uint32_t>(is);
  require(arch <= 1 && act <= 1, ErrorKind::Io, "corrupt checkpoint header");
  const auto n_steps = get<std::uint64_t>(is);
  const auto hidden_state = get<std::int32_t>(is);
  const auto n_widths = get<std::uint32_t>(is);
  require(n_widths >= 2 && n_widths < 64, ErrorKind::Io, "corrupt checkpoint topology");
  std::vector<int> w(n_widths);
  for (auto& v : w) v = get<std::int32_t>(is);
  InfoSpec info;
  info.s0 = get<double>(is);
  info.log_scale = get<double>(is);
  info.var_level = get<double>(is);
  Policy policy(static_cast<Architecture>(arch), n_steps,
                std::vector<int>(w.begin() + 1, w.end() - 1), static_cast<Activation>(act),
                info, hidden_state);
  require(policy.topology().widths == w, ErrorKind::Io, "checkpoint topology mismatch");
  policy.seed = get<std::uint64_t>(is);
  policy.epochs_trained = get<std::int32_t>(is);
  const auto np = get<std::uint64_t>(is);
  require(np == policy.n_params(), ErrorKind::Io, "checkpoint parameter count mismatch");
  is.read(reinterpret_cast<char*>(policy.params().data()),
          static_cast<std::streamsize>(np * sizeof(double)));
  require(static_cast<bool>(is), ErrorKind::Io, "truncated policy checkpoint");
  return policy;
}

}  // namespace roughhedge
