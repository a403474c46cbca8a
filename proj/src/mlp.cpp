#include "algd/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace algd {
namespace {

Eigen::ArrayXXd stable_sigmoid(const Eigen::ArrayXXd& z) {
  // exp(-|z|) never overflows; both branches share it.
  Eigen::ArrayXXd e = (-z.abs()).exp();
  return (z >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
}

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSilu: {
      Eigen::ArrayXXd a = z.array();
      return (a * stable_sigmoid(a)).matrix();
    }
    case Activation::kLinear:
      return z;
  }
  throw std::logic_error("unknown activation");
}

// Derivative w.r.t. pre-activation; ReLU uses 0 at exactly 0.
Eigen::ArrayXXd activation_deriv(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>();
    case Activation::kSilu: {
      Eigen::ArrayXXd a = z.array();
      Eigen::ArrayXXd sig = stable_sigmoid(a);
      return sig * (1.0 + a * (1.0 - sig));
    }
    case Activation::kLinear:
      return Eigen::ArrayXXd::Ones(z.rows(), z.cols());
  }
  throw std::logic_error("unknown activation");
}

}  // namespace

MlpParams make_mlp(const std::vector<int>& dims, Activation hidden_act, RngStream& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("make_mlp: dims must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    MlpLayer layer;
    layer.W.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.W(r, c) = rng.uniform_in(-bound, bound);
    layer.b.resize(fan_out);
    for (int r = 0; r < fan_out; ++r) layer.b(r) = rng.uniform_in(-bound, bound);
    layer.act = (l + 2 < dims.size()) ? hidden_act : Activation::kLinear;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::MatrixXd forward_mlp(const MlpParams& p, const Eigen::MatrixXd& X, MlpCache* cache) {
  if (X.cols() != p.input_dim()) throw std::invalid_argument("forward_mlp: input width mismatch");
  ++p.forward_calls;
  if (cache) {
    cache->inputs.clear();
    cache->preact.clear();
  }
  Eigen::MatrixXd h = X;
  for (const MlpLayer& layer : p.layers) {
    Eigen::MatrixXd z = h * layer.W.transpose();
    z.rowwise() += layer.b.transpose();
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->preact.push_back(z);
    }
    h = apply_activation(layer.act, z);
  }
  return h;
}

Eigen::VectorXd forward_mlp_vec(const MlpParams& p, const Eigen::VectorXd& x, MlpCache* cache) {
  Eigen::MatrixXd out = forward_mlp(p, x.transpose(), cache);
  return out.row(0).transpose();
}

double GradBundle::global_norm() const {
  double sq = 0.0;
  for (const auto& g : dW) sq += g.squaredNorm();
  for (const auto& g : db) sq += g.squaredNorm();
  return std::sqrt(sq);
}

GradBundle backward_mlp(const MlpParams& p, const MlpCache& cache, const Eigen::MatrixXd& upstream) {
  const std::size_t L = p.layers.size();
  if (cache.inputs.size() != L || cache.preact.size() != L)
    throw std::invalid_argument("backward_mlp: cache does not match network");
  ++p.backward_calls;
  GradBundle g;
  g.dW.resize(L);
  g.db.resize(L);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = L; li-- > 0;) {
    const MlpLayer& layer = p.layers[li];
    if (layer.act != Activation::kLinear)
      delta = (delta.array() * activation_deriv(layer.act, cache.preact[li])).matrix();
    g.dW[li] = delta.transpose() * cache.inputs[li];
    g.db[li] = delta.colwise().sum().transpose();
    delta = delta * layer.W;
  }
  g.input_grad = std::move(delta);
  return g;
}

Eigen::MatrixXd backward_input_mlp(const MlpParams& p, const MlpCache& cache,
                                   const Eigen::MatrixXd& upstream) {
  const std::size_t L = p.layers.size();
  if (cache.preact.size() != L)
    throw std::invalid_argument("backward_input_mlp: cache does not match network");
  ++p.backward_calls;
  Eigen::MatrixXd delta = upstream;
  for (std::size_t li = L; li-- > 0;) {
    const MlpLayer& layer = p.layers[li];
    if (layer.act != Activation::kLinear)
      delta = (delta.array() * activation_deriv(layer.act, cache.preact[li])).matrix();
    delta = delta * layer.W;
  }
  return delta;
}

void polyak_update(MlpParams& target, const MlpParams& online, double kappa) {
  if (target.layers.size() != online.layers.size())
    throw std::invalid_argument("polyak_update: layer count mismatch");
  for (std::size_t l = 0; l < target.layers.size(); ++l)
    if (target.layers[l].W.rows() != online.layers[l].W.rows() ||
        target.layers[l].W.cols() != online.layers[l].W.cols())
      throw std::invalid_argument("polyak_update: layer shape mismatch");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].W = (1.0 - kappa) * target.layers[l].W + kappa * online.layers[l].W;
    target.layers[l].b = (1.0 - kappa) * target.layers[l].b + kappa * online.layers[l].b;
  }
}

AdamState make_adam_state(const MlpParams& p) {
  AdamState st;
  for (const MlpLayer& layer : p.layers) {
    st.mW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
    st.vW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
    st.mb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    st.vb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
  }
  return st;
}

namespace {

template <typename Param, typename Grad, typename Moment>
void adam_update_one(Param& p, const Grad& g, Moment& m, Moment& v, double scale, long t,
                     const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * scale * g;
  v = (cfg.beta2 * v.array() + (1.0 - cfg.beta2) * (scale * g.array()).square()).matrix();
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  p.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace

void adam_step(MlpParams& p, const GradBundle& g, AdamState& st, const AdamConfig& cfg) {
  const std::size_t L = p.layers.size();
  if (g.dW.size() != L || g.db.size() != L)
    throw std::invalid_argument("adam_step: gradient does not match network");
  if (!cfg.weight_decay.empty() && cfg.weight_decay.size() != L)
    throw std::invalid_argument("adam_step: weight_decay must have one entry per layer");
  double scale = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double norm = g.global_norm();
    if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
  }
  ++st.t;
  for (std::size_t l = 0; l < L; ++l) {
    if (!cfg.weight_decay.empty() && cfg.weight_decay[l] > 0.0)
      p.layers[l].W *= 1.0 - cfg.lr * cfg.weight_decay[l];
    adam_update_one(p.layers[l].W, g.dW[l], st.mW[l], st.vW[l], scale, st.t, cfg);
    adam_update_one(p.layers[l].b, g.db[l], st.mb[l], st.vb[l], scale, st.t, cfg);
  }
}

ScoreNetParams make_score_net(int d_s, int d_a, int K, int emb_dim,
                              const std::vector<int>& hidden, RngStream& rng) {
  if (d_s <= 0 || d_a <= 0 || K <= 0 || emb_dim <= 0)
    throw std::invalid_argument("make_score_net: dims must be positive");
  ScoreNetParams p;
  p.d_s = d_s;
  p.d_a = d_a;
  p.embedding.resize(K, emb_dim);
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < emb_dim; ++c) p.embedding(r, c) = rng.uniform_in(-1.0, 1.0);
  std::vector<int> dims;
  dims.push_back(d_s + d_a + emb_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(d_a);
  p.trunk = make_mlp(dims, Activation::kRelu, rng);
  return p;
}

ActionVec score_net_eval(const ScoreNetParams& p, const StateVec& s, const ActionVec& a, int tau) {
  Eigen::MatrixXd out =
      score_net_eval_batch(p, s.transpose(), a.transpose(), std::vector<int>{tau});
  return out.row(0).transpose();
}

Eigen::MatrixXd score_net_eval_batch(const ScoreNetParams& p, const Eigen::MatrixXd& S,
                                     const Eigen::MatrixXd& A, const std::vector<int>& taus,
                                     MlpCache* cache) {
  const Eigen::Index B = S.rows();
  if (A.rows() != B || static_cast<Eigen::Index>(taus.size()) != B)
    throw std::invalid_argument("score_net_eval_batch: batch size mismatch");
  if (S.cols() != p.d_s || A.cols() != p.d_a)
    throw std::invalid_argument("score_net_eval_batch: feature width mismatch");
  Eigen::MatrixXd X(B, p.d_s + p.d_a + p.emb_dim());
  X.leftCols(p.d_s) = S;
  X.middleCols(p.d_s, p.d_a) = A;
  for (Eigen::Index i = 0; i < B; ++i) {
    const int tau = taus[static_cast<std::size_t>(i)];
    if (tau < 1 || tau > p.K())
      throw std::invalid_argument("score_net_eval_batch: tau out of range");
    X.row(i).tail(p.emb_dim()) = p.embedding.row(tau - 1);
  }
  return forward_mlp(p.trunk, X, cache);
}

ScoreAdamState make_score_adam_state(const ScoreNetParams& p) {
  ScoreAdamState st;
  st.trunk = make_adam_state(p.trunk);
  st.m_emb = Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols());
  st.v_emb = Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols());
  return st;
}

void score_adam_step(ScoreNetParams& p, const GradBundle& trunk_grads,
                     const std::vector<int>& taus, ScoreAdamState& st, const AdamConfig& cfg) {
  if (trunk_grads.input_grad.rows() != static_cast<Eigen::Index>(taus.size()))
    throw std::invalid_argument("score_adam_step: taus do not match batch");
  Eigen::MatrixXd emb_grad = Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols());
  for (std::size_t i = 0; i < taus.size(); ++i)
    emb_grad.row(taus[i] - 1) +=
        trunk_grads.input_grad.row(static_cast<Eigen::Index>(i)).tail(p.emb_dim());
  // Clip trunk and embedding jointly, then run per-tensor Adam unclipped.
  double scale = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double tn = trunk_grads.global_norm();
    const double norm = std::sqrt(tn * tn + emb_grad.squaredNorm());
    if (norm > cfg.clip_norm) scale = cfg.clip_norm / norm;
  }
  AdamConfig inner = cfg;
  inner.clip_norm = 0.0;
  if (scale != 1.0) {
    GradBundle scaled = trunk_grads;
    for (auto& g : scaled.dW) g *= scale;
    for (auto& g : scaled.db) g *= scale;
    emb_grad *= scale;
    adam_step(p.trunk, scaled, st.trunk, inner);
  } else {
    adam_step(p.trunk, trunk_grads, st.trunk, inner);
  }
  adam_update_one(p.embedding, emb_grad, st.m_emb, st.v_emb, 1.0, st.trunk.t, inner);
}

CostEnsembleParams make_cost_ensemble(int M, const std::vector<int>& dims, Activation hidden_act,
                                      std::uint64_t seed, std::uint64_t stream_id0) {
  if (M <= 0) throw std::invalid_argument("make_cost_ensemble: M must be positive");
  CostEnsembleParams ens;
  for (int i = 0; i < M; ++i) {
    RngStream rng(seed, stream_id0 + static_cast<std::uint64_t>(i));
    ens.members.push_back(make_mlp(dims, hidden_act, rng));
  }
  return ens;
}

}  // namespace algd
