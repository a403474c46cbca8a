#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "algd/rng.hpp"
#include "algd/types.hpp"

namespace algd {

enum class Activation { kRelu, kSilu, kLinear };

struct MlpLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
  Activation act = Activation::kLinear;
};

/// Plain fully-connected network parameters. Forward/backward are free
/// functions; the call counters instrument amortization checks.
struct MlpParams {
  std::vector<MlpLayer> layers;
  mutable std::uint64_t forward_calls = 0;
  mutable std::uint64_t backward_calls = 0;

  int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().W.rows()); }
};

/// Layers dims[0] -> dims[1] -> ... -> dims.back(); hidden layers use
/// hidden_act, the last layer is linear. Weights and biases drawn uniform
/// in +-1/sqrt(fan_in), W row-major then b, per layer in order.
MlpParams make_mlp(const std::vector<int>& dims, Activation hidden_act, RngStream& rng);

/// Cache of per-layer inputs and pre-activations from one forward pass;
/// consumed by exactly one backward pass over the same batch.
struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> preact;
};

/// Batch forward; X has one row per sample, X.cols() == input_dim.
Eigen::MatrixXd forward_mlp(const MlpParams& p, const Eigen::MatrixXd& X, MlpCache* cache = nullptr);

/// Single-sample forward.
Eigen::VectorXd forward_mlp_vec(const MlpParams& p, const Eigen::VectorXd& x, MlpCache* cache = nullptr);

/// Exact reverse-mode gradients. dW/db hold sums over the batch rows of
/// upstream; input_grad has one row per sample.
struct GradBundle {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  Eigen::MatrixXd input_grad;

  double global_norm() const;
};

GradBundle backward_mlp(const MlpParams& p, const MlpCache& cache, const Eigen::MatrixXd& upstream);

/// Input gradient only; skips parameter gradients.
Eigen::MatrixXd backward_input_mlp(const MlpParams& p, const MlpCache& cache,
                                   const Eigen::MatrixXd& upstream);

/// target <- (1 - kappa) * target + kappa * online, elementwise.
void polyak_update(MlpParams& target, const MlpParams& online, double kappa);

/// Adam first/second moments mirroring an MlpParams.
struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;
};

AdamState make_adam_state(const MlpParams& p);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;                 // 0 disables clipping
  std::vector<double> weight_decay = {};  // per layer, decoupled, weights only
};

void adam_step(MlpParams& p, const GradBundle& g, AdamState& st, const AdamConfig& cfg);

/// Score network: a learnable diffusion-step embedding table feeding an MLP
/// trunk over concat(s, a, embedding[tau-1]).
struct ScoreNetParams {
  Eigen::MatrixXd embedding;  // K x emb_dim
  MlpParams trunk;            // (d_s + d_a + emb_dim) -> d_a
  int d_s = 0;
  int d_a = 0;

  int K() const { return static_cast<int>(embedding.rows()); }
  int emb_dim() const { return static_cast<int>(embedding.cols()); }
};

/// Embedding entries drawn uniform in (-1, 1) row-major, then the trunk as
/// in make_mlp.
ScoreNetParams make_score_net(int d_s, int d_a, int K, int emb_dim,
                              const std::vector<int>& hidden, RngStream& rng);

/// Trunk applied to concat(s, a, embedding[tau-1]); 1 <= tau <= K.
ActionVec score_net_eval(const ScoreNetParams& p, const StateVec& s, const ActionVec& a, int tau);

/// Batched evaluation with per-row tau; optional cache for training.
Eigen::MatrixXd score_net_eval_batch(const ScoreNetParams& p, const Eigen::MatrixXd& S,
                                     const Eigen::MatrixXd& A, const std::vector<int>& taus,
                                     MlpCache* cache = nullptr);

/// Adam over trunk and embedding jointly.
struct ScoreAdamState {
  AdamState trunk;
  Eigen::MatrixXd m_emb, v_emb;
};

ScoreAdamState make_score_adam_state(const ScoreNetParams& p);

/// One Adam step from a trunk backward pass: parameter grads from bundle,
/// embedding row grads scattered from the embedding slice of input_grad.
void score_adam_step(ScoreNetParams& p, const GradBundle& trunk_grads,
                     const std::vector<int>& taus, ScoreAdamState& st, const AdamConfig& cfg);

/// M independently initialized members sharing one architecture.
struct CostEnsembleParams {
  std::vector<MlpParams> members;
  int size() const { return static_cast<int>(members.size()); }
};

/// Member i is initialized from a fresh RngStream(seed, stream_id0 + i).
CostEnsembleParams make_cost_ensemble(int M, const std::vector<int>& dims, Activation hidden_act,
                                      std::uint64_t seed, std::uint64_t stream_id0);

}  // namespace algd
