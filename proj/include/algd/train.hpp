#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "algd/energy.hpp"
#include "algd/env.hpp"
#include "algd/mlp.hpp"
#include "algd/replay.hpp"
#include "algd/rng.hpp"
#include "algd/schedule.hpp"
#include "algd/types.hpp"

namespace algd {

/// Which energy guides the policy: the standard Lagrangian or its
/// augmented (hinged quadratic penalty) form.
enum class Variant { kStandard, kAugmented };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct TrainConfig {
  double gamma = 0.99;
  double gamma_c = 0.99;
  int batch_size = 256;
  double polyak = 0.005;
  int target_update_every = 5;  // gradient steps between target refreshes
  int train_repeat = 10;        // gradient updates per epoch
  double lr = 3e-4;
  int K = 5;  // diffusion steps
  int N = 6;  // Monte-Carlo samples per score target
  int M = 6;  // cost-critic ensemble size
  double rho = 1.0;
  double beta = 0.1;
  double eta_lambda = 0.01;
  double sigma_min = 1e-4;
  double sigma_max = 0.1;
  int emb_dim = 16;
  std::vector<int> score_hidden{128, 128, 128};
  std::vector<int> critic_hidden{256, 256};
  std::vector<double> ensemble_weight_decay{3e-5, 6e-5, 1e-4};  // per layer
  double clip_norm = 10.0;
  std::uint64_t buffer_capacity = 1000000;
  int warmup_steps = 5000;   // uniform-random env steps before updates
  int steps_per_epoch = 400; // env steps per epoch
  std::uint64_t total_env_steps = 200000;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const TrainConfig& cfg);

/// All mutable learner state. Targets mirror online shapes; score_target is
/// Polyak-maintained alongside the critic targets (sampling always uses the
/// online score net).
struct AgentState {
  ScoreNetParams score, score_target;
  MlpParams q1, q2, q1_target, q2_target;
  CostEnsembleParams cost, cost_target;
  DualState dual;
  ScoreAdamState score_opt;
  AdamState q1_opt, q2_opt;
  std::vector<AdamState> cost_opt;
  Variant variant = Variant::kAugmented;
  std::uint64_t grad_steps = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t skipped_rows = 0;  // score-target rows dropped as non-finite
};

/// Fixed RngStream ids per purpose; runs reproduce only because every
/// random draw has a documented owner.
///   1 score init, 2 q1, 3 q2, 10+i cost member i,
///   20 env resets, 21 interaction actions (and warmup), 22 replay indices,
///   23 score-update noise, 24 update-time action sampling, 25 evaluation.
struct TrainStreams {
  RngStream env;
  RngStream action;
  RngStream batch;
  RngStream score;
  RngStream update;
  RngStream eval;

  explicit TrainStreams(std::uint64_t seed)
      : env(seed, 20), action(seed, 21), batch(seed, 22), score(seed, 23), update(seed, 24),
        eval(seed, 25) {}
};

AgentState make_agent(const EnvSpec& spec, const TrainConfig& cfg, Variant variant);

enum class SampleMode { kTrain, kEval };

/// Reverse diffusion from a^K ~ N(0, sigma[K]^2 I):
///   for tau = K..1: a <- a + dsq[tau] * score(s, a, tau) + sqrt(dsq[tau]) * eps
/// Eval mode omits only the tau = 1 noise. Result clipped to [-1,1]^d_a.
/// Draw order: a^K coordinates, then per tau the noise coordinates.
/// Performs exactly K score-net evaluations and touches no critic.
ActionVec sample_action(const AgentState& agent, const StateVec& s, const NoiseSchedule& sch,
                        RngStream& rng, SampleMode mode);

/// Batched variant, one row per state. Noise matrices are drawn row-major
/// (all of a^K, then per tau), so it consumes rng differently from looping
/// sample_action.
Eigen::MatrixXd sample_action_batch(const AgentState& agent, const Eigen::MatrixXd& S,
                                    const NoiseSchedule& sch, RngStream& rng, SampleMode mode);

struct Batch {
  Eigen::MatrixXd S, A, S_next;
  Eigen::VectorXd r, c;
  std::vector<bool> done;
  int size() const { return static_cast<int>(r.size()); }
};

/// Assemble a batch from uniformly sampled transitions.
Batch sample_batch(const ReplayBuffer& buffer, int batch_size, RngStream& rng);

/// TD targets: y_q = r + gamma * min_j Q^target_j(s', a'), y_qc = c +
/// gamma_c * mean_i Qc^target_i(s', a'); rows with done drop the bootstrap.
/// a' is sampled on s' with the online score net in train mode, consuming
/// rng as in sample_action_batch.
struct CriticTargets {
  Eigen::VectorXd y_q, y_qc;
};
CriticTargets critic_targets(const Batch& batch, const AgentState& agent,
                             const NoiseSchedule& sch, const TrainConfig& cfg, RngStream& rng);

struct CriticLosses {
  double q1_loss = 0.0, q2_loss = 0.0, qc_loss = 0.0;
};

/// One Adam step per network on the mean squared TD error; ensemble members
/// fit the shared y_qc and apply their per-layer weight decay.
CriticLosses update_critics(AgentState& agent, const Batch& batch, const CriticTargets& targets,
                            const TrainConfig& cfg);

/// Critic values and action-gradients for a block of (s, a) rows.
struct BatchEnergies {
  Eigen::VectorXd q, qc;        // per row
  Eigen::MatrixXd grad_q, grad_qc;  // rows x d_a
};

/// Override hook for synthetic-critic experiments; default (null) evaluates
/// the agent's critics: q = min(q1, q2) with the gradient of the selected
/// net (ties take q1), qc = ensemble mean with the mean gradient.
using EnergyBatchFn = std::function<BatchEnergies(const Eigen::MatrixXd& S, const Eigen::MatrixXd& A)>;

BatchEnergies critic_energies(const AgentState& agent, const Eigen::MatrixXd& S,
                              const Eigen::MatrixXd& A);

struct ScoreUpdateStats {
  double score_loss = 0.0;
  double mean_ess = 0.0;
  int skipped = 0;  // rows dropped for non-finite targets
};

/// Per row: tau ~ uniform{1..K}, a^tau = forward_perturb(a, tau); N
/// posterior samples a^tau + sigma(tau) * eps feed the weighted Monte-Carlo
/// score target under the variant's energy at the current lambda (detached);
/// then one Adam step on the MSE between score_net_eval(s, a^tau, tau) and
/// the targets. Draw order per row: tau, perturbation coords, then N * d_a
/// sample coords; rows are processed in batch order.
ScoreUpdateStats update_score_net(AgentState& agent, const Batch& batch, const NoiseSchedule& sch,
                                  const TrainConfig& cfg, RngStream& rng,
                                  const EnergyBatchFn* energy_override = nullptr);

/// Batch mean of the online ensemble cost value over fresh policy actions
/// at the batch states; feeds dual_update.
double mean_cost_value(const AgentState& agent, const Eigen::MatrixXd& S,
                       const NoiseSchedule& sch, const TrainConfig& cfg, RngStream& rng);

/// Single gradient update (critics -> score net -> dual ascent), followed by
/// Polyak target refresh every cfg.target_update_every steps.
struct UpdateStats {
  CriticLosses critic;
  ScoreUpdateStats score;
  double lambda_after = 0.0;
};
UpdateStats gradient_update(AgentState& agent, ReplayBuffer& buffer, const NoiseSchedule& sch,
                            const TrainConfig& cfg, TrainStreams& streams,
                            const EnergyBatchFn* energy_override = nullptr);

/// Aggregates of one epoch of interaction + updates.
struct EpochStats {
  std::uint64_t env_steps_end = 0;
  int episodes_finished = 0;
  double train_return = 0.0;        // mean over episodes finished this epoch
  double train_episode_cost = 0.0;  // idem
  double lambda = 0.0;
  double score_loss = 0.0;  // means over this epoch's updates
  double q_loss = 0.0;
  double qc_loss = 0.0;
  double mean_ess = 0.0;
  int updates = 0;
};

/// Owns the interaction loop state so epochs can be advanced one at a time.
class Trainer {
 public:
  Trainer(const EnvSpec& spec, const TrainConfig& cfg, Variant variant);

  /// cfg.steps_per_epoch environment steps with cfg.train_repeat gradient
  /// updates spread evenly across them; updates (and dual ascent) start
  /// only once cfg.warmup_steps env steps have been collected, with
  /// uniform-random warmup actions. Returns the epoch aggregates.
  EpochStats train_epoch();

  const AgentState& agent() const { return agent_; }
  AgentState& agent() { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const NoiseSchedule& schedule() const { return sch_; }
  const EnvSpec& spec() const { return spec_; }
  const TrainConfig& config() const { return cfg_; }
  TrainStreams& streams() { return streams_; }
  int epoch() const { return epoch_; }

 private:
  EnvSpec spec_;
  TrainConfig cfg_;
  NoiseSchedule sch_;
  AgentState agent_;
  ReplayBuffer buffer_;
  TrainStreams streams_;
  EnvState env_state_;
  double ep_return_ = 0.0;
  int epoch_ = 0;
};

struct EvalStats {
  double mean_return = 0.0, sd_return = 0.0;
  double mean_cost = 0.0, sd_cost = 0.0;
};

/// Mean and sd of undiscounted return and episode cost over eval-mode
/// rollouts.
EvalStats evaluate_policy(const AgentState& agent, const EnvSpec& spec, const NoiseSchedule& sch,
                          int episodes, RngStream& rng);

/// Same statistics for uniform-random actions in [-1,1]^d_a.
EvalStats random_policy_stats(const EnvSpec& spec, int episodes, RngStream& rng);

/// Checkpoint packing: parameters, targets, dual state, and counters plus
/// env/train config in metadata. Optimizer moments are not persisted;
/// checkpoints serve evaluation and export, not bit-exact resume.
void save_agent(const std::string& dir, const AgentState& agent, const EnvSpec& spec,
                const TrainConfig& cfg, int epoch);

struct LoadedAgent {
  AgentState agent;
  EnvSpec spec;
  TrainConfig cfg;
  int epoch = 0;
};
LoadedAgent load_agent(const std::string& dir);

}  // namespace algd
