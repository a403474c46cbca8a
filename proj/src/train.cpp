#include "algd/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "algd/checkpoint.hpp"
#include "algd/config.hpp"

namespace algd {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("TrainConfig: " + msg);
}

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

std::vector<int> critic_dims(const EnvSpec& spec, const TrainConfig& cfg) {
  std::vector<int> dims;
  dims.push_back(spec.d_s + spec.d_a);
  dims.insert(dims.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  dims.push_back(1);
  return dims;
}

double mean_sq_residual(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

struct Welford {
  double mean = 0.0, m2 = 0.0;
  int n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double sd() const { return n > 0 ? std::sqrt(m2 / n) : 0.0; }  // population sd
};

}  // namespace

std::string variant_name(Variant v) {
  return v == Variant::kStandard ? "standard" : "augmented";
}

Variant variant_from_name(const std::string& name) {
  if (name == "standard") return Variant::kStandard;
  if (name == "augmented") return Variant::kAugmented;
  throw std::invalid_argument("unknown variant: " + name + " (expected standard|augmented)");
}

void validate(const TrainConfig& cfg) {
  require(cfg.gamma > 0.0 && cfg.gamma <= 1.0, "gamma must be in (0,1]");
  require(cfg.gamma_c > 0.0 && cfg.gamma_c <= 1.0, "gamma_c must be in (0,1]");
  require(cfg.batch_size > 0, "batch_size must be positive");
  require(cfg.polyak > 0.0 && cfg.polyak <= 1.0, "polyak must be in (0,1]");
  require(cfg.target_update_every > 0, "target_update_every must be positive");
  require(cfg.train_repeat >= 0, "train_repeat must be nonnegative");
  require(cfg.lr > 0.0, "lr must be positive");
  require(cfg.K >= 1, "K must be >= 1");
  require(cfg.N >= 1, "N must be >= 1");
  require(cfg.M >= 1, "M must be >= 1");
  require(cfg.rho > 0.0, "rho must be positive");
  require(cfg.beta > 0.0, "beta must be positive");
  require(cfg.eta_lambda > 0.0, "eta_lambda must be positive");
  require(cfg.sigma_min > 0.0 && cfg.sigma_min < cfg.sigma_max,
          "need 0 < sigma_min < sigma_max");
  require(cfg.emb_dim > 0, "emb_dim must be positive");
  require(!cfg.score_hidden.empty(), "score_hidden must be nonempty");
  require(!cfg.critic_hidden.empty(), "critic_hidden must be nonempty");
  require(cfg.ensemble_weight_decay.size() == cfg.critic_hidden.size() + 1,
          "ensemble_weight_decay needs one entry per ensemble layer");
  require(cfg.clip_norm >= 0.0, "clip_norm must be nonnegative");
  require(cfg.buffer_capacity > 0, "buffer_capacity must be positive");
  require(cfg.warmup_steps >= 0, "warmup_steps must be nonnegative");
  require(cfg.steps_per_epoch > 0, "steps_per_epoch must be positive");
}

AgentState make_agent(const EnvSpec& spec, const TrainConfig& cfg, Variant variant) {
  validate(cfg);
  AgentState agent;
  agent.variant = variant;
  {
    RngStream rng(cfg.seed, 1);
    agent.score = make_score_net(spec.d_s, spec.d_a, cfg.K, cfg.emb_dim, cfg.score_hidden, rng);
  }
  const std::vector<int> qdims = critic_dims(spec, cfg);
  {
    RngStream rng(cfg.seed, 2);
    agent.q1 = make_mlp(qdims, Activation::kRelu, rng);
  }
  {
    RngStream rng(cfg.seed, 3);
    agent.q2 = make_mlp(qdims, Activation::kRelu, rng);
  }
  agent.cost = make_cost_ensemble(cfg.M, qdims, Activation::kSilu, cfg.seed, 10);
  agent.score_target = agent.score;
  agent.q1_target = agent.q1;
  agent.q2_target = agent.q2;
  agent.cost_target = agent.cost;
  agent.dual = DualState{0.0, cfg.rho, spec.h, cfg.eta_lambda};
  agent.score_opt = make_score_adam_state(agent.score);
  agent.q1_opt = make_adam_state(agent.q1);
  agent.q2_opt = make_adam_state(agent.q2);
  for (int i = 0; i < cfg.M; ++i) agent.cost_opt.push_back(make_adam_state(agent.cost.members[i]));
  return agent;
}

ActionVec sample_action(const AgentState& agent, const StateVec& s, const NoiseSchedule& sch,
                        RngStream& rng, SampleMode mode) {
  const int d_a = agent.score.d_a;
  ActionVec a(d_a);
  for (int k = 0; k < d_a; ++k) a(k) = sch.sigma[static_cast<std::size_t>(sch.K)] * rng.normal();
  for (int tau = sch.K; tau >= 1; --tau) {
    const double dsq = sch.dsq_at(tau);
    const ActionVec drift = score_net_eval(agent.score, s, a, tau);
    a += dsq * drift;
    if (mode == SampleMode::kTrain || tau > 1) {
      const double sd = std::sqrt(dsq);
      for (int k = 0; k < d_a; ++k) a(k) += sd * rng.normal();
    }
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::MatrixXd sample_action_batch(const AgentState& agent, const Eigen::MatrixXd& S,
                                    const NoiseSchedule& sch, RngStream& rng, SampleMode mode) {
  const Eigen::Index B = S.rows();
  const int d_a = agent.score.d_a;
  Eigen::MatrixXd A =
      sch.sigma[static_cast<std::size_t>(sch.K)] * normal_matrix(B, d_a, rng);
  for (int tau = sch.K; tau >= 1; --tau) {
    const double dsq = sch.dsq_at(tau);
    const std::vector<int> taus(static_cast<std::size_t>(B), tau);
    A += dsq * score_net_eval_batch(agent.score, S, A, taus);
    if (mode == SampleMode::kTrain || tau > 1) A += std::sqrt(dsq) * normal_matrix(B, d_a, rng);
  }
  return A.cwiseMax(-1.0).cwiseMin(1.0);
}

Batch sample_batch(const ReplayBuffer& buffer, int batch_size, RngStream& rng) {
  const std::vector<Transition> rows = buffer.sample(static_cast<std::size_t>(batch_size), rng);
  const int d_s = static_cast<int>(rows[0].state.size());
  const int d_a = static_cast<int>(rows[0].action.size());
  Batch b;
  b.S.resize(batch_size, d_s);
  b.A.resize(batch_size, d_a);
  b.S_next.resize(batch_size, d_s);
  b.r.resize(batch_size);
  b.c.resize(batch_size);
  b.done.resize(static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    const Transition& t = rows[static_cast<std::size_t>(i)];
    b.S.row(i) = t.state.transpose();
    b.A.row(i) = t.action.transpose();
    b.S_next.row(i) = t.next_state.transpose();
    b.r(i) = t.reward;
    b.c(i) = t.cost;
    b.done[static_cast<std::size_t>(i)] = t.done;
  }
  return b;
}

CriticTargets critic_targets(const Batch& batch, const AgentState& agent,
                             const NoiseSchedule& sch, const TrainConfig& cfg, RngStream& rng) {
  const Eigen::MatrixXd A_next = sample_action_batch(agent, batch.S_next, sch, rng,
                                                     SampleMode::kTrain);
  const Eigen::MatrixXd X = hstack(batch.S_next, A_next);
  const Eigen::VectorXd q1 = forward_mlp(agent.q1_target, X).col(0);
  const Eigen::VectorXd q2 = forward_mlp(agent.q2_target, X).col(0);
  const Eigen::VectorXd qmin = q1.cwiseMin(q2);
  Eigen::VectorXd qc = Eigen::VectorXd::Zero(batch.size());
  for (const MlpParams& member : agent.cost_target.members)
    qc += forward_mlp(member, X).col(0);
  qc /= static_cast<double>(agent.cost_target.size());

  CriticTargets t;
  t.y_q.resize(batch.size());
  t.y_qc.resize(batch.size());
  for (int i = 0; i < batch.size(); ++i) {
    const bool terminal = batch.done[static_cast<std::size_t>(i)];
    t.y_q(i) = batch.r(i) + (terminal ? 0.0 : cfg.gamma * qmin(i));
    t.y_qc(i) = batch.c(i) + (terminal ? 0.0 : cfg.gamma_c * qc(i));
  }
  return t;
}

CriticLosses update_critics(AgentState& agent, const Batch& batch, const CriticTargets& targets,
                            const TrainConfig& cfg) {
  const Eigen::MatrixXd X = hstack(batch.S, batch.A);
  const double B = static_cast<double>(batch.size());
  AdamConfig opt;
  opt.lr = cfg.lr;
  opt.clip_norm = cfg.clip_norm;

  CriticLosses losses;
  auto fit = [&](MlpParams& net, AdamState& st, const Eigen::VectorXd& y,
                 const AdamConfig& cfg_net) {
    MlpCache cache;
    const Eigen::VectorXd pred = forward_mlp(net, X, &cache).col(0);
    const Eigen::VectorXd resid = pred - y;
    const Eigen::MatrixXd upstream = (2.0 / B) * resid;
    adam_step(net, backward_mlp(net, cache, upstream), st, cfg_net);
    return resid.squaredNorm() / B;
  };

  losses.q1_loss = fit(agent.q1, agent.q1_opt, targets.y_q, opt);
  losses.q2_loss = fit(agent.q2, agent.q2_opt, targets.y_q, opt);

  AdamConfig ens_opt = opt;
  ens_opt.weight_decay = cfg.ensemble_weight_decay;
  double qc_sum = 0.0;
  for (int i = 0; i < agent.cost.size(); ++i)
    qc_sum += fit(agent.cost.members[static_cast<std::size_t>(i)],
                  agent.cost_opt[static_cast<std::size_t>(i)], targets.y_qc, ens_opt);
  losses.qc_loss = qc_sum / agent.cost.size();
  return losses;
}

BatchEnergies critic_energies(const AgentState& agent, const Eigen::MatrixXd& S,
                              const Eigen::MatrixXd& A) {
  const Eigen::Index R = S.rows();
  const int d_a = static_cast<int>(A.cols());
  const Eigen::MatrixXd X = hstack(S, A);

  MlpCache c1, c2;
  const Eigen::VectorXd q1 = forward_mlp(agent.q1, X, &c1).col(0);
  const Eigen::VectorXd q2 = forward_mlp(agent.q2, X, &c2).col(0);

  BatchEnergies e;
  e.q = q1.cwiseMin(q2);
  // Gradient of min(q1, q2): route each row through its selected net
  // (ties take q1).
  Eigen::MatrixXd up1(R, 1), up2(R, 1);
  for (Eigen::Index i = 0; i < R; ++i) {
    const bool first = q1(i) <= q2(i);
    up1(i, 0) = first ? 1.0 : 0.0;
    up2(i, 0) = first ? 0.0 : 1.0;
  }
  const Eigen::MatrixXd g1 = backward_input_mlp(agent.q1, c1, up1);
  const Eigen::MatrixXd g2 = backward_input_mlp(agent.q2, c2, up2);
  e.grad_q = (g1 + g2).rightCols(d_a);

  e.qc = Eigen::VectorXd::Zero(R);
  Eigen::MatrixXd gc = Eigen::MatrixXd::Zero(R, d_a);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(R, 1);
  for (const MlpParams& member : agent.cost.members) {
    MlpCache cm;
    e.qc += forward_mlp(member, X, &cm).col(0);
    gc += backward_input_mlp(member, cm, ones).rightCols(d_a);
  }
  const double M = static_cast<double>(agent.cost.size());
  e.qc /= M;
  e.grad_qc = gc / M;
  return e;
}

ScoreUpdateStats update_score_net(AgentState& agent, const Batch& batch, const NoiseSchedule& sch,
                                  const TrainConfig& cfg, RngStream& rng,
                                  const EnergyBatchFn* energy_override) {
  const int B = batch.size();
  const int d_a = agent.score.d_a;
  const int N = cfg.N;

  // All randomness first, row-major per row: tau, perturbation, N posterior
  // samples.
  std::vector<int> taus(static_cast<std::size_t>(B));
  Eigen::MatrixXd A_tau(B, d_a);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(B) * N, d_a);
  Eigen::MatrixXd S_rep(static_cast<Eigen::Index>(B) * N, batch.S.cols());
  for (int i = 0; i < B; ++i) {
    const int tau = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(sch.K)));
    taus[static_cast<std::size_t>(i)] = tau;
    const double sigma = sch.sigma_at(tau);
    for (int k = 0; k < d_a; ++k) A_tau(i, k) = batch.A(i, k) + sigma * rng.normal();
    for (int j = 0; j < N; ++j) {
      const Eigen::Index row = static_cast<Eigen::Index>(i) * N + j;
      for (int k = 0; k < d_a; ++k) samples(row, k) = A_tau(i, k) + sigma * rng.normal();
      S_rep.row(row) = batch.S.row(i);
    }
  }

  const BatchEnergies en = energy_override ? (*energy_override)(S_rep, samples)
                                           : critic_energies(agent, S_rep, samples);

  // Per-sample energy E = -L/beta and gradient of L under the variant's
  // Lagrangian at the current (detached) dual state.
  const DualState d = agent.dual;
  Eigen::VectorXd E(static_cast<Eigen::Index>(B) * N);
  Eigen::MatrixXd gradL(static_cast<Eigen::Index>(B) * N, d_a);
  for (Eigen::Index rix = 0; rix < E.size(); ++rix) {
    double L, mult;
    if (agent.variant == Variant::kAugmented) {
      mult = std::max(0.0, d.lambda + d.rho * (en.qc(rix) - d.h));
      L = -en.q(rix) + (mult * mult - d.lambda * d.lambda) / (2.0 * d.rho);
    } else {
      mult = d.lambda;
      L = -en.q(rix) + d.lambda * (en.qc(rix) - d.h);
    }
    E(rix) = -L / cfg.beta;
    gradL.row(rix) = -en.grad_q.row(rix) + mult * en.grad_qc.row(rix);
  }

  // Log-Sum-Exp softmax per row over its N samples; non-finite rows are
  // skipped and counted.
  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(B, d_a);
  std::vector<bool> keep(static_cast<std::size_t>(B), true);
  ScoreUpdateStats stats;
  double ess_sum = 0.0;
  for (int i = 0; i < B; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * N;
    double e_max = -std::numeric_limits<double>::infinity();
    bool finite = true;
    for (int j = 0; j < N; ++j) {
      const double e = E(base + j);
      if (!std::isfinite(e) || !gradL.row(base + j).allFinite()) {
        finite = false;
        break;
      }
      e_max = std::max(e_max, e);
    }
    if (!finite) {
      keep[static_cast<std::size_t>(i)] = false;
      ++stats.skipped;
      continue;
    }
    double z = 0.0, w_sq = 0.0;
    ActionVec acc = ActionVec::Zero(d_a);
    for (int j = 0; j < N; ++j) z += std::exp(E(base + j) - e_max);
    for (int j = 0; j < N; ++j) {
      const double w = std::exp(E(base + j) - e_max) / z;
      w_sq += w * w;
      acc += w * (-gradL.row(base + j).transpose() / cfg.beta);
    }
    target.row(i) = acc.transpose();
    ess_sum += 1.0 / w_sq;
  }
  agent.skipped_rows += static_cast<std::uint64_t>(stats.skipped);
  const int kept = B - stats.skipped;
  if (kept == 0) return stats;
  stats.mean_ess = ess_sum / kept;

  MlpCache cache;
  const Eigen::MatrixXd pred = score_net_eval_batch(agent.score, batch.S, A_tau, taus, &cache);
  Eigen::MatrixXd resid = pred - target;
  for (int i = 0; i < B; ++i)
    if (!keep[static_cast<std::size_t>(i)]) resid.row(i).setZero();
  stats.score_loss = resid.squaredNorm() / kept;

  const Eigen::MatrixXd upstream = (2.0 / kept) * resid;
  const GradBundle g = backward_mlp(agent.score.trunk, cache, upstream);
  AdamConfig opt;
  opt.lr = cfg.lr;
  opt.clip_norm = cfg.clip_norm;
  score_adam_step(agent.score, g, taus, agent.score_opt, opt);
  return stats;
}

double mean_cost_value(const AgentState& agent, const Eigen::MatrixXd& S,
                       const NoiseSchedule& sch, const TrainConfig& cfg, RngStream& rng) {
  (void)cfg;
  const Eigen::MatrixXd A = sample_action_batch(agent, S, sch, rng, SampleMode::kTrain);
  const Eigen::MatrixXd X = hstack(S, A);
  double sum = 0.0;
  for (const MlpParams& member : agent.cost.members) sum += forward_mlp(member, X).col(0).mean();
  return sum / agent.cost.size();
}

UpdateStats gradient_update(AgentState& agent, ReplayBuffer& buffer, const NoiseSchedule& sch,
                            const TrainConfig& cfg, TrainStreams& streams,
                            const EnergyBatchFn* energy_override) {
  const Batch batch = sample_batch(buffer, cfg.batch_size, streams.batch);
  const CriticTargets targets = critic_targets(batch, agent, sch, cfg, streams.update);
  UpdateStats stats;
  stats.critic = update_critics(agent, batch, targets, cfg);
  stats.score = update_score_net(agent, batch, sch, cfg, streams.score, energy_override);
  const double qbar = mean_cost_value(agent, batch.S, sch, cfg, streams.update);
  agent.dual = dual_update(agent.dual, qbar);
  stats.lambda_after = agent.dual.lambda;

  ++agent.grad_steps;
  if (agent.grad_steps % static_cast<std::uint64_t>(cfg.target_update_every) == 0) {
    polyak_update(agent.q1_target, agent.q1, cfg.polyak);
    polyak_update(agent.q2_target, agent.q2, cfg.polyak);
    for (int i = 0; i < agent.cost.size(); ++i)
      polyak_update(agent.cost_target.members[static_cast<std::size_t>(i)],
                    agent.cost.members[static_cast<std::size_t>(i)], cfg.polyak);
    polyak_update(agent.score_target.trunk, agent.score.trunk, cfg.polyak);
    agent.score_target.embedding = (1.0 - cfg.polyak) * agent.score_target.embedding +
                                   cfg.polyak * agent.score.embedding;
  }
  return stats;
}

Trainer::Trainer(const EnvSpec& spec, const TrainConfig& cfg, Variant variant)
    : spec_(spec),
      cfg_(cfg),
      sch_(build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max)),
      agent_(make_agent(spec, cfg, variant)),
      buffer_(cfg.buffer_capacity),
      streams_(cfg.seed),
      env_state_(reset_env(spec, streams_.env)) {}

EpochStats Trainer::train_epoch() {
  EpochStats st;
  Welford returns, costs;
  double loss_q = 0.0, loss_qc = 0.0, loss_score = 0.0, ess = 0.0;

  for (int j = 0; j < cfg_.steps_per_epoch; ++j) {
    const bool warm = agent_.env_steps < static_cast<std::uint64_t>(cfg_.warmup_steps);
    ActionVec a(spec_.d_a);
    if (warm)
      for (int k = 0; k < spec_.d_a; ++k) a(k) = streams_.action.uniform_in(-1.0, 1.0);
    else
      a = sample_action(agent_, env_state_.s, sch_, streams_.action, SampleMode::kTrain);

    const StepResult sr = step_env(spec_, env_state_, a);
    buffer_.push({env_state_.s, a, sr.reward, sr.cost, sr.next.s, sr.done});
    ep_return_ += sr.reward;
    ++agent_.env_steps;

    if (sr.done) {
      returns.add(ep_return_);
      costs.add(sr.next.episode_cost);
      ep_return_ = 0.0;
      env_state_ = reset_env(spec_, streams_.env);
    } else {
      env_state_ = sr.next;
    }

    if (!warm && cfg_.train_repeat > 0) {
      // Spread cfg_.train_repeat updates evenly over the epoch's steps.
      const long before = static_cast<long>(j) * cfg_.train_repeat / cfg_.steps_per_epoch;
      const long after = (static_cast<long>(j) + 1) * cfg_.train_repeat / cfg_.steps_per_epoch;
      for (long u = before; u < after; ++u) {
        const UpdateStats us = gradient_update(agent_, buffer_, sch_, cfg_, streams_);
        loss_q += 0.5 * (us.critic.q1_loss + us.critic.q2_loss);
        loss_qc += us.critic.qc_loss;
        loss_score += us.score.score_loss;
        ess += us.score.mean_ess;
        ++st.updates;
      }
    }
  }

  const double dnan = std::numeric_limits<double>::quiet_NaN();
  st.env_steps_end = agent_.env_steps;
  st.episodes_finished = returns.n;
  st.train_return = returns.n > 0 ? returns.mean : dnan;
  st.train_episode_cost = costs.n > 0 ? costs.mean : dnan;
  st.lambda = agent_.dual.lambda;
  st.score_loss = st.updates > 0 ? loss_score / st.updates : dnan;
  st.q_loss = st.updates > 0 ? loss_q / st.updates : dnan;
  st.qc_loss = st.updates > 0 ? loss_qc / st.updates : dnan;
  st.mean_ess = st.updates > 0 ? ess / st.updates : dnan;
  ++epoch_;
  return st;
}

EvalStats evaluate_policy(const AgentState& agent, const EnvSpec& spec, const NoiseSchedule& sch,
                          int episodes, RngStream& rng) {
  if (episodes <= 0) throw std::invalid_argument("evaluate_policy: episodes must be positive");
  Welford returns, costs;
  for (int e = 0; e < episodes; ++e) {
    EnvState st = reset_env(spec, rng);
    double ret = 0.0;
    while (!st.done) {
      const ActionVec a = sample_action(agent, st.s, sch, rng, SampleMode::kEval);
      const StepResult sr = step_env(spec, st, a);
      ret += sr.reward;
      st = sr.next;
    }
    returns.add(ret);
    costs.add(st.episode_cost);
  }
  return EvalStats{returns.mean, returns.sd(), costs.mean, costs.sd()};
}

EvalStats random_policy_stats(const EnvSpec& spec, int episodes, RngStream& rng) {
  if (episodes <= 0) throw std::invalid_argument("random_policy_stats: episodes must be positive");
  Welford returns, costs;
  for (int e = 0; e < episodes; ++e) {
    EnvState st = reset_env(spec, rng);
    double ret = 0.0;
    ActionVec a(spec.d_a);
    while (!st.done) {
      for (int k = 0; k < spec.d_a; ++k) a(k) = rng.uniform_in(-1.0, 1.0);
      const StepResult sr = step_env(spec, st, a);
      ret += sr.reward;
      st = sr.next;
    }
    returns.add(ret);
    costs.add(st.episode_cost);
  }
  return EvalStats{returns.mean, returns.sd(), costs.mean, costs.sd()};
}

namespace {

void pack_mlp(std::vector<NamedTensor>& out, const std::string& prefix, const MlpParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    out.push_back(tensor_from_matrix(prefix + "." + std::to_string(l) + ".W", p.layers[l].W));
    out.push_back(tensor_from_vector(prefix + "." + std::to_string(l) + ".b", p.layers[l].b));
  }
}

void unpack_mlp(const Checkpoint& ckpt, const std::string& prefix, MlpParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Eigen::MatrixXd W = matrix_from_tensor(ckpt.at(prefix + "." + std::to_string(l) + ".W"));
    const Eigen::VectorXd b = vector_from_tensor(ckpt.at(prefix + "." + std::to_string(l) + ".b"));
    if (W.rows() != p.layers[l].W.rows() || W.cols() != p.layers[l].W.cols() ||
        b.size() != p.layers[l].b.size())
      throw std::runtime_error("checkpoint shape mismatch at " + prefix + "." + std::to_string(l));
    p.layers[l].W = W;
    p.layers[l].b = b;
  }
}

}  // namespace

void save_agent(const std::string& dir, const AgentState& agent, const EnvSpec& spec,
                const TrainConfig& cfg, int epoch) {
  Checkpoint ckpt;
  ckpt.tensors.push_back(tensor_from_matrix("score.embedding", agent.score.embedding));
  pack_mlp(ckpt.tensors, "score.trunk", agent.score.trunk);
  ckpt.tensors.push_back(tensor_from_matrix("score_target.embedding", agent.score_target.embedding));
  pack_mlp(ckpt.tensors, "score_target.trunk", agent.score_target.trunk);
  pack_mlp(ckpt.tensors, "q1", agent.q1);
  pack_mlp(ckpt.tensors, "q2", agent.q2);
  pack_mlp(ckpt.tensors, "q1_target", agent.q1_target);
  pack_mlp(ckpt.tensors, "q2_target", agent.q2_target);
  for (int i = 0; i < agent.cost.size(); ++i) {
    pack_mlp(ckpt.tensors, "cost." + std::to_string(i), agent.cost.members[static_cast<std::size_t>(i)]);
    pack_mlp(ckpt.tensors, "cost_target." + std::to_string(i),
             agent.cost_target.members[static_cast<std::size_t>(i)]);
  }
  ckpt.metadata = nlohmann::json{
      {"env", env_to_json(spec)},
      {"train", train_to_json(cfg)},
      {"variant", variant_name(agent.variant)},
      {"dual",
       {{"lambda", agent.dual.lambda},
        {"rho", agent.dual.rho},
        {"h", agent.dual.h},
        {"eta_lambda", agent.dual.eta_lambda}}},
      {"counters",
       {{"grad_steps", agent.grad_steps},
        {"env_steps", agent.env_steps},
        {"skipped_rows", agent.skipped_rows}}},
      {"epoch", epoch}};
  save_checkpoint(dir, ckpt);
}

LoadedAgent load_agent(const std::string& dir) {
  const Checkpoint ckpt = load_checkpoint(dir);
  LoadedAgent out;
  out.spec = env_from_json(ckpt.metadata.at("env"));
  out.cfg = train_from_json(ckpt.metadata.at("train"));
  const Variant variant = variant_from_name(ckpt.metadata.at("variant").get<std::string>());
  out.agent = make_agent(out.spec, out.cfg, variant);

  out.agent.score.embedding = matrix_from_tensor(ckpt.at("score.embedding"));
  unpack_mlp(ckpt, "score.trunk", out.agent.score.trunk);
  out.agent.score_target.embedding = matrix_from_tensor(ckpt.at("score_target.embedding"));
  unpack_mlp(ckpt, "score_target.trunk", out.agent.score_target.trunk);
  unpack_mlp(ckpt, "q1", out.agent.q1);
  unpack_mlp(ckpt, "q2", out.agent.q2);
  unpack_mlp(ckpt, "q1_target", out.agent.q1_target);
  unpack_mlp(ckpt, "q2_target", out.agent.q2_target);
  for (int i = 0; i < out.agent.cost.size(); ++i) {
    unpack_mlp(ckpt, "cost." + std::to_string(i),
               out.agent.cost.members[static_cast<std::size_t>(i)]);
    unpack_mlp(ckpt, "cost_target." + std::to_string(i),
               out.agent.cost_target.members[static_cast<std::size_t>(i)]);
  }
  const nlohmann::json& dual = ckpt.metadata.at("dual");
  out.agent.dual.lambda = dual.at("lambda").get<double>();
  out.agent.dual.rho = dual.at("rho").get<double>();
  out.agent.dual.h = dual.at("h").get<double>();
  out.agent.dual.eta_lambda = dual.at("eta_lambda").get<double>();
  const nlohmann::json& counters = ckpt.metadata.at("counters");
  out.agent.grad_steps = counters.at("grad_steps").get<std::uint64_t>();
  out.agent.env_steps = counters.at("env_steps").get<std::uint64_t>();
  out.agent.skipped_rows = counters.at("skipped_rows").get<std::uint64_t>();
  out.epoch = ckpt.metadata.at("epoch").get<int>();
  return out;
}

}  // namespace algd
