#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "algd/energy.hpp"
#include "algd/env.hpp"
#include "algd/replay.hpp"
#include "algd/rng.hpp"
#include "algd/schedule.hpp"
#include "algd/score.hpp"
#include "algd/train.hpp"
#include "algd/types.hpp"

using namespace algd;
namespace fs = std::filesystem;

namespace {

// Small shapes keep the suite fast; the pinned sizes are covered by the
// config tests and the acceptance runs.
TrainConfig small_cfg() {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.K = 3;
  cfg.N = 4;
  cfg.M = 2;
  cfg.score_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  cfg.warmup_steps = 32;
  cfg.steps_per_epoch = 64;
  cfg.train_repeat = 2;
  cfg.buffer_capacity = 4096;
  return cfg;
}

void zero_mlp(MlpParams& p) {
  for (MlpLayer& layer : p.layers) {
    layer.W.setZero();
    layer.b.setZero();
  }
}

void zero_score_trunk(AgentState& agent) {
  zero_mlp(agent.score.trunk);
}

// Constant-output net: zero everything, set the final bias.
void make_constant(MlpParams& p, double v) {
  zero_mlp(p);
  p.layers.back().b(0) = v;
}

Batch synthetic_batch(const EnvSpec& spec, int B, RngStream& rng) {
  Batch b;
  b.S.resize(B, spec.d_s);
  b.A.resize(B, spec.d_a);
  b.S_next.resize(B, spec.d_s);
  b.r.resize(B);
  b.c.resize(B);
  b.done.resize(static_cast<std::size_t>(B));
  for (int i = 0; i < B; ++i) {
    for (int k = 0; k < spec.d_s; ++k) {
      b.S(i, k) = rng.uniform_in(-1.0, 1.0);
      b.S_next(i, k) = rng.uniform_in(-1.0, 1.0);
    }
    for (int k = 0; k < spec.d_a; ++k) b.A(i, k) = rng.uniform_in(-1.0, 1.0);
    b.r(i) = rng.uniform_in(-1.0, 1.0);
    b.c(i) = (rng.uniform01() < 0.3) ? 1.0 : 0.0;
    b.done[static_cast<std::size_t>(i)] = rng.uniform01() < 0.1;
  }
  return b;
}

void fill_buffer(ReplayBuffer& buffer, const EnvSpec& spec, int n, RngStream& rng) {
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.state.resize(spec.d_s);
    t.next_state.resize(spec.d_s);
    t.action.resize(spec.d_a);
    for (int k = 0; k < spec.d_s; ++k) {
      t.state(k) = rng.uniform_in(-1.0, 1.0);
      t.next_state(k) = rng.uniform_in(-1.0, 1.0);
    }
    for (int k = 0; k < spec.d_a; ++k) t.action(k) = rng.uniform_in(-1.0, 1.0);
    t.reward = rng.uniform_in(-1.0, 1.0);
    t.cost = (rng.uniform01() < 0.3) ? 1.0 : 0.0;
    t.done = rng.uniform01() < 0.1;
    buffer.push(t);
  }
}

bool mlp_equal(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    if (a.layers[l].W != b.layers[l].W || a.layers[l].b != b.layers[l].b) return false;
  return true;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("config validation names the offending field") {
  TrainConfig cfg = small_cfg();
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = small_cfg();
  cfg.ensemble_weight_decay = {1e-5};
  try {
    validate(cfg);
    CHECK(false);
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("ensemble_weight_decay") != std::string::npos);
  }

  cfg = small_cfg();
  cfg.sigma_min = 0.5;
  cfg.sigma_max = 0.1;
  CHECK_THROWS(validate(cfg));

  CHECK(variant_from_name("standard") == Variant::kStandard);
  CHECK(variant_from_name("augmented") == Variant::kAugmented);
  CHECK_THROWS(variant_from_name("pid"));
  CHECK(variant_name(Variant::kStandard) == "standard");
}

TEST_CASE("fresh agents mirror online parameters into targets") {
  const EnvSpec spec = make_env_spec("point_hazard");
  const TrainConfig cfg = small_cfg();
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  CHECK(agent.score.trunk.input_dim() == spec.d_s + spec.d_a + cfg.emb_dim);
  CHECK(agent.score.trunk.output_dim() == spec.d_a);
  CHECK(agent.score.K() == cfg.K);
  CHECK(agent.q1.input_dim() == spec.d_s + spec.d_a);
  CHECK(agent.cost.size() == cfg.M);
  CHECK(mlp_equal(agent.q1, agent.q1_target));
  CHECK(mlp_equal(agent.q2, agent.q2_target));
  CHECK(mlp_equal(agent.score.trunk, agent.score_target.trunk));
  CHECK(agent.score.embedding == agent.score_target.embedding);
  CHECK_FALSE(mlp_equal(agent.q1, agent.q2));
  CHECK(agent.dual.lambda == 0.0);
  CHECK(agent.dual.h == spec.h);
}

TEST_CASE("action sampling is deterministic given the stream") {
  const EnvSpec spec = make_env_spec("point_hazard");
  const TrainConfig cfg = small_cfg();
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  const StateVec s = StateVec::Constant(spec.d_s, 0.2);
  RngStream r1(5, 21), r2(5, 21);
  const ActionVec a1 = sample_action(agent, s, sch, r1, SampleMode::kTrain);
  const ActionVec a2 = sample_action(agent, s, sch, r2, SampleMode::kTrain);
  CHECK(a1 == a2);
  CHECK(a1.array().abs().maxCoeff() <= 1.0);
}

TEST_CASE("sampling costs exactly K score evaluations and no critic work") {
  const EnvSpec spec = make_env_spec("point_hazard");
  const TrainConfig cfg = small_cfg();
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  RngStream rng(6, 21);

  sample_action(agent, StateVec::Zero(spec.d_s), sch, rng, SampleMode::kTrain);
  CHECK(agent.score.trunk.forward_calls == static_cast<std::uint64_t>(cfg.K));
  CHECK(agent.score.trunk.backward_calls == 0);
  CHECK(agent.q1.forward_calls == 0);
  CHECK(agent.q2.forward_calls == 0);
  CHECK(agent.q1.backward_calls == 0);
  for (const MlpParams& m : agent.cost.members) {
    CHECK(m.forward_calls == 0);
    CHECK(m.backward_calls == 0);
  }

  sample_action(agent, StateVec::Zero(spec.d_s), sch, rng, SampleMode::kEval);
  CHECK(agent.score.trunk.forward_calls == static_cast<std::uint64_t>(2 * cfg.K));
}

TEST_CASE("eval mode with K = 1 returns the initial draw unchanged") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.K = 1;
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  zero_score_trunk(agent);
  const NoiseSchedule sch = build_schedule(1, cfg.sigma_min, cfg.sigma_max);

  RngStream rng(9, 21), probe(9, 21);
  const ActionVec a = sample_action(agent, StateVec::Zero(spec.d_s), sch, rng, SampleMode::kEval);
  const double z1 = probe.normal(), z2 = probe.normal();
  CHECK(a(0) == doctest::Approx(cfg.sigma_max * z1).epsilon(1e-15));
  CHECK(a(1) == doctest::Approx(cfg.sigma_max * z2).epsilon(1e-15));
  // Train mode spends two more draws on the final noise.
  RngStream r3(9, 21);
  const ActionVec at = sample_action(agent, StateVec::Zero(spec.d_s), sch, r3, SampleMode::kTrain);
  CHECK(at(0) != a(0));
}

TEST_CASE("zero-drift sampling variance telescopes to 2 sigma_K^2") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.K = 5;
  cfg.score_hidden = {8};
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  zero_score_trunk(agent);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  const StateVec s = StateVec::Zero(spec.d_s);

  RngStream rng(11, 21);
  const int n = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const ActionVec a = sample_action(agent, s, sch, rng, SampleMode::kTrain);
    sum += a;
    sq += a.cwiseProduct(a);
  }
  const double want = 2.0 * cfg.sigma_max * cfg.sigma_max;
  for (int k = 0; k < 2; ++k) {
    const double mean = sum(k) / n;
    const double var = sq(k) / n - mean * mean;
    CHECK(std::abs(var - want) < 0.03 * want);
  }
}

TEST_CASE("single-row batched sampling equals the scalar path") {
  const EnvSpec spec = make_env_spec("point_hazard");
  const TrainConfig cfg = small_cfg();
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  const StateVec s = StateVec::Constant(spec.d_s, -0.3);

  RngStream r1(13, 21), r2(13, 21);
  const ActionVec a = sample_action(agent, s, sch, r1, SampleMode::kTrain);
  const Eigen::MatrixXd A = sample_action_batch(agent, s.transpose(), sch, r2,
                                                SampleMode::kTrain);
  CHECK((A.row(0).transpose() - a).norm() < 1e-13);
}

TEST_CASE("critic targets: terminal rows, constant pair min, ensemble mean") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.M = 2;
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  make_constant(agent.q1_target, 1.5);
  make_constant(agent.q2_target, 2.5);
  make_constant(agent.cost_target.members[0], 1.0);
  make_constant(agent.cost_target.members[1], 3.0);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);

  Batch b;
  b.S = Eigen::MatrixXd::Zero(2, spec.d_s);
  b.A = Eigen::MatrixXd::Zero(2, spec.d_a);
  b.S_next = Eigen::MatrixXd::Zero(2, spec.d_s);
  b.r.resize(2);
  b.r << 0.3, -1.0;
  b.c.resize(2);
  b.c << 1.0, 1.0;
  b.done = {false, true};

  RngStream rng(15, 24);
  const CriticTargets t = critic_targets(b, agent, sch, cfg, rng);
  CHECK(t.y_q(0) == doctest::Approx(0.3 + 0.99 * 1.5).epsilon(1e-12));
  CHECK(t.y_q(1) == doctest::Approx(-1.0));
  CHECK(t.y_qc(0) == doctest::Approx(1.0 + 0.99 * 2.0).epsilon(1e-12));
  CHECK(t.y_qc(1) == doctest::Approx(1.0));
}

TEST_CASE("critic energies match per-network forward/backward references") {
  const EnvSpec spec = make_env_spec("point_hazard");
  const TrainConfig cfg = small_cfg();
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  RngStream rng(17, 0);
  const Batch b = synthetic_batch(spec, 6, rng);

  const BatchEnergies e = critic_energies(agent, b.S, b.A);
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd x(spec.d_s + spec.d_a);
    x << b.S.row(i).transpose(), b.A.row(i).transpose();

    MlpCache c1, c2;
    const double q1 = forward_mlp_vec(agent.q1, x, &c1)(0);
    const double q2 = forward_mlp_vec(agent.q2, x, &c2)(0);
    CHECK(e.q(i) == doctest::Approx(std::min(q1, q2)).epsilon(1e-12));
    const MlpParams& sel = (q1 <= q2) ? agent.q1 : agent.q2;
    const MlpCache& selc = (q1 <= q2) ? c1 : c2;
    const Eigen::MatrixXd gq = backward_input_mlp(sel, selc, Eigen::MatrixXd::Ones(1, 1));
    CHECK((e.grad_q.row(i) - gq.row(0).tail(spec.d_a)).norm() < 1e-11);

    double qc = 0.0;
    Eigen::RowVectorXd gqc = Eigen::RowVectorXd::Zero(spec.d_a);
    for (const MlpParams& m : agent.cost.members) {
      MlpCache cm;
      qc += forward_mlp_vec(m, x, &cm)(0);
      gqc += backward_input_mlp(m, cm, Eigen::MatrixXd::Ones(1, 1)).row(0).tail(spec.d_a);
    }
    CHECK(e.qc(i) == doctest::Approx(qc / agent.cost.size()).epsilon(1e-12));
    CHECK((e.grad_qc.row(i) - gqc / agent.cost.size()).norm() < 1e-11);
  }
}

TEST_CASE("zero TD error leaves critics unchanged up to weight decay") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  agent.q2 = agent.q1;
  agent.cost.members[1] = agent.cost.members[0];
  RngStream rng(19, 0);
  const Batch b = synthetic_batch(spec, 8, rng);

  Eigen::MatrixXd X(8, spec.d_s + spec.d_a);
  X << b.S, b.A;
  CriticTargets t;
  t.y_q = forward_mlp(agent.q1, X).col(0);
  t.y_qc = forward_mlp(agent.cost.members[0], X).col(0);

  const AgentState before = agent;
  const CriticLosses losses = update_critics(agent, b, t, cfg);
  CHECK(losses.q1_loss == 0.0);
  CHECK(losses.q2_loss == 0.0);
  CHECK(losses.qc_loss == 0.0);
  CHECK(mlp_equal(agent.q1, before.q1));
  CHECK(mlp_equal(agent.q2, before.q2));
  for (int i = 0; i < agent.cost.size(); ++i) {
    for (std::size_t l = 0; l < agent.cost.members[i].layers.size(); ++l) {
      const double factor = 1.0 - cfg.lr * cfg.ensemble_weight_decay[l];
      const Eigen::MatrixXd want = factor * before.cost.members[i].layers[l].W;
      CHECK((agent.cost.members[i].layers[l].W - want).norm() < 1e-15);
      CHECK(agent.cost.members[i].layers[l].b == before.cost.members[i].layers[l].b);
    }
  }
}

TEST_CASE("a critic update reduces a single-sample loss") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  RngStream rng(21, 0);
  const Batch b = synthetic_batch(spec, 1, rng);

  Eigen::MatrixXd X(1, spec.d_s + spec.d_a);
  X << b.S, b.A;
  CriticTargets t;
  t.y_q = forward_mlp(agent.q1, X).col(0).array() + 1.0;
  t.y_qc = forward_mlp(agent.cost.members[0], X).col(0).array() + 1.0;

  const double before = std::abs(forward_mlp(agent.q1, X)(0, 0) - t.y_q(0));
  update_critics(agent, b, t, cfg);
  const double after = std::abs(forward_mlp(agent.q1, X)(0, 0) - t.y_q(0));
  CHECK(after < before);
}

TEST_CASE("score update with output already equal to target is a no-op") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  zero_score_trunk(agent);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  RngStream rng(23, 0);
  const Batch b = synthetic_batch(spec, 8, rng);

  // Constant zero energy: targets are exactly zero, matching the zeroed net.
  EnergyBatchFn flat = [&](const Eigen::MatrixXd& S, const Eigen::MatrixXd& A) {
    BatchEnergies e;
    e.q = Eigen::VectorXd::Zero(S.rows());
    e.qc = Eigen::VectorXd::Zero(S.rows());
    e.grad_q = Eigen::MatrixXd::Zero(S.rows(), A.cols());
    e.grad_qc = Eigen::MatrixXd::Zero(S.rows(), A.cols());
    return e;
  };

  const AgentState before = agent;
  RngStream score_rng(23, 23);
  const ScoreUpdateStats stats = update_score_net(agent, b, sch, cfg, score_rng, &flat);
  CHECK(stats.score_loss == 0.0);
  CHECK(stats.skipped == 0);
  CHECK(stats.mean_ess == doctest::Approx(static_cast<double>(cfg.N)).epsilon(1e-12));
  CHECK(mlp_equal(agent.score.trunk, before.score.trunk));
  CHECK(agent.score.embedding == before.score.embedding);
}

TEST_CASE("batched score update equals the per-row oracle estimator") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.N = 4;
  AgentState a1 = make_agent(spec, cfg, Variant::kAugmented);
  a1.dual.lambda = 0.3;
  a1.dual.h = 0.0;  // keeps the hinge active for typical critic outputs
  AgentState a2 = a1;
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  RngStream brng(25, 0);
  const Batch b = synthetic_batch(spec, 5, brng);

  RngStream r1(25, 23);
  const ScoreUpdateStats stats = update_score_net(a1, b, sch, cfg, r1);

  // Manual path: same draw order, per-row mc_score_target against an
  // EnergyFn wrapping the (unchanged) critics.
  RngStream r2(25, 23);
  const int B = b.size();
  std::vector<int> taus(static_cast<std::size_t>(B));
  Eigen::MatrixXd A_tau(B, spec.d_a);
  Eigen::MatrixXd target(B, spec.d_a);
  double ess_sum = 0.0;
  for (int i = 0; i < B; ++i) {
    const int tau = 1 + static_cast<int>(r2.index(static_cast<std::uint64_t>(sch.K)));
    taus[static_cast<std::size_t>(i)] = tau;
    const double sigma = sch.sigma_at(tau);
    for (int k = 0; k < spec.d_a; ++k) A_tau(i, k) = b.A(i, k) + sigma * r2.normal();

    const Eigen::MatrixXd s_row = b.S.row(i);
    EnergyFn f;
    f.value = [&, s_row](const ActionVec& a) {
      const BatchEnergies e = critic_energies(a2, s_row, a.transpose());
      EnergyEval ev{e.q(0), e.qc(0), e.grad_q.row(0).transpose(), e.grad_qc.row(0).transpose()};
      return aug_lagrangian(ev, a2.dual);
    };
    f.grad = [&, s_row](const ActionVec& a) {
      const BatchEnergies e = critic_energies(a2, s_row, a.transpose());
      EnergyEval ev{e.q(0), e.qc(0), e.grad_q.row(0).transpose(), e.grad_qc.row(0).transpose()};
      return aug_lagrangian_grad_a(ev, a2.dual);
    };
    const ScoreTarget st = mc_score_target(f, A_tau.row(i).transpose(), sigma, cfg.beta,
                                           cfg.N, r2);
    target.row(i) = st.value.transpose();
    ess_sum += st.ess;
  }

  MlpCache cache;
  const Eigen::MatrixXd pred = score_net_eval_batch(a2.score, b.S, A_tau, taus, &cache);
  const Eigen::MatrixXd resid = pred - target;
  const double loss = resid.squaredNorm() / B;
  const GradBundle g = backward_mlp(a2.score.trunk, cache, (2.0 / B) * resid);
  AdamConfig opt;
  opt.lr = cfg.lr;
  opt.clip_norm = cfg.clip_norm;
  score_adam_step(a2.score, g, taus, a2.score_opt, opt);

  CHECK(stats.score_loss == doctest::Approx(loss).epsilon(1e-10));
  CHECK(stats.mean_ess == doctest::Approx(ess_sum / B).epsilon(1e-10));
  for (std::size_t l = 0; l < a1.score.trunk.layers.size(); ++l) {
    CHECK(a1.score.trunk.layers[l].W.isApprox(a2.score.trunk.layers[l].W, 1e-10));
    CHECK(a1.score.trunk.layers[l].b.isApprox(a2.score.trunk.layers[l].b, 1e-10));
  }
  CHECK(a1.score.embedding.isApprox(a2.score.embedding, 1e-10));
}

TEST_CASE("variants agree while lambda = 0 and the hinge is inactive") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  AgentState aug = make_agent(spec, cfg, Variant::kAugmented);
  for (MlpParams& m : aug.cost.members) zero_mlp(m);  // qc = 0 < h = 25
  AgentState std_var = aug;
  std_var.variant = Variant::kStandard;
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  RngStream brng(27, 0);
  const Batch b = synthetic_batch(spec, 8, brng);

  RngStream r1(27, 23), r2(27, 23);
  const ScoreUpdateStats s1 = update_score_net(aug, b, sch, cfg, r1);
  const ScoreUpdateStats s2 = update_score_net(std_var, b, sch, cfg, r2);
  CHECK(s1.score_loss == doctest::Approx(s2.score_loss).epsilon(1e-12));
  for (std::size_t l = 0; l < aug.score.trunk.layers.size(); ++l)
    CHECK(aug.score.trunk.layers[l].W.isApprox(std_var.score.trunk.layers[l].W, 1e-12));
}

TEST_CASE("synthetic quadratic critics drive the score loss below 1e-3") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.K = 2;
  cfg.N = 32;
  cfg.beta = 1.0;
  cfg.lr = 1e-3;
  cfg.score_hidden = {64, 64};
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  agent.dual.lambda = 0.0;
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);

  // Q = -|a|^2/2, Qc = 0: with lambda = 0 the energy is |a|^2/2.
  EnergyBatchFn quad = [](const Eigen::MatrixXd& S, const Eigen::MatrixXd& A) {
    BatchEnergies e;
    e.q = -0.5 * A.rowwise().squaredNorm();
    e.qc = Eigen::VectorXd::Zero(S.rows());
    e.grad_q = -A;
    e.grad_qc = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    return e;
  };

  RngStream brng(29, 0);
  Batch b = synthetic_batch(spec, 64, brng);
  const Eigen::RowVectorXd s0 = b.S.row(0);
  for (int i = 0; i < b.size(); ++i) b.S.row(i) = s0;  // fixed state

  RngStream rng(29, 23);
  double best = std::numeric_limits<double>::infinity();
  int steps = 0;
  for (; steps < 2000; ++steps) {
    const ScoreUpdateStats st = update_score_net(agent, b, sch, cfg, rng, &quad);
    best = std::min(best, st.score_loss);
    if (best < 1e-3) break;
  }
  CHECK(best < 1e-3);
}

TEST_CASE("mean cost value reads the online ensemble on fresh actions") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  make_constant(agent.cost.members[0], 2.0);
  make_constant(agent.cost.members[1], 4.0);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  RngStream rng(31, 24);
  const double qbar = mean_cost_value(agent, Eigen::MatrixXd::Zero(5, spec.d_s), sch, cfg, rng);
  CHECK(qbar == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gradient updates refresh targets only every target_update_every steps") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.target_update_every = 5;
  AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  ReplayBuffer buffer(cfg.buffer_capacity);
  RngStream fill(33, 0);
  fill_buffer(buffer, spec, 256, fill);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);
  TrainStreams streams(33);

  const MlpParams q1t_initial = agent.q1_target;
  const ScoreNetParams score_t_initial = agent.score_target;
  for (int u = 0; u < 4; ++u) gradient_update(agent, buffer, sch, cfg, streams);
  CHECK(agent.grad_steps == 4);
  CHECK(mlp_equal(agent.q1_target, q1t_initial));
  CHECK(agent.score_target.embedding == score_t_initial.embedding);
  CHECK_FALSE(mlp_equal(agent.q1, q1t_initial));  // online has moved

  gradient_update(agent, buffer, sch, cfg, streams);
  CHECK(agent.grad_steps == 5);
  CHECK_FALSE(mlp_equal(agent.q1_target, q1t_initial));
  CHECK(agent.dual.lambda >= 0.0);
}

TEST_CASE("warmup epochs collect data without updating anything") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.warmup_steps = 1000;  // beyond the first epoch
  cfg.steps_per_epoch = 64;
  Trainer trainer(spec, cfg, Variant::kAugmented);
  const MlpParams q1_initial = trainer.agent().q1;
  const EpochStats st = trainer.train_epoch();
  CHECK(st.updates == 0);
  CHECK(st.env_steps_end == 64);
  CHECK(trainer.buffer().size() == 64);
  CHECK(trainer.agent().dual.lambda == 0.0);
  CHECK(trainer.agent().grad_steps == 0);
  CHECK(mlp_equal(trainer.agent().q1, q1_initial));
  CHECK(std::isnan(st.score_loss));
}

TEST_CASE("train_repeat = 0 is pure data collection") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.warmup_steps = 0;
  cfg.train_repeat = 0;
  Trainer trainer(spec, cfg, Variant::kAugmented);
  const MlpParams q1_initial = trainer.agent().q1;
  const ScoreNetParams score_initial = trainer.agent().score;
  const EpochStats st = trainer.train_epoch();
  CHECK(st.updates == 0);
  CHECK(trainer.buffer().size() == static_cast<std::size_t>(cfg.steps_per_epoch));
  CHECK(mlp_equal(trainer.agent().q1, q1_initial));
  CHECK(mlp_equal(trainer.agent().score.trunk, score_initial.trunk));
}

TEST_CASE("same-seed trainers run bit-identically") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.warmup_steps = 32;
  cfg.steps_per_epoch = 64;
  cfg.train_repeat = 2;
  cfg.batch_size = 16;
  cfg.seed = 7;

  Trainer t1(spec, cfg, Variant::kAugmented);
  Trainer t2(spec, cfg, Variant::kAugmented);
  for (int e = 0; e < 3; ++e) {
    const EpochStats s1 = t1.train_epoch();
    const EpochStats s2 = t2.train_epoch();
    CHECK(s1.env_steps_end == s2.env_steps_end);
    CHECK(s1.updates == s2.updates);
    CHECK(((std::isnan(s1.train_return) && std::isnan(s2.train_return)) ||
           s1.train_return == s2.train_return));
    CHECK(s1.lambda == s2.lambda);
    CHECK(((std::isnan(s1.score_loss) && std::isnan(s2.score_loss)) ||
           s1.score_loss == s2.score_loss));
  }
  CHECK(t1.agent().grad_steps == t2.agent().grad_steps);
  CHECK(t1.agent().grad_steps > 0);
  CHECK(mlp_equal(t1.agent().q1, t2.agent().q1));
  CHECK(mlp_equal(t1.agent().score.trunk, t2.agent().score.trunk));
  CHECK(t1.agent().score.embedding == t2.agent().score.embedding);
  CHECK(t1.agent().dual.lambda == t2.agent().dual.lambda);
}

TEST_CASE("agents round-trip through checkpoints") {
  const EnvSpec spec = make_env_spec("diff_drive");
  TrainConfig cfg = small_cfg();
  cfg.seed = 3;
  AgentState agent = make_agent(spec, cfg, Variant::kStandard);
  agent.dual.lambda = 0.07;
  agent.grad_steps = 42;
  agent.env_steps = 640;

  const std::string dir =
      (fs::temp_directory_path() / "algd_agent_roundtrip").string();
  fs::remove_all(dir);
  save_agent(dir, agent, spec, cfg, 9);
  const LoadedAgent loaded = load_agent(dir);

  CHECK(loaded.epoch == 9);
  CHECK(loaded.spec.name == "diff_drive");
  CHECK(loaded.spec.h == spec.h);
  CHECK(loaded.cfg.K == cfg.K);
  CHECK(loaded.cfg.M == cfg.M);
  CHECK(loaded.agent.variant == Variant::kStandard);
  CHECK(loaded.agent.dual.lambda == doctest::Approx(0.07).epsilon(1e-12));
  CHECK(loaded.agent.grad_steps == 42);
  CHECK(loaded.agent.env_steps == 640);

  // Parameters survive at float32 resolution.
  const Eigen::MatrixXd& w0 = agent.q1.layers[0].W;
  const Eigen::MatrixXd& l0 = loaded.agent.q1.layers[0].W;
  CHECK((w0.cast<float>().cast<double>() - l0).norm() == 0.0);
  const Eigen::MatrixXd& e0 = agent.score.embedding;
  CHECK((e0.cast<float>().cast<double>() - loaded.agent.score.embedding).norm() == 0.0);

  // A second save of the loaded agent is byte-identical.
  const std::string dir2 = dir + "_2";
  fs::remove_all(dir2);
  save_agent(dir2, loaded.agent, loaded.spec, loaded.cfg, loaded.epoch);
  std::ifstream b1(fs::path(dir) / "tensors.bin", std::ios::binary);
  std::ifstream b2(fs::path(dir2) / "tensors.bin", std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(b1)), {});
  const std::string s2((std::istreambuf_iterator<char>(b2)), {});
  CHECK(s1 == s2);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("policy evaluation is deterministic and uses eval sampling") {
  const EnvSpec spec = make_env_spec("point_hazard");
  TrainConfig cfg = small_cfg();
  cfg.score_hidden = {8};
  const AgentState agent = make_agent(spec, cfg, Variant::kAugmented);
  const NoiseSchedule sch = build_schedule(cfg.K, cfg.sigma_min, cfg.sigma_max);

  RngStream r1(35, 25), r2(35, 25);
  const EvalStats s1 = evaluate_policy(agent, spec, sch, 2, r1);
  const EvalStats s2 = evaluate_policy(agent, spec, sch, 2, r2);
  CHECK(s1.mean_return == s2.mean_return);
  CHECK(s1.mean_cost == s2.mean_cost);
  CHECK(s1.mean_cost >= 0.0);

  RngStream r3(35, 26), r4(35, 26);
  const EvalStats rp1 = random_policy_stats(spec, 2, r3);
  const EvalStats rp2 = random_policy_stats(spec, 2, r4);
  CHECK(rp1.mean_return == rp2.mean_return);
  CHECK(rp1.sd_return == rp2.sd_return);
}

}  // TEST_SUITE
