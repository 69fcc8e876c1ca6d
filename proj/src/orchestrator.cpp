#include "pasist/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "pasist/checkpoint.hpp"
#include "pasist/errors.hpp"

namespace pasist {
namespace {

using nlohmann::ordered_json;

// Sub-stream index for (outer, inner); outer >= 1 keeps index 0 free for
// initialization streams.
std::uint64_t stream_key(std::uint64_t outer, std::uint64_t inner) { return (outer << 24) | inner; }

ordered_json nullable(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json nullable(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::vector<int> layers(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

std::vector<double> optimal_rewards(const std::vector<SkillSpec>& skills) {
  std::vector<double> out;
  for (const auto& s : skills) out.push_back(s.optimal_reward);
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_policy_shape(const PolicyNet& policy, const ExperimentConfig& cfg, const ToyEnv& env) {
  check_layers(policy.trunk(), layers(env.observation_size(), cfg.ppo.policy_hidden, cfg.env.joints), "policy");
}

}  // namespace

double j_dtw_from_expected(double expected_dtw, double sigma_sil) {
  return std::exp(-std::max(std::abs(expected_dtw - sigma_sil), 0.0) / 10.0);
}

std::optional<double> j_dtw(const SilBuffer& buffer, const TargetPose& target, double sigma_sil,
                            DtwNormalization norm) {
  const auto e = buffer_expected_dtw(buffer, target, norm);
  if (!e) return std::nullopt;
  return j_dtw_from_expected(*e, sigma_sil);
}

ImitationFeatures duplicated_target_features(const TargetPose& target, int episode_length) {
  const Eigen::Index frames = std::max(2, episode_length / 2);
  return transitions_from_poses(PoseSequence(target.pose.transpose().replicate(frames, 1)));
}

ordered_json MetricsRecord::to_json(const std::vector<SkillSpec>& skills) const {
  ordered_json j;
  j["iteration"] = iteration;
  j["total_reward"] = total_reward;
  j["task_reward"] = task_reward;
  j["sil_reward"] = sil_reward;
  j["omega_sil"] = omega_sil;
  j["omega_task"] = omega_task;
  j["next_omega_sil"] = next_omega_sil;
  j["next_omega_task"] = next_omega_task;
  ordered_json per_skill;
  for (std::size_t m = 0; m < skills.size(); ++m) {
    ordered_json s;
    s["task_reward"] = skill_task_reward[m];
    s["expected_dtw"] = nullable(expected_dtw[m]);
    s["j_dtw"] = nullable(j_dtw[m]);
    s["epsilon"] = nullable(epsilon[m]);
    s["selection_probability"] = selection_probabilities[m];
    s["episodes"] = episodes[m];
    s["admitted"] = admitted[m];
    per_skill[skills[m].name] = std::move(s);
  }
  j["skills"] = std::move(per_skill);
  j["buffer_entries"] = buffer_entries;
  j["discriminator_updated"] = discriminator_updated;
  j["discriminator_loss"] = nullable(discriminator_loss);
  j["policy_loss"] = ppo.policy_loss;
  j["value_loss"] = ppo.value_loss;
  j["entropy"] = ppo.entropy;
  j["approx_kl"] = ppo.approx_kl;
  j["clip_fraction"] = ppo.clip_fraction;
  j["log_std_mean"] = log_std_mean;
  return j;
}

struct Trainer::Rollout {
  RolloutBuffer buffer;
  Matrix transitions;                 // (q_t, q_{t+1}) per stored step
  std::vector<double> blended;        // reward before timeout bootstrapping
  std::vector<double> task;
  std::vector<double> sil;
  std::vector<std::vector<Trajectory>> completed;  // per env, in completion order
};

Trainer::Trainer(ExperimentConfig config)
    : config_(std::move(config)),
      env_(config_.env, config_.skills),
      buffer_(config_.num_skills(), config_.sil_capacity),
      commands_(config_.selector.window),
      reference_dtw_(config_.skills.size()) {
  config_.validate();
  const int obs = env_.observation_size();
  const int act = config_.env.joints;
  Rng policy_rng = make_stream(config_.seed, "policy");
  Rng value_rng = make_stream(config_.seed, "value");
  Rng disc_rng = make_stream(config_.seed, "discriminator");
  policy_ = PolicyNet::create(obs, act, config_.ppo, policy_rng);
  value_ = ValueNet::create(obs, config_.ppo, value_rng);
  disc_ = Discriminator::create(2 * act, config_.discriminator, disc_rng);

  if (config_.mode == Mode::kIlByTp) {
    for (const auto& t : config_.targets) buffer_.prefill(t.skill, duplicated_target_features(t, config_.env.episode_length), 0.0);
    admissions_enabled_ = false;
  }
  weights_.sil = omega_sil(buffer_, config_.targets, config_.sigma_sil, config_.num_skills(), config_.weight_dtw);
  weights_.task = omega_task(0.0, config_.sigma_task);
}

Trainer::Rollout Trainer::collect(const std::vector<double>& skill_probs) {
  const int n_env = config_.ppo.num_envs;
  const int horizon = config_.ppo.horizon;
  const int joints = config_.env.joints;
  const int obs_dim = env_.observation_size();
  const int n_skills = config_.num_skills();
  const auto k = static_cast<std::uint64_t>(iteration_ + 1);
  const bool sil_active = disc_ready_;
  const bool uniform_commands = config_.mode == Mode::kNoSelector;

  Rollout out;
  out.buffer = RolloutBuffer(n_env, horizon, obs_dim, joints);
  out.transitions.resize(static_cast<Eigen::Index>(out.buffer.size()), 2 * joints);
  out.blended.assign(out.buffer.size(), 0.0);
  out.task.assign(out.buffer.size(), 0.0);
  out.sil.assign(out.buffer.size(), 0.0);
  out.completed.resize(static_cast<std::size_t>(n_env));

  auto run_chunk = [&](int e0, int e1) {
    const int m = e1 - e0;
    std::vector<Rng> env_rng, act_rng, cmd_rng;
    for (int i = 0; i < m; ++i) {
      const auto key = stream_key(k, static_cast<std::uint64_t>(e0 + i));
      env_rng.push_back(make_stream(config_.seed, "env", key));
      act_rng.push_back(make_stream(config_.seed, "policy", key));
      cmd_rng.push_back(make_stream(config_.seed, "selector", key));
    }
    std::vector<EnvState> state(static_cast<std::size_t>(m));
    std::vector<Command> cmd(static_cast<std::size_t>(m));
    std::vector<Trajectory> traj(static_cast<std::size_t>(m));
    auto start = [&](std::size_t i) {
      state[i] = env_.reset(env_rng[i]);
      if (uniform_commands) {
        cmd[i] = sample_uniform_command(n_skills, cmd_rng[i]);
      } else {
        const int skill = sample_skill(skill_probs, cmd_rng[i]);
        cmd[i] = Command(uniform(cmd_rng[i], -Command::kMaxVelocity, Command::kMaxVelocity), skill, n_skills);
      }
      traj[i] = Trajectory{};
      traj[i].skill = cmd[i].skill();
      traj[i].states.push_back(state[i]);
    };
    for (std::size_t i = 0; i < state.size(); ++i) start(i);

    Matrix obs(m, obs_dim);
    Matrix trans(m, 2 * joints);
    std::vector<StepResult> results(static_cast<std::size_t>(m));
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < m; ++i) obs.row(i) = env_.observation(state[static_cast<std::size_t>(i)], cmd[static_cast<std::size_t>(i)]).transpose();
      const Matrix mu = policy_.means(obs);
      const Vector values = value_.values(obs);
      for (int i = 0; i < m; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const std::size_t idx = out.buffer.index(t, e0 + i);
        const auto row = static_cast<Eigen::Index>(idx);
        const Vector mean = mu.row(i).transpose();
        const Vector a = policy_.sample(mean, act_rng[ui]);
        out.buffer.observations.row(row) = obs.row(i);
        out.buffer.actions.row(row) = a.transpose();
        out.buffer.log_probs[idx] = policy_.log_prob(a, mean);
        out.buffer.values[idx] = values(i);
        results[ui] = env_.step(state[ui], a, cmd[ui]);
        trans.row(i) << state[ui].q.transpose(), results[ui].state.q.transpose();
      }
      out.transitions.middleRows(static_cast<Eigen::Index>(out.buffer.index(t, e0)), m) = trans;
      const Vector r_sil = sil_active ? disc_.rewards(trans) : Vector::Zero(m);
      for (int i = 0; i < m; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const std::size_t idx = out.buffer.index(t, e0 + i);
        const StepResult& res = results[ui];
        const double r = total_reward(r_sil(i), res.task_reward, res.reg_reward, weights_);
        out.blended[idx] = r;
        out.task[idx] = res.task_reward;
        out.sil[idx] = r_sil(i);
        double stored = r;
        if (res.timeout) stored += config_.ppo.gamma * value_.value(env_.observation(res.state, cmd[ui]));
        out.buffer.rewards[idx] = stored;
        out.buffer.dones[idx] = res.done ? 1.0 : 0.0;

        Trajectory& tr = traj[ui];
        tr.actions.push_back(res.state.prev_action);
        tr.task_rewards.push_back(res.task_reward);
        tr.reg_rewards.push_back(res.reg_reward);
        tr.states.push_back(res.state);
        if (res.done) {
          tr.terminated = !res.timeout;
          out.completed[static_cast<std::size_t>(e0 + i)].push_back(std::move(tr));
          start(ui);
        } else {
          state[ui] = res.state;
        }
      }
    }
    for (int i = 0; i < m; ++i)
      out.buffer.last_values[static_cast<std::size_t>(e0 + i)] =
          value_.value(env_.observation(state[static_cast<std::size_t>(i)], cmd[static_cast<std::size_t>(i)]));
  };

  const int workers = std::clamp(config_.workers, 1, n_env);
  if (workers == 1) {
    run_chunk(0, n_env);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) {
        const int e0 = n_env * w / workers;
        const int e1 = n_env * (w + 1) / workers;
        pool.emplace_back([&, w, e0, e1] {
          try {
            run_chunk(e0, e1);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

MetricsRecord Trainer::train_iteration() {
  const int k = iteration_ + 1;
  const int n_skills = config_.num_skills();
  const auto nk = static_cast<std::size_t>(n_skills);
  MetricsRecord rec;
  rec.iteration = k;
  rec.omega_sil = weights_.sil;
  rec.omega_task = weights_.task;
  try {
    if (config_.mode == Mode::kNoSelector) {
      rec.selection_probabilities.assign(nk, 1.0 / n_skills);
    } else {
      const auto optimal = optimal_rewards(config_.skills);
      const auto progress = SkillProgress::from_buffer(commands_, optimal).progress();
      rec.selection_probabilities = selection_probabilities(progress, config_.selector.delta);
    }

    Rollout ro = collect(rec.selection_probabilities);
    rec.total_reward = mean(ro.blended);
    rec.task_reward = mean(ro.task);
    rec.sil_reward = mean(ro.sil);

    const AssessmentRule rule = config_.effective_assessment();
    std::vector<double> dtw_sum(nk, 0.0), frame_sum(nk, 0.0);
    rec.episodes.assign(nk, 0);
    rec.admitted.assign(nk, 0);
    for (const auto& per_env : ro.completed) {
      for (const Trajectory& traj : per_env) {
        const auto s = static_cast<std::size_t>(traj.skill);
        const TargetPose& target = config_.targets[s];
        commands_.record_episode(traj.skill, traj.mean_task_reward());
        FeatureMapResult fm = feature_map(traj);
        const Assessment a = assess(traj, target, rule, config_.assessment_dtw);
        const double raw = config_.assessment_dtw == DtwNormalization::kNone ? a.dtw : dtw_to_target(fm.poses, target);
        dtw_sum[s] += raw;
        frame_sum[s] += raw / static_cast<double>(fm.poses.size());
        ++rec.episodes[s];
        if (admissions_enabled_ && buffer_.maybe_insert(traj.skill, fm.features, a.value)) ++rec.admitted[s];
      }
    }
    for (std::size_t s = 0; s < nk; ++s) {
      if (rec.episodes[s] > 0) {
        rec.expected_dtw.emplace_back(dtw_sum[s] / rec.episodes[s]);
        reference_dtw_[s] = frame_sum[s] / rec.episodes[s];
      } else {
        rec.expected_dtw.emplace_back(std::nullopt);
      }
    }

    const GaeResult gae = compute_gae(ro.buffer, config_.ppo.gamma, config_.ppo.lambda);
    Rng ppo_rng = make_stream(config_.seed, "ppo", stream_key(static_cast<std::uint64_t>(k), 0));
    rec.ppo = ppo_update(policy_, value_, ro.buffer, gae, config_.ppo, ppo_rng);

    if (!buffer_.empty() && config_.discriminator.epochs > 0) {
      Rng rng = make_stream(config_.seed, "discriminator", stream_key(static_cast<std::uint64_t>(k), 0));
      const std::size_t batch = config_.discriminator.batch_size;
      const auto rows = static_cast<std::size_t>(ro.transitions.rows());
      double loss_sum = 0.0;
      for (int ep = 0; ep < config_.discriminator.epochs; ++ep) {
        const Matrix expert = *buffer_.sample_transitions(batch, rng);
        Matrix policy_batch(static_cast<Eigen::Index>(batch), ro.transitions.cols());
        for (std::size_t b = 0; b < batch; ++b)
          policy_batch.row(static_cast<Eigen::Index>(b)) = ro.transitions.row(static_cast<Eigen::Index>(uniform_index(rng, rows)));
        loss_sum += disc_.update(expert, policy_batch, 1).front();
      }
      disc_ready_ = true;
      rec.discriminator_updated = true;
      rec.discriminator_loss = loss_sum / config_.discriminator.epochs;
    }

    std::vector<std::optional<double>> buffered;
    for (const auto& t : config_.targets) buffered.push_back(buffer_expected_dtw(buffer_, t, config_.weight_dtw));
    weights_.sil = omega_sil(buffered, config_.sigma_sil, n_skills);
    weights_.task = omega_task(rec.task_reward, config_.sigma_task);
    rec.next_omega_sil = weights_.sil;
    rec.next_omega_task = weights_.task;

    for (std::size_t s = 0; s < nk; ++s) {
      rec.j_dtw.push_back(buffered[s] ? std::optional<double>(j_dtw_from_expected(*buffered[s], config_.sigma_sil))
                                      : std::nullopt);
      rec.epsilon.push_back(buffer_.threshold(static_cast<int>(s)));
      rec.skill_task_reward.push_back(commands_.average_reward(static_cast<int>(s)));
    }
    rec.buffer_entries = buffer_.total_entries();
    rec.log_std_mean = policy_.log_std().mean();
  } catch (const DivergenceError& e) {
    throw DivergenceError("iteration " + std::to_string(k) + ": " + e.what());
  }
  iteration_ = k;
  return rec;
}

ordered_json Trainer::checkpoint() const {
  ordered_json j;
  j["format"] = "pasist-checkpoint";
  j["version"] = 1;
  j["iteration"] = iteration_;
  j["seed"] = config_.seed;
  j["mode"] = std::string(mode_name(config_.mode));
  j["config_hash"] = config_hash(config_.to_json());
  j["policy"] = policy_to_json(policy_);
  j["value"] = value_to_json(value_);
  j["discriminator"] = discriminator_to_json(disc_);
  j["discriminator_ready"] = disc_ready_;
  j["admissions_enabled"] = admissions_enabled_;
  j["sil_buffer"] = buffer_.to_json();
  j["command_buffer"] = commands_.to_json();
  j["weights"] = {{"sil", weights_.sil}, {"task", weights_.task}, {"reg", weights_.reg}};
  ordered_json ref = ordered_json::array();
  for (const auto& r : reference_dtw_) ref.push_back(nullable(r));
  j["reference_dtw"] = std::move(ref);
  return j;
}

Trainer Trainer::from_checkpoint(ExperimentConfig config, const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "pasist-checkpoint")
    throw ConfigError("checkpoint: not a checkpoint file");
  Trainer t(std::move(config));
  const int obs = t.env_.observation_size();
  const int act = t.config_.env.joints;
  try {
    t.iteration_ = doc.at("iteration").get<int>();
    t.policy_ = policy_from_json(doc.at("policy"));
    check_policy_shape(t.policy_, t.config_, t.env_);
    t.value_ = value_from_json(doc.at("value"));
    check_layers(t.value_.net(), layers(obs, t.config_.ppo.value_hidden, 1), "value");
    t.disc_ = discriminator_from_json(doc.at("discriminator"));
    check_layers(t.disc_.net(), layers(2 * act, t.config_.discriminator.hidden, 1), "discriminator");
    t.disc_ready_ = doc.at("discriminator_ready").get<bool>();
    t.admissions_enabled_ = doc.at("admissions_enabled").get<bool>();
    t.buffer_ = SilBuffer::from_json(doc.at("sil_buffer"));
    if (t.buffer_.num_skills() != t.config_.num_skills())
      throw ConfigError("checkpoint: SIL buffer has " + std::to_string(t.buffer_.num_skills()) +
                        " skills, the config has " + std::to_string(t.config_.num_skills()));
    for (int s = 0; s < t.buffer_.num_skills(); ++s)
      for (const auto& e : t.buffer_.entries(s))
        if (e.poses.dim() != act) throw ConfigError("checkpoint: SIL buffer joint dimension mismatch");
    t.commands_ = CommandBuffer::from_json(doc.at("command_buffer"));
    const auto& w = doc.at("weights");
    t.weights_ = {w.at("sil").get<double>(), w.at("task").get<double>(), w.at("reg").get<double>()};
    const auto& ref = doc.at("reference_dtw");
    if (ref.size() != t.config_.skills.size()) throw ConfigError("checkpoint: reference DTW size mismatch");
    for (std::size_t s = 0; s < ref.size(); ++s)
      t.reference_dtw_[s] = ref[s].is_null() ? std::nullopt : std::optional<double>(ref[s].get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  return t;
}

std::vector<std::vector<double>> dtw_matrix(std::span<const PoseSequence> sequences) {
  const std::size_t n = sequences.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = dtw_distance(sequences[i], sequences[i]);
    for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = dtw_distance(sequences[i], sequences[j]);
  }
  return m;
}

std::string trace_file_name(int skill, const std::string& name) { return std::to_string(skill) + "_" + name + ".csv"; }

namespace {

// Mean-action rollout; `skill_at(t)` gives the command skill for step t.
template <class SkillAt>
Trajectory run_deterministic(const ToyEnv& env, const PolicyNet& policy, EnvState state, double velocity,
                             SkillAt skill_at, int steps) {
  Trajectory traj;
  traj.skill = skill_at(0);
  traj.states.push_back(state);
  for (int t = 0; t < steps; ++t) {
    const Command cmd(velocity, skill_at(t), env.num_skills());
    const StepResult res = env.step(state, policy.mean(env.observation(state, cmd)), cmd);
    traj.actions.push_back(res.state.prev_action);
    traj.task_rewards.push_back(res.task_reward);
    traj.reg_rewards.push_back(res.reg_reward);
    traj.states.push_back(res.state);
    state = res.state;
    if (res.done) {
      traj.terminated = !res.timeout;
      break;
    }
  }
  return traj;
}

}  // namespace

EvalReport evaluate(const PolicyNet& policy, const ExperimentConfig& cfg,
                    std::span<const std::optional<double>> reference_dtw, int episodes,
                    const std::optional<std::filesystem::path>& trace_dir) {
  if (episodes < 1) throw ConfigError("eval.episodes: must be >= 1");
  const ToyEnv env(cfg.env, cfg.skills);
  check_policy_shape(policy, cfg, env);
  const int n = cfg.num_skills();
  const int length = cfg.env.episode_length;
  EvalReport rep;

  for (int m = 0; m < n; ++m) {
    double dtw = 0.0, per_frame = 0.0, reward = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
      Rng rng = make_stream(cfg.seed, "eval", stream_key(static_cast<std::uint64_t>(m + 1), static_cast<std::uint64_t>(ep)));
      const EnvState s0 = env.reset(rng);
      const double v = uniform(rng, -Command::kMaxVelocity, Command::kMaxVelocity);
      const Trajectory traj = run_deterministic(env, policy, s0, v, [m](int) { return m; }, length);
      const PoseSequence poses = pose_sequence(traj);
      const double d = dtw_to_target(poses, cfg.targets[static_cast<std::size_t>(m)]);
      dtw += d;
      per_frame += d / static_cast<double>(poses.size());
      reward += traj.mean_task_reward();
    }
    rep.expected_dtw.push_back(dtw / episodes);
    rep.expected_dtw_per_frame.push_back(per_frame / episodes);
    rep.task_reward.push_back(reward / episodes);
  }

  const int window = cfg.eval.transition_window;
  const int tail = window / 2;
  int successes = 0;
  for (int from = 0; from < n; ++from) {
    for (int to = 0; to < n; ++to) {
      if (from == to) continue;
      const auto ut = static_cast<std::size_t>(to);
      const double reference =
          ut < reference_dtw.size() && reference_dtw[ut] ? *reference_dtw[ut] : rep.expected_dtw_per_frame[ut];
      for (int ep = 0; ep < cfg.eval.transition_episodes; ++ep) {
        Rng rng = make_stream(cfg.seed, "eval-transition",
                              stream_key(static_cast<std::uint64_t>(from * n + to + 1), static_cast<std::uint64_t>(ep)));
        const EnvState s0 = env.reset(rng);
        const double v = uniform(rng, -Command::kMaxVelocity, Command::kMaxVelocity);
        TransitionResult tr;
        tr.from = from;
        tr.to = to;
        tr.switch_step = std::uniform_int_distribution<int>(1, length - window)(rng);
        tr.threshold = cfg.eval.success_factor * reference;
        const int sw = tr.switch_step;
        const Trajectory traj =
            run_deterministic(env, policy, s0, v, [&](int t) { return t < sw ? from : to; }, sw + window);
        const auto frames = static_cast<Eigen::Index>(traj.states.size());
        if (frames == sw + window + 1) {
          const PoseSequence full = pose_sequence(traj);
          const PoseSequence post(full.frames().bottomRows(tail));
          tr.post_switch_dtw = dtw_to_target(post, cfg.targets[ut], DtwNormalization::kLength);
          tr.success = tr.post_switch_dtw <= tr.threshold;
        } else {
          tr.post_switch_dtw = std::numeric_limits<double>::infinity();
        }
        successes += tr.success ? 1 : 0;
        rep.transitions.push_back(tr);
      }
    }
  }
  rep.transition_success_rate = rep.transitions.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                        : static_cast<double>(successes) / rep.transitions.size();

  Rng rep_rng = make_stream(cfg.seed, "eval-representative");
  const EnvState common_start = env.reset(rep_rng);
  std::vector<PoseSequence> sequences;
  if (trace_dir) std::filesystem::create_directories(*trace_dir);
  for (int m = 0; m < n; ++m) {
    const Trajectory traj = run_deterministic(env, policy, common_start, 0.0, [m](int) { return m; }, length);
    sequences.push_back(pose_sequence(traj));
    if (trace_dir) write_trace_csv(*trace_dir / trace_file_name(m, cfg.skills[static_cast<std::size_t>(m)].name), traj);
  }
  rep.dtw_matrix = dtw_matrix(sequences);
  return rep;
}

ordered_json EvalReport::to_json(const std::vector<SkillSpec>& skills) const {
  ordered_json j;
  ordered_json per_skill;
  for (std::size_t m = 0; m < skills.size(); ++m) {
    per_skill[skills[m].name] = {{"expected_dtw", expected_dtw[m]},
                                 {"expected_dtw_per_frame", expected_dtw_per_frame[m]},
                                 {"task_reward", task_reward[m]}};
  }
  j["skills"] = std::move(per_skill);
  j["transition_success_rate"] = nullable(transition_success_rate);
  ordered_json trs = ordered_json::array();
  for (const auto& t : transitions) {
    ordered_json o;
    o["from"] = skills[static_cast<std::size_t>(t.from)].name;
    o["to"] = skills[static_cast<std::size_t>(t.to)].name;
    o["switch_step"] = t.switch_step;
    o["post_switch_dtw"] = nullable(t.post_switch_dtw);
    o["threshold"] = t.threshold;
    o["success"] = t.success;
    trs.push_back(std::move(o));
  }
  j["transitions"] = std::move(trs);
  ordered_json names = ordered_json::array();
  for (const auto& s : skills) names.push_back(s.name);
  j["dtw_matrix"] = {{"skills", names}, {"values", dtw_matrix}};
  return j;
}

}  // namespace pasist
