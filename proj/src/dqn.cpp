#include "ris/dqn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ris {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity_ >= 1, "replay capacity must be at least 1");
  store_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (store_.size() < capacity_) {
    store_.push_back(std::move(t));
  } else {
    store_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= store_.size())
    throw std::out_of_range("replay index out of range");
  if (store_.size() < capacity_) return store_[i];
  return store_[(next_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    Rng& rng) const {
  require(batch >= 1 && batch <= store_.size(),
          "sample needs 1 <= batch <= stored transitions");
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b)
    out.push_back(&store_[uniform_below(rng, store_.size())]);
  return out;
}

void DqnConfig::validate() const {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(max_steps >= 1, "max_steps must be at least 1");
  require(target_sync_interval >= 1,
          "target_sync_interval must be at least 1");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(lr > 0.0, "lr must be positive");
  require(episodes >= 1, "episodes must be at least 1");
  require(learn_start >= batch_size,
          "learn_start must be at least batch_size");
  require(replay_capacity >= learn_start,
          "replay_capacity must be at least learn_start");
  require(!hidden_sizes.empty(), "at least one hidden layer is required");
  for (int h : hidden_sizes) require(h >= 1, "hidden sizes must be positive");
}

namespace {

std::vector<int> make_arch(int state_size, const DqnConfig& cfg) {
  std::vector<int> arch;
  arch.reserve(cfg.hidden_sizes.size() + 2);
  arch.push_back(state_size);
  arch.insert(arch.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  arch.push_back(kNumActions);
  return arch;
}

}  // namespace

DqnAgent::DqnAgent(int state_size, const DqnConfig& cfg)
    : online(make_arch(state_size, cfg), derive_seed(cfg.seed, 0)),
      target(online),
      buffer(static_cast<std::size_t>(cfg.replay_capacity)),
      adam(online, cfg.lr),
      config(cfg) {
  config.validate();
}

DqnAgent::DqnAgent(Mlp network, const DqnConfig& cfg)
    : online(std::move(network)),
      target(online),
      buffer(static_cast<std::size_t>(cfg.replay_capacity)),
      adam(online, cfg.lr),
      config(cfg) {
  config.validate();
  require(online.output_size() == kNumActions,
          "network output size must equal the action count");
}

int greedy_action(const Mlp& net, const Eigen::VectorXd& state) {
  const Eigen::MatrixXd q = net.forward(state);
  int best = 0;
  for (int a = 1; a < q.rows(); ++a)
    if (q(a, 0) > q(best, 0)) best = a;
  return best;
}

int select_action(const Mlp& net, const Eigen::VectorXd& state, double epsilon,
                  Rng& rng) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  if (uniform01(rng) < epsilon) return greedy_action(net, state);
  return static_cast<int>(uniform_below(rng, kNumActions));
}

Eigen::VectorXd td_targets(const std::vector<const Transition*>& batch,
                           const Mlp& target, double gamma) {
  require(!batch.empty(), "batch must not be empty");
  const Eigen::Index b_size = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd next_states(batch[0]->next_state.size(), b_size);
  for (Eigen::Index b = 0; b < b_size; ++b)
    next_states.col(b) = batch[b]->next_state;
  const Eigen::MatrixXd q_next = target.forward(next_states);
  Eigen::VectorXd y(b_size);
  for (Eigen::Index b = 0; b < b_size; ++b) {
    y(b) = batch[b]->reward;
    if (!batch[b]->done) y(b) += gamma * q_next.col(b).maxCoeff();
  }
  return y;
}

void sync_target(DqnAgent& agent) {
  agent.target.copy_parameters_from(agent.online);
}

void learn_step(DqnAgent& agent, Rng& rng_replay) {
  const auto batch =
      agent.buffer.sample(static_cast<std::size_t>(agent.config.batch_size),
                          rng_replay);
  const Eigen::VectorXd y = td_targets(batch, agent.target, agent.config.gamma);
  const Eigen::Index b_size = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd states(batch[0]->state.size(), b_size);
  for (Eigen::Index b = 0; b < b_size; ++b) states.col(b) = batch[b]->state;

  const Mlp::Cache cache = agent.online.forward_cached(states);
  const Eigen::MatrixXd& q = cache.activations.back();
  // Squared error on the taken action's output only, averaged over the batch.
  Eigen::MatrixXd dloss = Eigen::MatrixXd::Zero(q.rows(), b_size);
  for (Eigen::Index b = 0; b < b_size; ++b) {
    const int a = batch[b]->action;
    dloss(a, b) = 2.0 * (q(a, b) - y(b)) / static_cast<double>(b_size);
  }
  const Mlp::Gradients grads = agent.online.backward(cache, dloss);
  adam_step(agent.online, agent.adam, grads);
  ++agent.learn_steps;
  if (agent.learn_steps % agent.config.target_sync_interval == 0)
    sync_target(agent);
}

TrainResult train(const Scenario& scenario, const DqnConfig& cfg) {
  cfg.validate();
  require_searchable(scenario);
  const auto t0 = std::chrono::steady_clock::now();

  DqnAgent agent(scenario.array().cell_count(), cfg);
  Rng rng_starts = make_rng(derive_seed(cfg.seed, 1));
  Rng rng_actions = make_rng(derive_seed(cfg.seed, 2));
  Rng rng_replay = make_rng(derive_seed(cfg.seed, 3));

  Environment env(scenario, cfg.max_steps);
  std::vector<double> episode_rewards;
  episode_rewards.reserve(static_cast<std::size_t>(cfg.episodes));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Eigen::VectorXd state = env.reset(std::nullopt, rng_starts);
    double ep_reward = 0.0;
    for (int t = 0; t < cfg.max_steps; ++t) {
      const int action =
          select_action(agent.online, state, cfg.epsilon, rng_actions);
      Transition tr = env.step(action);
      ep_reward += tr.reward;
      state = tr.next_state;
      agent.buffer.push(std::move(tr));
      if (agent.buffer.size() >=
          static_cast<std::size_t>(cfg.learn_start))
        learn_step(agent, rng_replay);
    }
    episode_rewards.push_back(ep_reward);
  }

  RunManifest manifest;
  manifest.config = cfg;
  manifest.seed_weights = derive_seed(cfg.seed, 0);
  manifest.seed_starts = derive_seed(cfg.seed, 1);
  manifest.seed_actions = derive_seed(cfg.seed, 2);
  manifest.seed_replay = derive_seed(cfg.seed, 3);
  manifest.baseline = scenario.baseline();
  manifest.scenario_hash = scenario.content_hash();
  manifest.arch = agent.online.layer_sizes();

  TrainResult result{std::move(agent), std::move(episode_rewards),
                     std::move(manifest), 0.0};
  result.wall_seconds = seconds_since(t0);
  return result;
}

EvalResult evaluate(const DqnAgent& agent, const Scenario& scenario,
                    const std::vector<OverlayPlacement>& starts,
                    int max_steps) {
  require(!starts.empty(), "evaluation needs at least one start");
  require(max_steps >= 1, "max_steps must be at least 1");
  require_searchable(scenario);

  EvalResult result;
  const auto t0 = std::chrono::steady_clock::now();
  for (const OverlayPlacement& start : starts) {
    require(scenario.spec().window.contains(start.cx, start.cy),
            "start placement outside the window");
    EvalResult::Rollout r;
    r.start = start;
    OverlayPlacement p = start;
    r.placements.push_back(p);
    r.a_totals.push_back(scenario.objective_at(p).a_total);
    Eigen::VectorXd state = state_vector(scenario.profile_at(p));
    for (int t = 0; t < max_steps; ++t) {
      const int action = greedy_action(agent.online, state);
      p = move(p, scenario.spec(), action);
      r.actions.push_back(action);
      r.placements.push_back(p);
      r.a_totals.push_back(scenario.objective_at(p).a_total);
      state = state_vector(scenario.profile_at(p));
    }
    r.final_placement = p;
    r.best_a_total = *std::max_element(r.a_totals.begin(), r.a_totals.end());
    result.rollouts.push_back(std::move(r));
  }
  result.wall_seconds = seconds_since(t0);

  result.optimum_a_total = exhaustive_search(scenario).best_a_total;
  for (auto& r : result.rollouts)
    r.reached_optimum = r.best_a_total == result.optimum_a_total;
  return result;
}

std::vector<OverlayPlacement> default_eval_starts(const Scenario& scenario) {
  const OverlayPlacement center = scenario.reference_placement();
  const SuperpositionSpec& spec = scenario.spec();
  return {center, move(center, spec, 3 /* E */), move(center, spec, 1 /* N */)};
}

std::vector<double> smoothed_rewards(const std::vector<double>& rewards,
                                     int window) {
  require(window >= 1, "smoothing window must be at least 1");
  std::vector<double> out;
  out.reserve(rewards.size());
  double running = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    running += rewards[i];
    if (i >= static_cast<std::size_t>(window))
      running -= rewards[i - window];
    const auto n = std::min<std::size_t>(i + 1, window);
    out.push_back(running / static_cast<double>(n));
  }
  return out;
}

void write_training_curve(const std::vector<double>& rewards,
                          const std::string& path,
                          const std::string& config_hash, int window) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "episode,reward,smoothed_reward\n";
  const std::vector<double> smoothed = smoothed_rewards(rewards, window);
  char line[96];
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g\n", i, rewards[i],
                  smoothed[i]);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::ordered_json j;
  if (!m.scenario_hash.empty()) j["config_hash"] = m.scenario_hash;
  j["scenario_hash"] = m.scenario_hash;
  j["arch"] = m.arch;
  j["hyperparameters"] = {{"epsilon", m.config.epsilon},
                          {"batch_size", m.config.batch_size},
                          {"max_steps", m.config.max_steps},
                          {"target_sync_interval",
                           m.config.target_sync_interval},
                          {"gamma", m.config.gamma},
                          {"lr", m.config.lr},
                          {"episodes", m.config.episodes},
                          {"learn_start", m.config.learn_start},
                          {"replay_capacity", m.config.replay_capacity}};
  j["seeds"] = {{"master", m.config.seed},
                {"weights", m.seed_weights},
                {"starts", m.seed_starts},
                {"actions", m.seed_actions},
                {"replay", m.seed_replay}};
  j["baseline"] = m.baseline;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_eval_result(const EvalResult& result, const std::string& path,
                       const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["optimum_a_total"] = result.optimum_a_total;
  nlohmann::ordered_json rollouts = nlohmann::ordered_json::array();
  for (const auto& r : result.rollouts) {
    nlohmann::ordered_json jr;
    jr["start"] = {r.start.cx, r.start.cy};
    jr["actions"] = r.actions;
    nlohmann::ordered_json placements = nlohmann::ordered_json::array();
    for (const auto& p : r.placements) placements.push_back({p.cx, p.cy});
    jr["placements"] = std::move(placements);
    jr["a_totals"] = r.a_totals;
    jr["final_placement"] = {r.final_placement.cx, r.final_placement.cy};
    jr["best_a_total"] = r.best_a_total;
    jr["reached_optimum"] = r.reached_optimum;
    rollouts.push_back(std::move(jr));
  }
  j["rollouts"] = std::move(rollouts);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ris
