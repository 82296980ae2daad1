#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ris/neural.hpp"
#include "ris/rng.hpp"
#include "ris/search.hpp"

namespace ris {

// Fixed-capacity FIFO ring of transitions with a uniform sampler.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Transition t);
  std::size_t size() const { return store_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Oldest-first logical indexing.
  const Transition& at(std::size_t i) const;

  // Uniform with replacement; requires size() >= batch.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // ring write position once full
  std::vector<Transition> store_;
};

struct DqnConfig {
  double epsilon = 0.9;  // probability of taking the greedy action
  int batch_size = 128;
  int max_steps = 11;
  int target_sync_interval = 100;  // learn steps between target refreshes
  double gamma = 0.98;
  double lr = 1e-3;
  int episodes = 2000;
  int learn_start = 256;  // stored transitions before learning begins
  int replay_capacity = 10000;
  std::vector<int> hidden_sizes{1000, 500, 100, 50};
  std::uint64_t seed = 0;

  void validate() const;
};

// Q-learner: online and target networks, experience store, optimizer state.
struct DqnAgent {
  Mlp online;
  Mlp target;
  ReplayBuffer buffer;
  AdamState adam;
  DqnConfig config;
  std::int64_t learn_steps = 0;

  DqnAgent(int state_size, const DqnConfig& config);
  DqnAgent(Mlp network, const DqnConfig& config);
};

// Lowest-index argmax of the action values for `state`.
int greedy_action(const Mlp& net, const Eigen::VectorXd& state);

// Greedy with probability epsilon, otherwise uniform over all actions.  One
// coin draw always; one extra draw only on exploration.
int select_action(const Mlp& net, const Eigen::VectorXd& state, double epsilon,
                  Rng& rng);

// y_b = r_b + gamma * max_a Q_target(s'_b, a), or just r_b on episode end.
Eigen::VectorXd td_targets(const std::vector<const Transition*>& batch,
                           const Mlp& target, double gamma);

void sync_target(DqnAgent& agent);

// One minibatch gradient step on the online network: sample, TD targets,
// squared error on the taken actions, Adam update, periodic target sync.
void learn_step(DqnAgent& agent, Rng& rng_replay);

// Everything needed to reproduce a training run.
struct RunManifest {
  DqnConfig config;
  std::uint64_t seed_weights = 0;
  std::uint64_t seed_starts = 0;
  std::uint64_t seed_actions = 0;
  std::uint64_t seed_replay = 0;
  double baseline = 0.0;
  std::string scenario_hash;
  std::vector<int> arch;
};

struct TrainResult {
  DqnAgent agent;
  std::vector<double> episode_rewards;
  RunManifest manifest;
  double wall_seconds = 0.0;
};

// Episodic training from uniformly random window starts: epsilon-greedy
// acting, one minibatch gradient step per environment step once learn_start
// transitions are stored, periodic target sync.
TrainResult train(const Scenario& scenario, const DqnConfig& config);

struct EvalResult {
  struct Rollout {
    OverlayPlacement start;
    std::vector<OverlayPlacement> placements;  // start plus one per step
    std::vector<int> a_totals;
    std::vector<int> actions;
    OverlayPlacement final_placement;
    int best_a_total = 0;
    bool reached_optimum = false;
  };
  std::vector<Rollout> rollouts;
  int optimum_a_total = 0;
  double wall_seconds = 0.0;  // rollouts only, not the optimum lookup
};

// Pure-greedy rollouts from each start; afterwards the exhaustive optimum is
// computed (outside the rollout timer) to mark which rollouts attained it.
EvalResult evaluate(const DqnAgent& agent, const Scenario& scenario,
                    const std::vector<OverlayPlacement>& starts,
                    int max_steps);

// Centered placement plus its east and north neighbors (window-clamped).
std::vector<OverlayPlacement> default_eval_starts(const Scenario& scenario);

// Trailing moving average over at most `window` previous entries.
std::vector<double> smoothed_rewards(const std::vector<double>& rewards,
                                     int window = 50);

// Rows "episode,reward,smoothed_reward"; a "# config_hash=..." comment line
// precedes the header if provided.
void write_training_curve(const std::vector<double>& rewards,
                          const std::string& path,
                          const std::string& config_hash = "",
                          int window = 50);
void write_manifest(const RunManifest& manifest, const std::string& path);
void write_eval_result(const EvalResult& result, const std::string& path,
                       const std::string& config_hash = "");

}  // namespace ris
