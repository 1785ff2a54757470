#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ara3c/agent.hpp"
#include "ara3c/dynamics.hpp"

namespace ara3c {

enum class Algo { a3c, ar_a3c };

std::string algo_name(Algo algo);
Algo algo_from_name(const std::string& name);

struct TrainConfig {
    Algo algo = Algo::ar_a3c;
    int workers = 2;
    int global_episodes = 1500;
    int batch_size = 2;
    double gamma = 0.9;
    double entropy_beta = 0.01;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double difficulty = 0.5;  // adversary clamp during training = D * max_torque
    // Reward conditioning for the update step only: returns and advantages
    // are computed from (r + reward_shift) * reward_scale. Stored tuples,
    // curve logs, and evaluation always use the raw environment reward. The
    // defaults map [-16.2, 0] to roughly [-1, 1]; without this the critic
    // regression target scale stalls swing-up learning.
    double reward_shift = 8.1;
    double reward_scale = 1.0 / 8.1;
    std::uint64_t seed = 0;
    int eval_every = 0;  // episodes between progress evaluations; 0 disables
    PendulumParams env;

    void validate() const;
    // Environment parameters with the training difficulty applied.
    PendulumParams env_params() const;
};

struct CurvePoint {
    int episode = 0;  // 1-based, continues across resumed runs
    int worker = 0;
    double reward = 0.0;      // undiscounted episode reward (protagonist view)
    double wallclock_s = 0.0;
};

// Everything needed to persist or resume a training run.
struct OptimizerCaches {
    nn::RmsPropState protagonist_actor;
    nn::RmsPropState protagonist_critic;
    nn::RmsPropState adversary_actor;
    nn::RmsPropState adversary_critic;
};

struct TrainedModel {
    TrainConfig config;
    int episode_count = 0;
    ActorCriticParams protagonist;
    ActorCriticParams adversary;
    OptimizerCaches optimizer;
};

// Shared state of one training run. Workers pull parameter snapshots and push
// gradients; one mutex per agent network serializes application and keeps
// snapshots free of torn matrices. The episode counter saturates exactly at
// the target.
class GlobalStore {
public:
    GlobalStore(const TrainConfig& config, const TrainedModel* resume_from);

    ActorCriticParams protagonist_snapshot() const;
    ActorCriticParams adversary_snapshot() const;

    void apply_protagonist(const AgentGrads& grads);
    void apply_adversary(const AgentGrads& grads);

    int episode_count() const { return episodes_.load(std::memory_order_acquire); }
    int target_episodes() const { return target_; }
    bool done() const { return episode_count() >= target_; }

    // Counts one completed episode unless the target was already reached.
    // On success returns the 1-based episode index.
    std::optional<int> try_count_episode();

    void log_curve(const CurvePoint& point);
    std::vector<CurvePoint> curve_sorted() const;

    void request_abort() { abort_.store(true, std::memory_order_release); }
    bool abort_requested() const { return abort_.load(std::memory_order_acquire); }

    TrainedModel snapshot_model() const;

private:
    TrainConfig config_;
    mutable std::mutex protagonist_mutex_;
    mutable std::mutex adversary_mutex_;
    mutable std::mutex curve_mutex_;
    ActorCriticParams protagonist_;
    ActorCriticParams adversary_;
    OptimizerCaches optimizer_;
    std::atomic<int> episodes_;
    int target_ = 0;
    std::atomic<bool> abort_{false};
    std::vector<CurvePoint> curve_;
};

struct RolloutResult {
    ExperienceBatch batch;
    bool episode_ended = false;
};

// Collects up to batch_size tuples, stopping early at episode end. Resets the
// environment first if the previous episode is over. In a3c mode the
// adversary channel is forced to exactly zero.
RolloutResult rollout(PendulumEnv& env, const ActorCriticParams& protagonist,
                      const ActorCriticParams& adversary, int batch_size, Algo algo,
                      Rng& env_rng, Rng& policy_rng);

// Test hook: receives the protagonist-view and adversary-view batches of
// every update (the adversary view is empty in a3c mode).
using BatchObserver =
    std::function<void(const ExperienceBatch& protagonist_view, const ExperienceBatch& adversary_view)>;

void worker_loop(int worker_id, const TrainConfig& config, GlobalStore& store,
                 const BatchObserver& observer);

struct TrainResult {
    TrainedModel model;
    std::vector<CurvePoint> curve;
};

// Runs config.workers worker loops concurrently (strictly sequential when
// workers == 1). Worker failures propagate with the worker id attached.
TrainResult train(const TrainConfig& config, const TrainedModel* resume_from = nullptr,
                  const BatchObserver& observer = nullptr);

}  // namespace ara3c
