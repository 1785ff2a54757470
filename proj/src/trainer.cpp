#include "ara3c/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>

#include "ara3c/errors.hpp"
#include "ara3c/util.hpp"

namespace ara3c {

namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point g_run_start;

double elapsed_seconds() {
    if (reproducible_mode()) return 0.0;
    return std::chrono::duration<double>(Clock::now() - g_run_start).count();
}

// Distinct stream tags so every RNG consumer gets an independent sequence
// derived from (seed, worker).
constexpr std::uint64_t kStreamProtagonistInit = 1;
constexpr std::uint64_t kStreamAdversaryInit = 2;
constexpr std::uint64_t kStreamWorkerEnv = 0x100;
constexpr std::uint64_t kStreamWorkerPolicy = 0x200;
constexpr std::uint64_t kStreamProgressEval = 0x300;

// One clean deterministic episode, used for the eval_every progress line.
double progress_eval(const ActorCriticParams& policy, const PendulumParams& env_params,
                     std::uint64_t seed) {
    PendulumEnv env(env_params);
    Rng rng(seed);
    Observation obs = env.reset(rng);
    double total = 0.0;
    while (!env.episode_over()) {
        const auto action = act(policy, obs, rng, /*deterministic=*/true);
        const StepResult result = env.step(action.sample, 0.0, rng);
        total += result.reward;
        obs = result.observation;
    }
    return total;
}

}  // namespace

std::string algo_name(Algo algo) { return algo == Algo::a3c ? "a3c" : "ar_a3c"; }

Algo algo_from_name(const std::string& name) {
    if (name == "a3c") return Algo::a3c;
    if (name == "ar_a3c" || name == "ar-a3c") return Algo::ar_a3c;
    throw ConfigError("unknown algo: " + name + " (expected a3c or ar-a3c)");
}

void TrainConfig::validate() const {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (global_episodes < 1) throw ConfigError("global_episodes must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
    if (!(entropy_beta >= 0.0)) throw ConfigError("entropy_beta must be >= 0");
    if (!(actor_lr > 0.0)) throw ConfigError("actor_lr must be > 0");
    if (!(critic_lr > 0.0)) throw ConfigError("critic_lr must be > 0");
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) throw ConfigError("difficulty must be in [0, 1]");
    if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be > 0");
    if (!std::isfinite(reward_shift)) throw ConfigError("reward_shift must be finite");
    if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
    env_params().validate();
}

PendulumParams TrainConfig::env_params() const {
    PendulumParams p = env;
    p.difficulty = difficulty;
    return p;
}

GlobalStore::GlobalStore(const TrainConfig& config, const TrainedModel* resume_from)
    : config_(config), episodes_(0) {
    config_.validate();
    if (resume_from) {
        protagonist_ = resume_from->protagonist;
        adversary_ = resume_from->adversary;
        optimizer_ = resume_from->optimizer;
        // Learning rates follow the resuming config; the caches carry over.
        optimizer_.protagonist_actor.learning_rate = config_.actor_lr;
        optimizer_.protagonist_critic.learning_rate = config_.critic_lr;
        optimizer_.adversary_actor.learning_rate = config_.actor_lr;
        optimizer_.adversary_critic.learning_rate = config_.critic_lr;
        episodes_.store(resume_from->episode_count);
        target_ = resume_from->episode_count + config_.global_episodes;
    } else {
        Rng protagonist_rng(Rng::derive(config_.seed, kStreamProtagonistInit));
        Rng adversary_rng(Rng::derive(config_.seed, kStreamAdversaryInit));
        protagonist_ = make_actor_critic(config_.env.max_torque, protagonist_rng);
        double adversary_scale = config_.difficulty * config_.env.max_torque;
        if (!(adversary_scale > 0.0)) adversary_scale = config_.env.max_torque;  // inert at D=0
        adversary_ = make_actor_critic(adversary_scale, adversary_rng);
        optimizer_.protagonist_actor = nn::make_rmsprop(protagonist_.actor, config_.actor_lr);
        optimizer_.protagonist_critic = nn::make_rmsprop(protagonist_.critic, config_.critic_lr);
        optimizer_.adversary_actor = nn::make_rmsprop(adversary_.actor, config_.actor_lr);
        optimizer_.adversary_critic = nn::make_rmsprop(adversary_.critic, config_.critic_lr);
        target_ = config_.global_episodes;
    }
}

ActorCriticParams GlobalStore::protagonist_snapshot() const {
    std::lock_guard lock(protagonist_mutex_);
    return protagonist_;
}

ActorCriticParams GlobalStore::adversary_snapshot() const {
    std::lock_guard lock(adversary_mutex_);
    return adversary_;
}

void GlobalStore::apply_protagonist(const AgentGrads& grads) {
    std::lock_guard lock(protagonist_mutex_);
    nn::rmsprop_apply(protagonist_.actor, grads.actor, optimizer_.protagonist_actor);
    nn::rmsprop_apply(protagonist_.critic, grads.critic, optimizer_.protagonist_critic);
}

void GlobalStore::apply_adversary(const AgentGrads& grads) {
    std::lock_guard lock(adversary_mutex_);
    nn::rmsprop_apply(adversary_.actor, grads.actor, optimizer_.adversary_actor);
    nn::rmsprop_apply(adversary_.critic, grads.critic, optimizer_.adversary_critic);
}

std::optional<int> GlobalStore::try_count_episode() {
    int current = episodes_.load(std::memory_order_relaxed);
    while (current < target_) {
        if (episodes_.compare_exchange_weak(current, current + 1, std::memory_order_acq_rel)) {
            return current + 1;  // 1-based episode index
        }
    }
    return std::nullopt;
}

void GlobalStore::log_curve(const CurvePoint& point) {
    std::lock_guard lock(curve_mutex_);
    curve_.push_back(point);
}

std::vector<CurvePoint> GlobalStore::curve_sorted() const {
    std::lock_guard lock(curve_mutex_);
    std::vector<CurvePoint> out = curve_;
    std::stable_sort(out.begin(), out.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.episode < b.episode; });
    return out;
}

TrainedModel GlobalStore::snapshot_model() const {
    TrainedModel model;
    model.config = config_;
    model.episode_count = episode_count();
    {
        std::lock_guard lock(protagonist_mutex_);
        model.protagonist = protagonist_;
        model.optimizer.protagonist_actor = optimizer_.protagonist_actor;
        model.optimizer.protagonist_critic = optimizer_.protagonist_critic;
    }
    {
        std::lock_guard lock(adversary_mutex_);
        model.adversary = adversary_;
        model.optimizer.adversary_actor = optimizer_.adversary_actor;
        model.optimizer.adversary_critic = optimizer_.adversary_critic;
    }
    return model;
}

RolloutResult rollout(PendulumEnv& env, const ActorCriticParams& protagonist,
                      const ActorCriticParams& adversary, int batch_size, Algo algo, Rng& env_rng,
                      Rng& policy_rng) {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (env.needs_reset()) env.reset(env_rng);

    RolloutResult result;
    result.batch.reserve(static_cast<size_t>(batch_size));
    Observation obs = make_observation(env.state());
    for (int k = 0; k < batch_size; ++k) {
        const GaussianAction mu = act(protagonist, obs, policy_rng);
        // a3c mode keeps the adversary channel at exactly zero.
        const double a_nu =
            algo == Algo::ar_a3c ? act(adversary, obs, policy_rng).sample : 0.0;

        const StepResult sr = env.step(mu.sample, a_nu, env_rng);
        Transition t;
        t.s = obs;
        t.a_mu = mu.sample;
        t.a_nu = a_nu;
        t.r = sr.reward;
        t.s_next = sr.observation;
        t.terminal = env.episode_over();
        result.batch.push_back(t);
        obs = sr.observation;
        if (t.terminal) {
            result.episode_ended = true;
            break;
        }
    }
    return result;
}

void worker_loop(int worker_id, const TrainConfig& config, GlobalStore& store,
                 const BatchObserver& observer) {
    Rng env_rng(Rng::derive(config.seed, kStreamWorkerEnv + static_cast<std::uint64_t>(worker_id)));
    Rng policy_rng(
        Rng::derive(config.seed, kStreamWorkerPolicy + static_cast<std::uint64_t>(worker_id)));
    PendulumEnv env(config.env_params());

    ActorCriticParams protagonist = store.protagonist_snapshot();
    ActorCriticParams adversary = store.adversary_snapshot();
    double episode_reward = 0.0;

    while (!store.done() && !store.abort_requested()) {
        RolloutResult ro =
            rollout(env, protagonist, adversary, config.batch_size, config.algo, env_rng, policy_rng);
        for (const Transition& t : ro.batch) episode_reward += t.r;
        const Transition& last = ro.batch.back();

        // The update step sees conditioned rewards; everything stored or
        // reported stays in raw environment units.
        ExperienceBatch conditioned = ro.batch;
        for (Transition& t : conditioned) t.r = (t.r + config.reward_shift) * config.reward_scale;

        // Protagonist update from its own view of the batch.
        const double bootstrap = last.terminal ? 0.0 : state_value(protagonist, last.s_next);
        const AdvantageSet advset =
            compute_returns_and_advantages(conditioned, protagonist, config.gamma, bootstrap);
        store.apply_protagonist(loss_grads(protagonist, conditioned, advset, config.entropy_beta));

        // Adversary update from the negated view of the same batch. Negating
        // the conditioned reward equals conditioning the adversary's own
        // reward -r, so the zero-sum pairing is preserved exactly.
        ExperienceBatch adversary_view;
        if (config.algo == Algo::ar_a3c) {
            adversary_view = negate_rewards(conditioned);
            const double adv_bootstrap =
                last.terminal ? 0.0 : state_value(adversary, adversary_view.back().s_next);
            const AdvantageSet adv_advset =
                compute_returns_and_advantages(adversary_view, adversary, config.gamma, adv_bootstrap);
            store.apply_adversary(loss_grads(adversary, adversary_view, adv_advset, config.entropy_beta));
        }

        // Pull fresh global weights once per batch.
        protagonist = store.protagonist_snapshot();
        if (config.algo == Algo::ar_a3c) adversary = store.adversary_snapshot();

        if (observer) {
            observer(ro.batch, config.algo == Algo::ar_a3c ? negate_rewards(ro.batch)
                                                           : ExperienceBatch{});
        }

        if (ro.episode_ended) {
            const std::optional<int> index = store.try_count_episode();
            if (index) {
                store.log_curve({*index, worker_id, episode_reward, elapsed_seconds()});
                if (config.eval_every > 0 && *index % config.eval_every == 0) {
                    const double eval_reward = progress_eval(
                        protagonist, config.env_params(),
                        Rng::derive(config.seed, kStreamProgressEval + static_cast<std::uint64_t>(*index)));
                    std::printf("[ara3c] episode %d worker %d eval_reward %s\n", *index, worker_id,
                                format_double(eval_reward).c_str());
                    std::fflush(stdout);
                }
            }
            episode_reward = 0.0;
            if (!index) break;  // target reached while this episode was in flight
        }
    }
}

TrainResult train(const TrainConfig& config, const TrainedModel* resume_from,
                  const BatchObserver& observer) {
    config.validate();
    g_run_start = Clock::now();
    GlobalStore store(config, resume_from);

    auto run_worker = [&](int worker_id) { worker_loop(worker_id, config, store, observer); };

    if (config.workers == 1) {
        try {
            run_worker(0);
        } catch (const DivergenceError& e) {
            throw DivergenceError("[worker 0] " + std::string(e.what()));
        }
    } else {
        std::vector<std::thread> threads;
        std::mutex failure_mutex;
        std::exception_ptr first_failure;
        int failed_worker = -1;
        for (int w = 0; w < config.workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    run_worker(w);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!first_failure) {
                        first_failure = std::current_exception();
                        failed_worker = w;
                    }
                    store.request_abort();
                }
            });
        }
        for (auto& t : threads) t.join();
        if (first_failure) {
            try {
                std::rethrow_exception(first_failure);
            } catch (const DivergenceError& e) {
                throw DivergenceError("[worker " + std::to_string(failed_worker) + "] " + e.what());
            } catch (const std::exception& e) {
                throw std::runtime_error("[worker " + std::to_string(failed_worker) + "] " + e.what());
            }
        }
    }

    TrainResult result;
    result.model = store.snapshot_model();
    result.curve = store.curve_sorted();
    return result;
}

}  // namespace ara3c
