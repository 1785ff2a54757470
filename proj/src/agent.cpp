#include "ara3c/agent.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "ara3c/errors.hpp"

namespace ara3c {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
constexpr double kMinStd = 1e-4;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::array<double, 3> obs_features(const Observation& obs) {
    return {obs.cos_theta, obs.sin_theta, obs.theta_dot};
}

}  // namespace

ActorCriticParams make_actor_critic(double action_scale, Rng& rng, int actor_hidden,
                                    int critic_hidden) {
    if (!(action_scale > 0.0)) throw ConfigError("action_scale must be > 0");
    ActorCriticParams params;
    // relu hidden layers: a tanh actor hidden layer saturates on the +-8
    // rad/s velocity feature and reliably stalls swing-up learning.
    params.actor = nn::make_mlp({3, actor_hidden, 2},
                                {nn::Activation::relu, nn::Activation::identity}, rng);
    params.critic = nn::make_mlp({3, critic_hidden, 1},
                                 {nn::Activation::relu, nn::Activation::identity}, rng);
    params.action_scale = action_scale;
    return params;
}

std::pair<double, double> policy_moments(const ActorCriticParams& params, const Observation& obs) {
    const auto features = obs_features(obs);
    const auto fw = nn::forward(params.actor, features);
    const double mean = params.action_scale * std::tanh(fw.output[0]);
    const double stddev = softplus(fw.output[1]) + kMinStd;
    if (!std::isfinite(mean) || !std::isfinite(stddev)) {
        throw DivergenceError("non-finite actor output");
    }
    return {mean, stddev};
}

GaussianAction act(const ActorCriticParams& params, const Observation& obs, Rng& rng,
                   bool deterministic) {
    const auto [mean, stddev] = policy_moments(params, obs);
    GaussianAction action;
    action.mean = mean;
    action.stddev = stddev;
    action.sample = deterministic ? mean : mean + stddev * rng.normal();
    const double z = (action.sample - mean) / stddev;
    action.log_prob = -0.5 * z * z - std::log(stddev) - 0.5 * kLogTwoPi;
    return action;
}

double state_value(const ActorCriticParams& params, const Observation& obs) {
    const auto features = obs_features(obs);
    const auto fw = nn::forward(params.critic, features);
    if (!std::isfinite(fw.output[0])) throw DivergenceError("non-finite critic output");
    return fw.output[0];
}

AdvantageSet compute_returns_and_advantages(const ExperienceBatch& batch,
                                            const ActorCriticParams& params, double gamma,
                                            double bootstrap) {
    if (batch.empty()) throw std::invalid_argument("compute_returns_and_advantages: empty batch");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");

    AdvantageSet out;
    out.returns.resize(batch.size());
    out.advantages.resize(batch.size());
    double running = bootstrap;
    for (size_t i = batch.size(); i-- > 0;) {
        running = batch[i].r + gamma * running;
        out.returns[i] = running;
    }
    for (size_t i = 0; i < batch.size(); ++i) {
        out.advantages[i] = out.returns[i] - state_value(params, batch[i].s);
    }
    return out;
}

AgentGrads loss_grads(const ActorCriticParams& params, const ExperienceBatch& batch,
                      const AdvantageSet& advset, double entropy_beta) {
    if (batch.empty()) throw std::invalid_argument("loss_grads: empty batch");
    if (advset.returns.size() != batch.size() || advset.advantages.size() != batch.size()) {
        throw std::invalid_argument("loss_grads: batch/advantage size mismatch");
    }

    AgentGrads grads;
    grads.actor = nn::zeros_like(params.actor);
    grads.critic = nn::zeros_like(params.critic);
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    for (size_t i = 0; i < batch.size(); ++i) {
        const auto features = obs_features(batch[i].s);
        const double advantage = advset.advantages[i];

        // Actor: L = mean_t[ -log pi(a|s) * A - beta * H ], A held constant.
        const auto actor_fw = nn::forward(params.actor, features);
        const double p_mean = actor_fw.output[0];
        const double p_std = actor_fw.output[1];
        const double tanh_p = std::tanh(p_mean);
        const double mean = params.action_scale * tanh_p;
        const double stddev = softplus(p_std) + kMinStd;
        const double diff = batch[i].a_mu - mean;
        const double var = stddev * stddev;

        const double dl_dmean = -advantage * diff / var;
        const double dl_dstd =
            advantage * (1.0 / stddev - diff * diff / (var * stddev)) - entropy_beta / stddev;
        const double dl_dp0 = dl_dmean * params.action_scale * (1.0 - tanh_p * tanh_p);
        const double dl_dp1 = dl_dstd * sigmoid(p_std);
        if (!std::isfinite(dl_dp0) || !std::isfinite(dl_dp1)) {
            throw DivergenceError("non-finite actor loss gradient");
        }
        const std::array<double, 2> actor_grad{dl_dp0, dl_dp1};
        nn::backward_accumulate(params.actor, actor_fw.tape, actor_grad, inv_n, grads.actor);

        // Critic: L = mean_t[ (R - V)^2 ].
        const auto critic_fw = nn::forward(params.critic, features);
        const double value = critic_fw.output[0];
        const double dl_dv = 2.0 * (value - advset.returns[i]);
        if (!std::isfinite(dl_dv)) throw DivergenceError("non-finite critic loss gradient");
        const std::array<double, 1> critic_grad{dl_dv};
        nn::backward_accumulate(params.critic, critic_fw.tape, critic_grad, inv_n, grads.critic);
    }
    return grads;
}

ExperienceBatch negate_rewards(const ExperienceBatch& batch) {
    ExperienceBatch out = batch;
    for (Transition& t : out) {
        t.r = -t.r;
        std::swap(t.a_mu, t.a_nu);
    }
    return out;
}

}  // namespace ara3c
