#pragma once

#include <vector>

#include "ara3c/dynamics.hpp"
#include "ara3c/nn.hpp"

namespace ara3c {

// Actor-critic pair over the 3-feature pendulum observation with a 1-D
// Gaussian torque policy. The protagonist and the adversary use the same
// structure; the adversary just trains on negated rewards and a smaller
// action scale (difficulty * max_torque).

struct ActorCriticParams {
    nn::MlpParams actor;   // 3 -> hidden -> [mean preact, std preact]
    nn::MlpParams critic;  // 3 -> hidden -> V(s)
    double action_scale = 2.0;

    int actor_hidden() const { return actor.layers.front().weights.rows; }
    int critic_hidden() const { return critic.layers.front().weights.rows; }
};

// Actor hidden layer is tanh, critic hidden layer is relu, output heads are
// linear. Defaults match the 200/100 unit networks used throughout.
ActorCriticParams make_actor_critic(double action_scale, Rng& rng, int actor_hidden = 200,
                                    int critic_hidden = 100);

struct GaussianAction {
    double mean = 0.0;      // action_scale * tanh(mean preact)
    double stddev = 0.0;    // softplus(std preact) + 1e-4
    double sample = 0.0;    // pre-clamp draw; the environment clamps later
    double log_prob = 0.0;  // log density at `sample`
};

// mean/stddev from the actor head outputs.
std::pair<double, double> policy_moments(const ActorCriticParams& params, const Observation& obs);

// Samples from the policy; with deterministic=true the sample is the mean
// (evaluation mode). Throws DivergenceError on non-finite network output.
GaussianAction act(const ActorCriticParams& params, const Observation& obs, Rng& rng,
                   bool deterministic = false);

double state_value(const ActorCriticParams& params, const Observation& obs);

struct Transition {
    Observation s;
    double a_mu = 0.0;  // action of the agent this batch view belongs to
    double a_nu = 0.0;  // the other agent's action
    double r = 0.0;
    Observation s_next;
    bool terminal = false;
};

using ExperienceBatch = std::vector<Transition>;

struct AdvantageSet {
    std::vector<double> returns;     // n-step discounted return R_t
    std::vector<double> advantages;  // A_t = R_t - V(s_t)
};

// Backward recursion R_t = r_t + gamma*R_{t+1} seeded with `bootstrap`
// (V(s') of the last tuple, or 0 if it is terminal).
AdvantageSet compute_returns_and_advantages(const ExperienceBatch& batch,
                                            const ActorCriticParams& params, double gamma,
                                            double bootstrap);

struct AgentGrads {
    nn::MlpGrads actor;
    nn::MlpGrads critic;
};

// Gradients of the batch-averaged losses:
//   actor:  mean_t[ -log pi(a_t|s_t) * A_t - entropy_beta * H(pi(.|s_t)) ]
//   critic: mean_t[ (R_t - V(s_t))^2 ]
// Advantages are treated as constants (no gradient flows through A_t).
AgentGrads loss_grads(const ActorCriticParams& params, const ExperienceBatch& batch,
                      const AdvantageSet& advset, double entropy_beta);

// Adversary view of a batch: rewards negated, a_mu/a_nu swapped so the
// adversary's own action is the one whose log-prob is trained.
ExperienceBatch negate_rewards(const ExperienceBatch& batch);

}  // namespace ara3c
