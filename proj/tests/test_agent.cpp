#include <cmath>

#include "ara3c/agent.hpp"
#include "ara3c/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ara3c;

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

void zero_net(nn::MlpParams& net) {
    for (auto& layer : net.layers) {
        for (double& w : layer.weights.data) w = 0.0;
        for (double& b : layer.bias) b = 0.0;
    }
}

ActorCriticParams zero_value_agent(Rng& rng, double scale = 2.0, int ah = 8, int ch = 6) {
    auto params = make_actor_critic(scale, rng, ah, ch);
    zero_net(params.critic);
    return params;
}

Observation obs_of(double c, double s, double d) { return Observation{c, s, d}; }

ExperienceBatch random_batch(Rng& rng, size_t n) {
    ExperienceBatch batch;
    for (size_t i = 0; i < n; ++i) {
        Transition t;
        const double theta = rng.uniform(-3.14, 3.14);
        t.s = obs_of(std::cos(theta), std::sin(theta), rng.uniform(-8.0, 8.0));
        t.a_mu = rng.uniform(-2.0, 2.0);
        t.a_nu = rng.uniform(-1.0, 1.0);
        t.r = rng.uniform(-16.0, 0.0);
        const double theta2 = rng.uniform(-3.14, 3.14);
        t.s_next = obs_of(std::cos(theta2), std::sin(theta2), rng.uniform(-8.0, 8.0));
        t.terminal = false;
        batch.push_back(t);
    }
    batch.back().terminal = true;
    return batch;
}

// Test-side loss evaluators, independent of loss_grads.
double actor_loss_oracle(const ActorCriticParams& params, const ExperienceBatch& batch,
                         const std::vector<double>& advantages, double beta) {
    double total = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> input{batch[i].s.cos_theta, batch[i].s.sin_theta,
                                        batch[i].s.theta_dot};
        const auto out = oracle::mlp_forward(params.actor, input);
        const double mean = params.action_scale * std::tanh(out[0]);
        const double stddev = std::log1p(std::exp(out[1])) + 1e-4;
        const double z = (batch[i].a_mu - mean) / stddev;
        const double nlp = 0.5 * z * z + std::log(stddev) + 0.5 * kLogTwoPi;
        const double entropy = 0.5 * (1.0 + kLogTwoPi) + std::log(stddev);
        total += nlp * advantages[i] - beta * entropy;
    }
    return total / static_cast<double>(batch.size());
}

double critic_loss_oracle(const ActorCriticParams& params, const ExperienceBatch& batch,
                          const std::vector<double>& returns) {
    double total = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const std::vector<double> input{batch[i].s.cos_theta, batch[i].s.sin_theta,
                                        batch[i].s.theta_dot};
        const auto out = oracle::mlp_forward(params.critic, input);
        const double d = returns[i] - out[0];
        total += d * d;
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("act: deterministic action is the mean with the mode's log density") {
    Rng rng(21);
    auto params = make_actor_critic(2.0, rng, 16, 8);
    const Observation obs = obs_of(0.2, 0.4, -1.0);
    auto action = act(params, obs, rng, /*deterministic=*/true);
    CHECK(action.sample == action.mean);
    CHECK(action.log_prob ==
          doctest::Approx(-std::log(action.stddev * std::sqrt(2.0 * std::acos(-1.0)))).epsilon(1e-12));
    CHECK(std::fabs(action.mean) <= 2.0);
    CHECK(action.stddev >= 1e-4);
}

TEST_CASE("act: zero-weight actor outputs zero mean") {
    Rng rng(22);
    auto params = make_actor_critic(2.0, rng, 16, 8);
    zero_net(params.actor);
    auto action = act(params, obs_of(1.0, 0.0, 0.0), rng, true);
    CHECK(action.mean == 0.0);
    // softplus(0) + 1e-4
    CHECK(action.stddev == doctest::Approx(std::log(2.0) + 1e-4).epsilon(1e-12));
}

TEST_CASE("act: sampled moments match the distribution within 2%") {
    Rng rng(23);
    auto params = make_actor_critic(2.0, rng, 16, 8);
    const Observation obs = obs_of(0.8, -0.6, 2.0);
    const auto ref = act(params, obs, rng, true);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto a = act(params, obs, rng);
        sum += a.sample;
        sq += a.sample * a.sample;
    }
    const double mean = sum / n;
    const double stddev = std::sqrt(sq / n - mean * mean);
    CHECK(std::fabs(mean - ref.mean) <= 0.02 * std::max(std::fabs(ref.mean), ref.stddev));
    CHECK(std::fabs(stddev - ref.stddev) <= 0.02 * ref.stddev);
}

TEST_CASE("returns: single terminal tuple") {
    Rng rng(24);
    auto params = zero_value_agent(rng);
    ExperienceBatch batch(1);
    batch[0].s = obs_of(1.0, 0.0, 0.0);
    batch[0].r = 1.0;
    batch[0].terminal = true;
    const auto advset = compute_returns_and_advantages(batch, params, 0.9, 0.0);
    CHECK(advset.returns[0] == 1.0);
    CHECK(advset.advantages[0] == 1.0);
}

TEST_CASE("returns: three rewards, gamma 0.9, zero bootstrap") {
    Rng rng(25);
    auto params = zero_value_agent(rng);
    ExperienceBatch batch(3);
    for (auto& t : batch) {
        t.s = obs_of(1.0, 0.0, 0.0);
        t.r = 1.0;
    }
    batch.back().terminal = true;
    const auto advset = compute_returns_and_advantages(batch, params, 0.9, 0.0);
    CHECK(advset.returns[0] == doctest::Approx(2.71).epsilon(1e-12));
    CHECK(advset.returns[1] == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(advset.returns[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("returns: constant critic, gamma 1, zero rewards telescopes to zero advantage") {
    Rng rng(26);
    auto params = zero_value_agent(rng);
    const double c = 0.37;
    params.critic.layers.back().bias[0] = c;  // V(s) = c everywhere
    ExperienceBatch batch(4);
    for (auto& t : batch) {
        t.s = obs_of(0.3, -0.1, 1.0);
        t.r = 0.0;
    }
    const auto advset = compute_returns_and_advantages(batch, params, 1.0, c);
    for (double a : advset.advantages) CHECK(a == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("returns recursion equals brute-force discounted sums") {
    Rng rng(27);
    auto params = zero_value_agent(rng);
    for (int trial = 0; trial < 30; ++trial) {
        const size_t n = 1 + rng.next_u64() % 10;
        auto batch = random_batch(rng, n);
        const double gamma = rng.uniform(0.05, 1.0);
        const double bootstrap = rng.uniform(-5.0, 5.0);
        std::vector<double> rewards;
        for (const auto& t : batch) rewards.push_back(t.r);
        const auto expected = oracle::brute_force_returns(rewards, gamma, bootstrap);
        const auto advset = compute_returns_and_advantages(batch, params, gamma, bootstrap);
        for (size_t i = 0; i < n; ++i) {
            CHECK(advset.returns[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("loss_grads: zero advantages and zero beta give a zero actor gradient") {
    Rng rng(28);
    auto params = make_actor_critic(2.0, rng, 8, 6);
    auto batch = random_batch(rng, 5);
    AdvantageSet advset;
    advset.returns.assign(5, 1.0);
    advset.advantages.assign(5, 0.0);
    const auto grads = loss_grads(params, batch, advset, 0.0);
    for (const auto& m : grads.actor.weights) {
        for (double g : m.data) CHECK(g == 0.0);
    }
    for (const auto& v : grads.actor.bias) {
        for (double g : v) CHECK(g == 0.0);
    }
}

TEST_CASE("loss_grads: critic fitting the returns exactly has zero critic gradient") {
    Rng rng(29);
    auto params = zero_value_agent(rng);  // V(s) = 0
    auto batch = random_batch(rng, 4);
    AdvantageSet advset;
    advset.returns.assign(4, 0.0);  // R = V = 0
    advset.advantages.assign(4, 1.0);
    const auto grads = loss_grads(params, batch, advset, 0.01);
    for (const auto& m : grads.critic.weights) {
        for (double g : m.data) CHECK(g == 0.0);
    }
}

namespace {

// Central differences are invalid next to a relu kink; resample instances
// whose critic puts any batch observation near one.
bool critic_near_kink(const ActorCriticParams& params, const ExperienceBatch& batch,
                      double margin) {
    for (const auto& t : batch) {
        const std::vector<double> input{t.s.cos_theta, t.s.sin_theta, t.s.theta_dot};
        const auto fw = nn::forward(params.critic, input);
        for (size_t k = 0; k < params.critic.layers.size(); ++k) {
            if (params.critic.layers[k].activation != nn::Activation::relu) continue;
            for (double z : fw.tape.preacts[k]) {
                if (std::fabs(z) < margin) return true;
            }
        }
    }
    return false;
}

}  // namespace

TEST_CASE("loss_grads matches finite differences of the composed losses") {
    Rng rng(2025);
    int done = 0;
    while (done < 50) {
        auto params = make_actor_critic(rng.uniform(0.5, 2.5), rng, 4 + rng.next_u64() % 8,
                                        3 + rng.next_u64() % 6);
        auto batch = random_batch(rng, 1 + rng.next_u64() % 8);
        if (critic_near_kink(params, batch, 1e-3)) continue;
        ++done;
        const double beta = rng.uniform(0.0, 0.05);
        AdvantageSet advset;
        for (size_t i = 0; i < batch.size(); ++i) {
            advset.returns.push_back(rng.uniform(-10.0, 2.0));
            advset.advantages.push_back(rng.uniform(-3.0, 3.0));
        }
        const auto grads = loss_grads(params, batch, advset, beta);

        const double h = 1e-5;
        double worst = 0.0;
        oracle::for_each_param(params.actor, [&](double& slot, size_t k, bool is_weight, size_t i) {
            const double saved = slot;
            slot = saved + h;
            const double fp = actor_loss_oracle(params, batch, advset.advantages, beta);
            slot = saved - h;
            const double fm = actor_loss_oracle(params, batch, advset.advantages, beta);
            slot = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double analytic = is_weight ? grads.actor.weights[k].data[i] : grads.actor.bias[k][i];
            worst = std::max(worst, oracle::rel_err(analytic, fd));
        });
        oracle::for_each_param(params.critic, [&](double& slot, size_t k, bool is_weight, size_t i) {
            const double saved = slot;
            slot = saved + h;
            const double fp = critic_loss_oracle(params, batch, advset.returns);
            slot = saved - h;
            const double fm = critic_loss_oracle(params, batch, advset.returns);
            slot = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double analytic =
                is_weight ? grads.critic.weights[k].data[i] : grads.critic.bias[k][i];
            worst = std::max(worst, oracle::rel_err(analytic, fd));
        });
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("negate_rewards: negation, involution, zero sum, role swap") {
    Rng rng(31);
    auto batch = random_batch(rng, 6);
    batch[0].r = -1.0;
    batch[1].r = -2.0;
    const auto negated = negate_rewards(batch);
    CHECK(negated[0].r == 1.0);
    CHECK(negated[1].r == 2.0);
    for (size_t i = 0; i < batch.size(); ++i) {
        CHECK(batch[i].r + negated[i].r == 0.0);
        CHECK(negated[i].a_mu == batch[i].a_nu);
        CHECK(negated[i].a_nu == batch[i].a_mu);
    }
    const auto twice = negate_rewards(negated);
    for (size_t i = 0; i < batch.size(); ++i) {
        CHECK(twice[i].r == batch[i].r);
        CHECK(twice[i].a_mu == batch[i].a_mu);
    }
}

TEST_CASE("entropy weight pushes the std head toward larger std") {
    Rng rng(32);
    auto params = make_actor_critic(2.0, rng, 8, 6);
    auto batch = random_batch(rng, 6);
    AdvantageSet advset;
    for (size_t i = 0; i < batch.size(); ++i) {
        advset.returns.push_back(rng.uniform(-5.0, 0.0));
        advset.advantages.push_back(rng.uniform(-2.0, 2.0));
    }
    const auto g_low = loss_grads(params, batch, advset, 0.0);
    const auto g_high = loss_grads(params, batch, advset, 0.05);
    // output head row 1 is the std preactivation; larger beta must lower its
    // loss gradient (gradient descent then raises the std).
    const double low = g_low.actor.bias.back()[1];
    const double high = g_high.actor.bias.back()[1];
    CHECK(high < low);
}
