#include <cmath>

#include "ara3c/errors.hpp"
#include "ara3c/io.hpp"
#include "ara3c/trainer.hpp"
#include "doctest.h"

using namespace ara3c;

namespace {

TrainConfig tiny_config(Algo algo, int episodes = 3, int workers = 1) {
    TrainConfig config;
    config.algo = algo;
    config.workers = workers;
    config.global_episodes = episodes;
    config.batch_size = 16;
    config.seed = 12345;
    config.env.episode_len = 40;
    return config;
}

bool same_params(const ActorCriticParams& a, const ActorCriticParams& b) {
    if (a.action_scale != b.action_scale) return false;
    for (size_t k = 0; k < a.actor.layers.size(); ++k) {
        if (a.actor.layers[k].weights.data != b.actor.layers[k].weights.data) return false;
        if (a.actor.layers[k].bias != b.actor.layers[k].bias) return false;
    }
    for (size_t k = 0; k < a.critic.layers.size(); ++k) {
        if (a.critic.layers[k].weights.data != b.critic.layers[k].weights.data) return false;
        if (a.critic.layers[k].bias != b.critic.layers[k].bias) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("rollout: batch_size 1 yields exactly one tuple") {
    TrainConfig config = tiny_config(Algo::ar_a3c);
    GlobalStore store(config, nullptr);
    PendulumEnv env(config.env_params());
    Rng env_rng(1), policy_rng(2);
    const auto prot = store.protagonist_snapshot();
    const auto adv = store.adversary_snapshot();
    const auto result = rollout(env, prot, adv, 1, Algo::ar_a3c, env_rng, policy_rng);
    CHECK(result.batch.size() == 1);
    CHECK(!result.episode_ended);
}

TEST_CASE("rollout: a3c mode stores exactly zero adversary actions") {
    TrainConfig config = tiny_config(Algo::a3c);
    GlobalStore store(config, nullptr);
    PendulumEnv env(config.env_params());
    Rng env_rng(1), policy_rng(2);
    const auto prot = store.protagonist_snapshot();
    const auto adv = store.adversary_snapshot();
    const auto result = rollout(env, prot, adv, 40, Algo::a3c, env_rng, policy_rng);
    CHECK(result.episode_ended);
    CHECK(result.batch.size() == 40);
    CHECK(result.batch.back().terminal);
    for (const auto& t : result.batch) CHECK(t.a_nu == 0.0);
}

TEST_CASE("rollout: identical seeds give identical tuple sequences") {
    TrainConfig config = tiny_config(Algo::ar_a3c);
    GlobalStore store(config, nullptr);
    const auto prot = store.protagonist_snapshot();
    const auto adv = store.adversary_snapshot();
    auto run = [&] {
        PendulumEnv env(config.env_params());
        Rng env_rng(7), policy_rng(8);
        return rollout(env, prot, adv, 32, Algo::ar_a3c, env_rng, policy_rng);
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.batch.size() == b.batch.size());
    for (size_t i = 0; i < a.batch.size(); ++i) {
        CHECK(a.batch[i].a_mu == b.batch[i].a_mu);
        CHECK(a.batch[i].a_nu == b.batch[i].a_nu);
        CHECK(a.batch[i].r == b.batch[i].r);
        CHECK(a.batch[i].s.cos_theta == b.batch[i].s.cos_theta);
    }
}

TEST_CASE("train: one episode with batch = episode length updates each agent once") {
    TrainConfig config = tiny_config(Algo::ar_a3c, 1);
    config.batch_size = config.env.episode_len;
    int updates = 0;
    const auto init_adv = GlobalStore(config, nullptr).adversary_snapshot();
    const auto result = train(config, nullptr, [&](const ExperienceBatch& prot_view,
                                                   const ExperienceBatch& adv_view) {
        ++updates;
        CHECK(prot_view.size() == adv_view.size());
    });
    CHECK(updates == 1);
    CHECK(result.model.episode_count == 1);
    CHECK(!same_params(result.model.adversary, init_adv));  // adversary trained
}

TEST_CASE("train: a3c leaves the adversary bit-identical to initialization") {
    TrainConfig config = tiny_config(Algo::a3c, 4);
    const auto init_adv = GlobalStore(config, nullptr).adversary_snapshot();
    const auto result = train(config, nullptr, [](const ExperienceBatch&, const ExperienceBatch& adv_view) {
        CHECK(adv_view.empty());
    });
    CHECK(same_params(result.model.adversary, init_adv));
    CHECK(!same_params(result.model.protagonist, GlobalStore(config, nullptr).protagonist_snapshot()));
}

TEST_CASE("train: zero-sum bookkeeping between the two batch views") {
    TrainConfig config = tiny_config(Algo::ar_a3c, 2);
    int checked = 0;
    train(config, nullptr, [&](const ExperienceBatch& prot_view, const ExperienceBatch& adv_view) {
        REQUIRE(prot_view.size() == adv_view.size());
        for (size_t i = 0; i < prot_view.size(); ++i) {
            CHECK(prot_view[i].r + adv_view[i].r == 0.0);
            ++checked;
        }
    });
    CHECK(checked >= 2 * 40);
}

TEST_CASE("train: single-worker runs are bit-reproducible") {
    TrainConfig config = tiny_config(Algo::ar_a3c, 3);
    const auto a = train(config);
    const auto b = train(config);
    CHECK(same_params(a.model.protagonist, b.model.protagonist));
    CHECK(same_params(a.model.adversary, b.model.adversary));
    REQUIRE(a.curve.size() == b.curve.size());
    for (size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].reward == b.curve[i].reward);
        CHECK(a.curve[i].episode == b.curve[i].episode);
    }
    // and the serialized form is byte-identical
    Checkpoint ca = make_checkpoint(a.model);
    Checkpoint cb = make_checkpoint(b.model);
    cb.created = ca.created;
    CHECK(checkpoint_to_json(ca) == checkpoint_to_json(cb));
}

TEST_CASE("train: two workers complete exactly N episodes with a full curve") {
    TrainConfig config = tiny_config(Algo::ar_a3c, 10, 2);
    const auto result = train(config);
    CHECK(result.model.episode_count == 10);
    CHECK(result.curve.size() == 10);
    for (size_t i = 0; i < result.curve.size(); ++i) {
        CHECK(result.curve[i].episode == static_cast<int>(i) + 1);
    }
}

TEST_CASE("train: resume continues the episode numbering") {
    TrainConfig config = tiny_config(Algo::ar_a3c, 3);
    const auto first = train(config);
    CHECK(first.model.episode_count == 3);
    TrainConfig more = config;
    more.global_episodes = 2;
    const auto second = train(more, &first.model);
    CHECK(second.model.episode_count == 5);
    REQUIRE(second.curve.size() == 2);
    CHECK(second.curve[0].episode == 4);
    CHECK(second.curve[1].episode == 5);
}

TEST_CASE("train: learning sanity on defaults" * doctest::timeout(300)) {
    // last 10% of episodes must improve on the first 10% by at least 2x in
    // magnitude (rewards are negative; better = closer to 0)
    TrainConfig config;  // defaults: ar_a3c, N=1500, 2 workers
    config.seed = 11;
    const auto result = train(config);
    REQUIRE(result.curve.size() == 1500);
    const size_t tenth = result.curve.size() / 10;
    double first = 0.0, last = 0.0;
    for (size_t i = 0; i < tenth; ++i) {
        first += result.curve[i].reward;
        last += result.curve[result.curve.size() - 1 - i].reward;
    }
    first /= static_cast<double>(tenth);
    last /= static_cast<double>(tenth);
    CHECK(std::fabs(last) * 2.0 <= std::fabs(first));
}

TEST_CASE("config validation names the offending field") {
    TrainConfig config = tiny_config(Algo::a3c);
    config.workers = 0;
    CHECK_THROWS_WITH_AS(config.validate(), "workers must be >= 1", ConfigError);
    config.workers = 1;
    config.gamma = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.gamma = 0.9;
    config.difficulty = -0.1;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("difficulty flows from config into the environment") {
    TrainConfig config = tiny_config(Algo::ar_a3c);
    config.difficulty = 0.25;
    CHECK(config.env_params().difficulty == 0.25);
}
