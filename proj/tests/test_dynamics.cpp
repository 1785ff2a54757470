#include <cmath>

#include "ara3c/dynamics.hpp"
#include "ara3c/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ara3c;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(-kPi));
    CHECK(wrap_angle(kPi + 0.015) == doctest::Approx(-kPi + 0.015).epsilon(1e-12));
    CHECK(wrap_angle(7.5 * kPi) == doctest::Approx(-0.5 * kPi).epsilon(1e-12));
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double w = wrap_angle(rng.uniform(-50.0, 50.0));
        CHECK(w >= -kPi);
        CHECK(w < kPi);
    }
}

TEST_CASE("reward formula endpoints") {
    CHECK(reward(0.0, 0.0, 0.0) == 0.0);
    CHECK(reward(kPi, 8.0, 2.0) == doctest::Approx(-(kPi * kPi + 6.4 + 0.004)).epsilon(1e-15));
    CHECK(reward(kPi, 8.0, 2.0) == doctest::Approx(-16.2736).epsilon(1e-5));
    CHECK(reward(1.0, 1.0, 1.0) == doctest::Approx(-1.101).epsilon(1e-15));
    PendulumParams params;
    CHECK(reward_lower_bound(params) == doctest::Approx(-16.273604401089358).epsilon(1e-12));
}

TEST_CASE("reset: ranges, observation consistency, Monte Carlo mean") {
    PendulumParams params;
    Rng rng(99);
    double theta_sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto [state, obs] = reset(params, rng);
        if (i < 1000) {
            CHECK(state.theta >= -kPi);
            CHECK(state.theta < kPi);
            CHECK(std::fabs(state.theta_dot) <= 1.0);
            CHECK(obs.cos_theta == doctest::Approx(std::cos(state.theta)).epsilon(1e-15));
            CHECK(obs.sin_theta == doctest::Approx(std::sin(state.theta)).epsilon(1e-15));
            CHECK(obs.cos_theta * obs.cos_theta + obs.sin_theta * obs.sin_theta ==
                  doctest::Approx(1.0).epsilon(1e-12));
        }
        theta_sum += state.theta;
    }
    CHECK(std::fabs(theta_sum / n) < 0.05);
}

TEST_CASE("observation of the upright rest state is (1, 0, 0)") {
    const Observation obs = make_observation(PendulumState{0.0, 0.0});
    CHECK(obs.cos_theta == 1.0);
    CHECK(obs.sin_theta == 0.0);
    CHECK(obs.theta_dot == 0.0);
}

TEST_CASE("step: upright rest with zero torque is a fixed point") {
    PendulumParams params;
    Rng rng(3);
    const auto result = step(PendulumState{0.0, 0.0}, params, 0.0, 0.0, rng);
    CHECK(result.next_state.theta == 0.0);
    CHECK(result.next_state.theta_dot == 0.0);
    CHECK(result.reward == 0.0);
}

TEST_CASE("step: hand-computed transition near the bottom") {
    PendulumParams params;
    Rng rng(4);
    const double theta0 = kPi - 1e-9;
    const auto result = step(PendulumState{theta0, 0.0}, params, 2.0, 0.0, rng);
    // alpha ~ 15*sin(pi) + 3*2 = 6, so theta_dot' = 0.3 and theta wraps.
    CHECK(result.next_state.theta_dot == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(result.next_state.theta == doctest::Approx(-kPi + 0.015).epsilon(1e-6));
    CHECK(result.applied_protagonist_torque == 2.0);
}

TEST_CASE("step: adversary torque clamped to difficulty * max_torque") {
    PendulumParams params;
    params.difficulty = 0.5;
    Rng rng(5);
    const auto result = step(PendulumState{1.0, 0.0}, params, 0.0, 3.0, rng);
    CHECK(result.applied_adversary_torque == 1.0);
}

TEST_CASE("step: non-finite actions are rejected") {
    PendulumParams params;
    Rng rng(6);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)step(PendulumState{}, params, nan, 0.0, rng), DivergenceError);
    CHECK_THROWS_AS((void)step(PendulumState{}, params, 0.0, nan, rng), DivergenceError);
}

TEST_CASE("step matches the independent integrator on 1000 random transitions") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        PendulumParams params;
        params.difficulty = rng.uniform(0.0, 1.0);
        params.clog_mass = rng.uniform(0.0, 0.4);
        PendulumState state{rng.uniform(-kPi, kPi), rng.uniform(-8.0, 8.0)};
        const double a_p = rng.uniform(-3.0, 3.0);
        const double a_a = rng.uniform(-3.0, 3.0);
        const auto got = step(state, params, a_p, a_a, rng);
        const auto expected =
            oracle::pendulum_step(params, state.theta, state.theta_dot, a_p, a_a, 0.0);
        CHECK(std::fabs(got.next_state.theta - expected.theta) < 1e-12);
        CHECK(std::fabs(got.next_state.theta_dot - expected.theta_dot) < 1e-12);
        CHECK(std::fabs(got.reward - expected.reward) < 1e-12);
        CHECK(got.applied_protagonist_torque == expected.tau_p);
        CHECK(got.applied_adversary_torque == expected.tau_a);
    }
}

TEST_CASE("step: wrap and speed invariants hold along random trajectories") {
    PendulumParams params;
    Rng rng(8);
    PendulumState state{rng.uniform(-kPi, kPi), rng.uniform(-1.0, 1.0)};
    const double bound = reward_lower_bound(params);
    for (int i = 0; i < 5000; ++i) {
        const auto result = step(state, params, rng.uniform(-4.0, 4.0), 0.0, rng);
        state = result.next_state;
        CHECK(state.theta >= -kPi);
        CHECK(state.theta < kPi);
        CHECK(std::fabs(state.theta_dot) <= params.max_speed);
        CHECK(result.reward <= 0.0);
        CHECK(result.reward >= bound);
    }
}

TEST_CASE("step: zero-noise determinism is bitwise") {
    PendulumParams params;
    Rng rng1(9), rng2(9);
    const PendulumState state{1.234, -2.5};
    const auto a = step(state, params, 1.1, -0.3, rng1);
    const auto b = step(state, params, 1.1, -0.3, rng2);
    CHECK(a.next_state.theta == b.next_state.theta);
    CHECK(a.next_state.theta_dot == b.next_state.theta_dot);
    CHECK(a.reward == b.reward);
}

TEST_CASE("step: inherent noise has the configured scale") {
    PendulumParams params;
    params.noise_std = 0.5;
    Rng rng(10);
    // From rest at pi/2 with zero torque, the velocity change is
    // (15*sin(pi/2) + 3u)*dt, so the deviation from the noiseless step
    // has std 3*u_std*dt = 0.075.
    const PendulumState state{kPi / 2.0, 0.0};
    const double noiseless = 15.0 * std::sin(kPi / 2.0) * params.dt;
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto result = step(state, params, 0.0, 0.0, rng);
        const double d = result.next_state.theta_dot - noiseless;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / n;
    const double stddev = std::sqrt(sq / n - mean * mean);
    CHECK(std::fabs(mean) < 0.01);
    CHECK(stddev == doctest::Approx(3.0 * 0.5 * params.dt).epsilon(0.05));
}

TEST_CASE("clog mass shifts the gravity response toward the tip-mass limit") {
    // At theta = pi/2 the bare rod gives alpha = 3g/(2l) = 15; adding tip
    // mass moves alpha monotonically toward the point-mass limit g/l = 10.
    PendulumParams params;
    Rng rng(11);
    const PendulumState state{kPi / 2.0, 0.0};
    double prev_alpha = std::numeric_limits<double>::infinity();
    for (double clog : {0.0, 0.074, 0.148, 0.221, 0.295, 1.0, 10.0, 1000.0}) {
        params.clog_mass = clog;
        const auto result = step(state, params, 0.0, 0.0, rng);
        const double alpha = (result.next_state.theta_dot - state.theta_dot) / params.dt;
        const auto expected = oracle::pendulum_step(params, state.theta, state.theta_dot, 0, 0, 0);
        CHECK(result.next_state.theta_dot == doctest::Approx(expected.theta_dot).epsilon(1e-12));
        CHECK(alpha < prev_alpha);
        CHECK(alpha > 10.0 * std::sin(state.theta) - 1e-9);
        prev_alpha = alpha;
    }
    params.clog_mass = 0.0;
    const auto bare = step(state, params, 0.0, 0.0, rng);
    CHECK(bare.next_state.theta_dot / params.dt == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("impulse schedule windows") {
    const ImpulseSchedule schedule{100, 5, 10.0};
    CHECK(impulse_torque(schedule, 99) == 0.0);
    CHECK(impulse_torque(schedule, 100) == 10.0);
    CHECK(impulse_torque(schedule, 102) == 10.0);
    CHECK(impulse_torque(schedule, 104) == 10.0);
    CHECK(impulse_torque(schedule, 105) == 0.0);
}

TEST_CASE("impulse drives the dynamics like an unclamped external torque") {
    PendulumParams params;  // difficulty 0: adversary channel clamped to zero
    Rng rng(12);
    const ImpulseSchedule schedule{0, 5, 10.0};
    PendulumState state{0.0, 0.0};
    PendulumState expected_state{0.0, 0.0};
    for (int t = 0; t < 5; ++t) {
        const auto got = step(state, params, 0.0, 0.0, rng, impulse_torque(schedule, t));
        const auto expected = oracle::pendulum_step(params, expected_state.theta,
                                                    expected_state.theta_dot, 0.0, 0.0, 0.0, 10.0);
        CHECK(got.next_state.theta == doctest::Approx(expected.theta).epsilon(1e-12));
        CHECK(got.next_state.theta_dot == doctest::Approx(expected.theta_dot).epsilon(1e-12));
        state = got.next_state;
        expected_state = PendulumState{expected.theta, expected.theta_dot};
    }
    CHECK(state.theta_dot > 0.0);  // the impulse moved it off the fixed point
}

TEST_CASE("params validation rejects out-of-range values") {
    PendulumParams params;
    params.difficulty = 1.5;
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params.difficulty = 0.5;
    params.dt = 0.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params.dt = 0.05;
    params.clog_mass = -1.0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
}

TEST_CASE("env wrapper tracks episodes and needs_reset") {
    PendulumParams params;
    params.episode_len = 3;
    PendulumEnv env(params);
    CHECK(env.needs_reset());
    Rng rng(13);
    env.reset(rng);
    CHECK(!env.needs_reset());
    CHECK(!env.episode_over());
    for (int i = 0; i < 3; ++i) env.step(0.5, 0.0, rng);
    CHECK(env.episode_over());
    CHECK(env.needs_reset());
    env.reset(rng);
    CHECK(env.steps_taken() == 0);
}
