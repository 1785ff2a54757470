#pragma once

#include <optional>

#include "ara3c/rng.hpp"

namespace ara3c {

// Pendulum swing-up environment. theta = 0 is upright, wrapped to [-pi, pi).
// Two torque channels: the protagonist's, clamped to +-max_torque, and the
// adversary's, clamped to +-difficulty*max_torque.

struct PendulumParams {
    double rod_mass = 1.0;
    double rod_length = 1.0;
    double gravity = 10.0;
    double clog_mass = 0.0;   // point mass attached at the rod tip
    double dt = 0.05;
    double max_speed = 8.0;
    double max_torque = 2.0;
    double difficulty = 0.0;  // D in [0,1]; adversary torque clamp = D*max_torque
    double noise_std = 0.0;   // std of the inherent torque noise u
    int episode_len = 200;

    void validate() const;  // throws ConfigError on violated invariants
};

struct PendulumState {
    double theta = 0.0;      // rad, in [-pi, pi)
    double theta_dot = 0.0;  // rad/s
};

struct Observation {
    double cos_theta = 1.0;
    double sin_theta = 0.0;
    double theta_dot = 0.0;
};

struct StepResult {
    PendulumState next_state;
    Observation observation;
    double reward = 0.0;
    double applied_protagonist_torque = 0.0;
    double applied_adversary_torque = 0.0;
};

// One timed external-torque window used by the impulse experiments. The
// impulse bypasses the adversary clamp: it is an evaluation probe, not an
// agent action.
struct ImpulseSchedule {
    int start_step = 0;
    int duration_steps = 1;
    double torque = 0.0;
};

double wrap_angle(double x);  // into [-pi, pi)

Observation make_observation(const PendulumState& state);

// r = -(theta^2 + 0.1*theta_dot^2 + 0.001*a^2); a is the protagonist torque.
double reward(double theta, double theta_dot, double protagonist_action);

// Most negative reachable reward: reward(-pi, max_speed, max_torque).
double reward_lower_bound(const PendulumParams& params);

// theta ~ U[-pi, pi), theta_dot ~ U[-1, 1].
std::pair<PendulumState, Observation> reset(const PendulumParams& params, Rng& rng);

// Semi-implicit Euler step. Both actions are clamped, inherent noise u is
// added when noise_std > 0, and external_torque (impulse channel) is added
// unclamped. Reward is computed from the pre-step state and the clamped
// protagonist torque only. Throws DivergenceError on non-finite actions.
StepResult step(const PendulumState& state, const PendulumParams& params,
                double protagonist_action, double adversary_action, Rng& rng,
                double external_torque = 0.0);

// Scheduled torque contribution at step_index, 0 outside the window.
double impulse_torque(const ImpulseSchedule& schedule, int step_index);

// Stateful wrapper used by rollout and evaluation loops: tracks the step
// count within the current episode. One instance per worker; instances are
// independent and never shared across threads.
class PendulumEnv {
public:
    explicit PendulumEnv(const PendulumParams& params);

    Observation reset(Rng& rng);
    Observation reset_to(const PendulumState& state);  // fixed-start override
    StepResult step(double protagonist_action, double adversary_action, Rng& rng,
                    double external_torque = 0.0);

    const PendulumParams& params() const { return params_; }
    const PendulumState& state() const { return state_; }
    int steps_taken() const { return steps_taken_; }
    // True once the episode has consumed episode_len steps.
    bool episode_over() const { return started_ && steps_taken_ >= params_.episode_len; }
    // A fresh env and a finished episode both need a reset before stepping.
    bool needs_reset() const { return !started_ || steps_taken_ >= params_.episode_len; }

private:
    PendulumParams params_;
    PendulumState state_;
    int steps_taken_ = 0;
    bool started_ = false;
};

}  // namespace ara3c
